"""Commands package for the mmgeo CLI application.

This package contains the analyze, simulate and compare commands.
"""
