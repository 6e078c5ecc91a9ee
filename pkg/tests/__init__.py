"""Test package for the mmgeo CLI application."""
