"""Entry point for running mmgeo as a module.

This module allows the package to be executed with `python -m mmgeo`.
"""

from mmgeo.main import app

if __name__ == "__main__":
  app()
