"""mmgeo - Stochastic-geometry analytics for directional mmWave NLOS channels."""

__version__ = "0.1.0"
