"""Numerical companion for energy flux, Besov regularity and vanishing viscosity in 2D."""

__version__ = "0.1.0"
