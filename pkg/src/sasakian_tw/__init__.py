"""Numerical verification of Tanaka-Webster biharmonic hypersurfaces in the Sasakian space form R^{2m+1}(-3)."""

__version__ = "0.1.0"
