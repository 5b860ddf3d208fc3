"""Numerical laboratory for the perimeter-torsion functional on planar domains."""
__version__ = "0.1.0"
