"""Numerical laboratory for metric surgery on sampled manifolds and
intrinsic flat distance bounds."""

__version__ = "0.1.0"
