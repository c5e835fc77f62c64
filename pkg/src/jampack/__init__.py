"""Jammed packings of equal spheres by nonsmooth maximization of the maximal radius function."""

__version__ = "0.1.0"
