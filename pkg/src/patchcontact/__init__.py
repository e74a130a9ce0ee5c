"""Adhesive patch contact on a piecewise-homogeneous orthotropic plane."""

__version__ = "0.1.0"
