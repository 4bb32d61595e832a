"""Nonabelian quadratic Poisson brackets on noncommutative projective spaces."""

__version__ = "0.1.0"
