"""Cyclic reduction for Hermitian positive-definite block-tridiagonal systems."""
