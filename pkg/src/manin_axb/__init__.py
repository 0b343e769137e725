"""Desk-scale numerical checks of point counts, Peyre constants, p-adic
oscillatory integrals and exponential sums for compactifications of the
ax+b group."""

__version__ = "0.1.0"
