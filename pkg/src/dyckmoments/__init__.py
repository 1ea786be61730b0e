"""Moment families of deformed-area statistics on Dyck excursions and bridges.

The library computes the limit-law moment recursions, their tree-diagram
expansion, exact finite-size oracles (enumeration and a coefficient DP),
Monte Carlo verification, the p -> 1/2 and logarithmic limit regimes, and
the classical area-law reference distribution, all cross-validated against
each other.
"""

from .numerics import (
    DEFAULT_PRECISION,
    constants,
    precision,
    set_working_precision,
    working_precision,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_PRECISION",
    "constants",
    "precision",
    "set_working_precision",
    "working_precision",
    "__version__",
]
