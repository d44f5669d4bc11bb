"""Collectivity and criticality diagnostics for coupled systems.

Measures how strongly a system of many coupled components moves as one:
time-resolved eigenspectra of empirical correlation matrices (including
lag-shifted cross-market merging), log-periodic power-law fitting of
critical dynamics, and two exactly solvable reference models (the
separable-coupling collective-state model and the Weierstrass random walk)
that anchor the numerics.
"""

__version__ = "0.1.0"

from .errors import DataError, NumericError

from . import corr, lppl, marketdata, rpa, spectral, synthetic, weierstrass  # noqa: E402

__all__ = [
    "DataError",
    "NumericError",
    "__version__",
    "corr",
    "lppl",
    "marketdata",
    "rpa",
    "spectral",
    "synthetic",
    "weierstrass",
]
