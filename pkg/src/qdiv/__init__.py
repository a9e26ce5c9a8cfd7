"""Exact q-series identities for divisor generating functions and the
cumulants of reachability in random acyclic digraphs."""

from __future__ import annotations

from qdiv.errors import (
    ConfigError,
    DomainError,
    LengthError,
    NotInvertibleError,
    OrderMismatchError,
    QDivError,
)
from qdiv.series import BiSeries, Polynomial, QSeries

__all__ = [
    "BiSeries",
    "ConfigError",
    "DomainError",
    "LengthError",
    "NotInvertibleError",
    "OrderMismatchError",
    "Polynomial",
    "QDivError",
    "QSeries",
]

__version__ = "0.1.0"
