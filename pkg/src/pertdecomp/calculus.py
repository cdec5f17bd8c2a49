"""Commutator helpers used to check operator identities numerically."""
from __future__ import annotations

from math import factorial

import numpy as np

from .densela import as_matrix
from .errors import DimensionMismatch

MAX_ORDER = 8


def _pair(a, b):
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return a, b


def inner_derivation(a, b) -> np.ndarray:
    """The commutator ``[a, b] = ab - ba``."""
    a, b = _pair(a, b)
    return a @ b - b @ a


def iterated_derivation(a, b, order: int) -> np.ndarray:
    """Apply ``[a, .]`` to ``b`` ``order`` times."""
    if order < 0 or order > MAX_ORDER:
        raise ValueError(f"order must lie in 0..{MAX_ORDER}, got {order}")
    a, b = _pair(a, b)
    out = b
    for _ in range(order):
        out = a @ out - out @ a
    return out


def conjugation_series(a, b, x: complex, terms: int = 12) -> np.ndarray:
    """Truncated sum_k x^k [a,.]^k(b) / k!, which approximates e^{xa} b e^{-xa}.

    ``terms`` is the highest power kept; not limited by MAX_ORDER.
    """
    a, b = _pair(a, b)
    out = np.zeros_like(b)
    term = b
    for k in range(terms + 1):
        out = out + (x**k / factorial(k)) * term
        term = a @ term - term @ a
    return out
