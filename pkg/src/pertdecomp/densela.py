"""Dense complex linear algebra on numpy arrays.

Every operator in the package is a square ``complex128`` ndarray. Exact
evolution goes through a Hermitian eigendecomposition so the factorization
can be reused across a whole time grid.
"""
from __future__ import annotations

from functools import reduce

import numpy as np

from .errors import ConvergenceFailure, DimensionCapExceeded, NotHermitian

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
MAX_DIM = 2**12

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"I": SIGMA_I, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}


def as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise DimensionCapExceeded(f"dimension {m.shape[0]} exceeds cap {MAX_DIM}")
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def is_unitary(m, tol: float = UNITARY_TOL) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))) <= tol)


def kron(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[0] * b.shape[0] > MAX_DIM:
        raise DimensionCapExceeded(
            f"kron dimension {a.shape[0] * b.shape[0]} exceeds cap {MAX_DIM}"
        )
    return np.kron(a, b)


def kron_all(mats) -> np.ndarray:
    return reduce(kron, mats)


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Return ascending eigenvalues and a unitary eigenvector matrix of ``m``."""
    m = as_matrix(m)
    if not is_hermitian(m):
        raise NotHermitian("matrix is not Hermitian within %.0e" % HERMITIAN_TOL)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return w, v


class HermitianPropagator:
    """Cached eigendecomposition of ``h`` giving ``exp(sign * i t h)`` for any t."""

    def __init__(self, h):
        self.eigenvalues, self.eigenvectors = hermitian_eig(h)
        self._vdag = dagger(self.eigenvectors)

    def __call__(self, t: float, sign: int = -1) -> np.ndarray:
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if t == 0:
            return np.eye(len(self.eigenvalues), dtype=complex)
        phases = np.exp(sign * 1j * t * self.eigenvalues)
        return (self.eigenvectors * phases) @ self._vdag


def expm_hermitian(h, t: float, sign: int = -1) -> np.ndarray:
    """Exponential of a Hermitian generator.

    ``sign=-1`` gives the forward evolution ``exp(-i t h)``, ``sign=+1`` its
    inverse ``exp(+i t h)``.
    """
    return HermitianPropagator(h)(t, sign)


def diag_expm(diagonal, t: float) -> np.ndarray:
    """``exp(-i t D)`` for the real diagonal matrix ``D`` with the given diagonal."""
    d = np.asarray(diagonal, dtype=float)
    return np.diag(np.exp(-1j * t * d))


def diag_phases(diagonal, t: float) -> np.ndarray:
    """Diagonal entries of :func:`diag_expm`, for applying as a row/column scale."""
    return np.exp(-1j * t * np.asarray(diagonal, dtype=float))
