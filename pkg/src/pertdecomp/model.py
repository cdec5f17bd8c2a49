"""Periodic Ising chain with longitudinal and transverse fields.

    H = sum_k J[k] Z_k Z_{k+1} + g[k] Z_k + h[k] X_k,   site 2n+1 == site 1

split into the even-bond, odd-bond, longitudinal and transverse blocks
``a1, a2, b1, b2``. Sites and bonds are 1-based at the interface; ``J[k]``
(1-based) couples sites k and k+1.

Note: on a 2-site ring both bonds couple sites 1 and 2, so the single
physical bond is counted twice (``a1`` and ``a2`` both carry a Z1 Z2 term).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .densela import MAX_DIM, PAULI, SIGMA_I, kron_all
from .errors import DimensionCapExceeded, SiteOutOfRange, ValidationError

MAX_SITES = 12


def _as_vector(value, n_sites: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n_sites, float(arr))
    if arr.shape != (n_sites,):
        raise ValidationError(f"{name} must have length {n_sites}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class ChainSpec:
    n_sites: int
    J: np.ndarray
    g: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        n = self.n_sites
        if isinstance(n, bool) or int(n) != n:
            raise ValidationError(f"n_sites must be an integer, got {n!r}")
        n = int(n)
        if n < 2 or n % 2:
            raise ValidationError(f"n_sites must be even and >= 2, got {n}")
        object.__setattr__(self, "n_sites", n)
        for name in ("J", "g", "h"):
            arr = _as_vector(getattr(self, name), n, name)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def uniform(cls, n_sites: int, J: float = 1.0, g: float = 0.0, h: float = 0.0):
        return cls(n_sites, J, g, h)

    @property
    def dim(self) -> int:
        return 2**self.n_sites

    def replace(self, **changes) -> "ChainSpec":
        params = dict(n_sites=self.n_sites, J=self.J, g=self.g, h=self.h)
        params.update(changes)
        return ChainSpec(**params)

    def bonds_of_site(self, k: int) -> tuple[int, int]:
        """1-based indices of the bonds (left, right) touching site k."""
        left = k - 1 if k > 1 else self.n_sites
        return left, k

    def digest(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "J": self.J.tolist(),
            "g": self.g.tolist(),
            "h": self.h.tolist(),
        }


@dataclass(frozen=True)
class HamiltonianTerms:
    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    h_total: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "h_total", self.a1 + self.a2 + self.b1 + self.b2)

    @property
    def diagonal(self) -> np.ndarray:
        """Real diagonal of the Z-diagonal part a1 + a2 + b1."""
        return np.real(np.diag(self.a1) + np.diag(self.a2) + np.diag(self.b1))


def _check_size(n_sites: int):
    if n_sites > MAX_SITES or 2**n_sites > MAX_DIM:
        raise DimensionCapExceeded(f"{n_sites} sites exceeds the cap of {MAX_SITES}")


def site_operator(n_sites: int, k: int, p: str) -> np.ndarray:
    """Pauli ``p`` acting on 1-based site ``k`` of an ``n_sites`` register."""
    if not 1 <= k <= n_sites:
        raise SiteOutOfRange(f"site {k} not in 1..{n_sites}")
    _check_size(n_sites)
    if p not in ("X", "Y", "Z"):
        raise ValueError(f"unknown Pauli label {p!r}")
    return kron_all([PAULI[p] if i == k else SIGMA_I for i in range(1, n_sites + 1)])


def z_diagonal(n_sites: int, k: int) -> np.ndarray:
    """Diagonal of Z on site k as a real vector (first site is most significant)."""
    bits = (np.arange(2**n_sites) >> (n_sites - k)) & 1
    return 1.0 - 2.0 * bits


def _diagonals(spec: ChainSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = spec.n_sites
    z = [z_diagonal(n, k) for k in range(1, n + 1)]
    a1 = np.zeros(2**n)
    a2 = np.zeros(2**n)
    for k in range(1, n + 1):
        right = k % n + 1
        term = spec.J[k - 1] * z[k - 1] * z[right - 1]
        if k % 2:
            a1 += term
        else:
            a2 += term
    b1 = sum(spec.g[k - 1] * z[k - 1] for k in range(1, n + 1))
    return a1, a2, b1


def transverse_operator(n_sites: int, weights) -> np.ndarray:
    """Sum_k weights[k] X_k as a dense matrix."""
    weights = np.asarray(weights, dtype=float)
    out = np.zeros((2**n_sites, 2**n_sites), dtype=complex)
    idx = np.arange(2**n_sites)
    for k in range(1, n_sites + 1):
        flip = idx ^ (1 << (n_sites - k))
        out[idx, flip] += weights[k - 1]
    return out


def build_terms(spec: ChainSpec) -> HamiltonianTerms:
    _check_size(spec.n_sites)
    a1, a2, b1 = _diagonals(spec)
    return HamiltonianTerms(
        a1=np.diag(a1).astype(complex),
        a2=np.diag(a2).astype(complex),
        b1=np.diag(b1).astype(complex),
        b2=transverse_operator(spec.n_sites, spec.h),
    )


def build_hamiltonian_direct(spec: ChainSpec) -> np.ndarray:
    """Sum-of-terms construction from embedded Pauli operators.

    Slow on purpose; kept as an independent check on :func:`build_terms`.
    """
    n = spec.n_sites
    H = np.zeros((2**n, 2**n), dtype=complex)
    for k in range(1, n + 1):
        right = k % n + 1
        H += spec.J[k - 1] * site_operator(n, k, "Z") @ site_operator(n, right, "Z")
        H += spec.g[k - 1] * site_operator(n, k, "Z")
        H += spec.h[k - 1] * site_operator(n, k, "X")
    return H


def shift_permutation(n_sites: int) -> np.ndarray:
    """Permutation matrix moving the state of site k to site k+1 (cyclically)."""
    dim = 2**n_sites
    P = np.zeros((dim, dim))
    for s in range(dim):
        bits = [(s >> (n_sites - k)) & 1 for k in range(1, n_sites + 1)]
        shifted = bits[-1:] + bits[:-1]
        s2 = int("".join(map(str, shifted)), 2)
        P[s2, s] = 1.0
    return P
