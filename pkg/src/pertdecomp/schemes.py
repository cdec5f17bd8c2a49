"""Product-formula constructions for the single qubit, the two-site block and the chain.

The perturbative variants rescale transverse-field coefficients by products
of ``f(x) = tan(x) / x``. Conventional second-order Trotter and the
unit-coefficient nested formula are the baselines they are compared with.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import pi, tan

import numpy as np

from .densela import (
    SIGMA_I,
    SIGMA_X,
    SIGMA_Z,
    HermitianPropagator,
    diag_phases,
    expm_hermitian,
    kron,
)
from .errors import NearPole, UnsupportedScheme
from .model import ChainSpec, HamiltonianTerms, build_terms

POLE_GUARD = 1e-3
SMALL_ARG = 1e-8


class SchemeId(str, enum.Enum):
    EXACT = "exact"
    TROTTER2 = "trotter2"
    NESTED_UNIT = "nested-unit"
    NESTED_PERTURBATIVE = "nested-pert"


def _near_pole(x: float) -> bool:
    return abs(abs(x) % pi - pi / 2) <= POLE_GUARD


def scaling_f(x: float, where: str | None = None) -> float:
    """tan(x)/x, with the removable singularity at 0 filled in as 1."""
    if abs(x) < SMALL_ARG:
        return 1.0
    if _near_pole(x):
        raise NearPole(x, where)
    return tan(x) / x


def lambda_opt(t: float) -> float:
    """Optimal transverse rescaling of the target, t / tan(t)."""
    if abs(t) < SMALL_ARG:
        return 1.0
    r = abs(t) % pi
    if min(r, pi - r) <= POLE_GUARD:
        # zero of tan: the reciprocal has a pole here
        raise NearPole(t, "zero of tan")
    return 1.0 / scaling_f(t)


# -- single qubit: H = alpha X + Z -------------------------------------------


def single_qubit_exact(alpha: float, t: float) -> np.ndarray:
    return expm_hermitian(alpha * SIGMA_X + SIGMA_Z, t)


def _single_qubit_split(alpha: float, t: float, scale: float) -> np.ndarray:
    outer = expm_hermitian(SIGMA_X, t * alpha * scale / 2)
    return outer @ expm_hermitian(SIGMA_Z, t) @ outer


def single_qubit_trotter2(alpha: float, t: float) -> np.ndarray:
    return _single_qubit_split(alpha, t, 1.0)


def single_qubit_perturbative(alpha: float, t: float) -> np.ndarray:
    return _single_qubit_split(alpha, t, scaling_f(t))


# -- two-site block: A = J ZZ, B = g1 Z1 + g2 Z2, C = h1 X1 + h2 X2 ---------


def two_qubit_blocks(J, g1, g2, h1, h2):
    A = J * kron(SIGMA_Z, SIGMA_Z)
    B = g1 * kron(SIGMA_Z, SIGMA_I) + g2 * kron(SIGMA_I, SIGMA_Z)
    C = h1 * kron(SIGMA_X, SIGMA_I) + h2 * kron(SIGMA_I, SIGMA_X)
    return A, B, C


def two_qubit_exact(J, g1, g2, h1, h2, alpha, t) -> np.ndarray:
    A, B, C = two_qubit_blocks(J, g1, g2, h1, h2)
    return expm_hermitian(A + alpha * (B + C), t)


def _two_qubit_split(J, g1, g2, h1, h2, alpha, t, scale) -> np.ndarray:
    A, B, C = two_qubit_blocks(J, g1, g2, h1, h2)
    outer = expm_hermitian(alpha * (B + scale * C), t / 2)
    return outer @ expm_hermitian(A, t) @ outer


def two_qubit_trotter2(J, g1, g2, h1, h2, alpha, t) -> np.ndarray:
    return _two_qubit_split(J, g1, g2, h1, h2, alpha, t, 1.0)


def two_qubit_perturbative(J, g1, g2, h1, h2, alpha, t) -> np.ndarray:
    return _two_qubit_split(J, g1, g2, h1, h2, alpha, t, scaling_f(J * t, "J*t"))


# -- chain coefficients ------------------------------------------------------


@dataclass(frozen=True)
class CoefficientSet:
    """Per-site multipliers of h_k in the transverse factors.

    ``beyond_first_pole`` lists the tan arguments that were evaluated past
    pi/2 (outside the guard band but on a later branch of tan).
    """

    c: np.ndarray
    variant: str
    beyond_first_pole: tuple[str, ...] = ()


def _f_site(arg: float, label: str, flags: list) -> float:
    if abs(arg) > pi / 2:
        flags.append(label)
    return scaling_f(arg, label)


def cascade_coefficients(spec: ChainSpec, t: float, level: int) -> CoefficientSet:
    """Coefficients of the intermediate transverse operators of the nested formula.

    level 1: f of the odd bond holding the site.
    level 2: f of both bonds touching the site.
    level 3: level 2 times f(g_k t); this is what the nested formula uses.
    """
    if level not in (1, 2, 3):
        raise ValueError(f"level must be 1, 2 or 3, got {level}")
    flags: list[str] = []
    c = np.empty(spec.n_sites)
    for k in range(1, spec.n_sites + 1):
        left, right = spec.bonds_of_site(k)
        if level == 1:
            bond = k if k % 2 else k - 1
            c[k - 1] = _f_site(spec.J[bond - 1] * t, f"site {k}: J[{bond}]*t", flags)
            continue
        val = _f_site(spec.J[left - 1] * t, f"site {k}: J[{left}]*t", flags)
        val *= _f_site(spec.J[right - 1] * t, f"site {k}: J[{right}]*t", flags)
        if level == 3:
            val *= _f_site(spec.g[k - 1] * t, f"site {k}: g[{k}]*t", flags)
        c[k - 1] = val
    return CoefficientSet(c, f"level{level}", tuple(flags))


def build_coefficients(spec: ChainSpec, t: float, variant: str) -> CoefficientSet:
    if variant == "unit":
        return CoefficientSet(np.ones(spec.n_sites), "unit")
    if variant == "perturbative":
        cs = cascade_coefficients(spec, t, 3)
        return CoefficientSet(cs.c, "perturbative", cs.beyond_first_pole)
    raise ValueError(f"unknown coefficient variant {variant!r}")


# -- chain product formulas --------------------------------------------------


def apply_transverse_rotation(m: np.ndarray, angles) -> np.ndarray:
    """Left-multiply ``m`` by prod_k exp(-i angles[k] X_k).

    The factors act on distinct sites and commute, so each is applied as a
    2x2 rotation through a bit-flip of the row index.
    """
    angles = np.asarray(angles, dtype=float)
    n = len(angles)
    shape = m.shape
    out = m
    for k in range(1, n + 1):
        a = angles[k - 1]
        if a == 0.0:
            continue
        # axis 1 is the bit of site k (site 1 most significant)
        blocks = out.reshape(2 ** (k - 1), 2, -1)
        out = (np.cos(a) * blocks - 1j * np.sin(a) * blocks[:, ::-1, :]).reshape(shape)
    return out


def transverse_rotation(angles) -> np.ndarray:
    """Dense form of prod_k exp(-i angles[k] X_k)."""
    n = len(angles)
    return apply_transverse_rotation(np.eye(2**n, dtype=complex), angles)


# Factor order of the 15-factor formula: (block, fraction of t).
# "x" is the rescaled transverse block, the rest are Z-diagonal.
NESTED_FACTORS = (
    ("x", 1 / 8), ("b1", 1 / 4), ("x", 1 / 8), ("a2", 1 / 2),
    ("x", 1 / 8), ("b1", 1 / 4), ("x", 1 / 8), ("a1", 1.0),
    ("x", 1 / 8), ("b1", 1 / 4), ("x", 1 / 8), ("a2", 1 / 2),
    ("x", 1 / 8), ("b1", 1 / 4), ("x", 1 / 8),
)


def _apply_factor(m, kind, diag, angles):
    if kind == "x":
        return apply_transverse_rotation(m, angles)
    return diag[kind][:, None] * m


def nested_product(
    terms: HamiltonianTerms,
    coeffs: CoefficientSet,
    spec: ChainSpec,
    t: float,
    start: np.ndarray | None = None,
) -> np.ndarray:
    """15-factor symmetric product with transverse block sum_k c_k h_k X_k.

    With ``start`` the product is applied to that matrix instead of the identity.
    """
    diag = {
        name: diag_phases(np.real(np.diag(getattr(terms, name))), t * frac)
        for name, frac in (("a1", 1.0), ("a2", 0.5), ("b1", 0.25))
    }
    angles = (t / 8) * coeffs.c * spec.h
    m = np.eye(terms.a1.shape[0], dtype=complex) if start is None else start
    for kind, _ in reversed(NESTED_FACTORS):
        m = _apply_factor(m, kind, diag, angles)
    return m


def trotter2_chain(
    terms: HamiltonianTerms, t: float, h=None, start: np.ndarray | None = None
) -> np.ndarray:
    """e^{-i t/2 B2} e^{-i t (A1+A2+B1)} e^{-i t/2 B2}.

    ``h`` (transverse fields) enables the fast site-wise rotation; without it
    the outer factor is exponentiated densely.
    """
    middle = diag_phases(terms.diagonal, t)
    m = np.eye(len(middle), dtype=complex) if start is None else start
    if h is None:
        outer = expm_hermitian(terms.b2, t / 2)
        return outer @ (middle[:, None] * (outer @ m))
    angles = (t / 2) * np.asarray(h, dtype=float)
    m = apply_transverse_rotation(m, angles)
    m = middle[:, None] * m
    return apply_transverse_rotation(m, angles)


def exact_chain(terms: HamiltonianTerms, t: float) -> np.ndarray:
    return expm_hermitian(terms.h_total, t)


def evolve(
    scheme: SchemeId | str,
    spec: ChainSpec,
    t: float,
    steps: int = 1,
    terms: HamiltonianTerms | None = None,
    exact: HermitianPropagator | None = None,
    start: np.ndarray | None = None,
) -> np.ndarray:
    """Evolution operator of ``scheme`` for total time ``t``.

    With ``steps > 1`` the formula is applied ``steps`` times at ``t/steps``
    (perturbative coefficients are evaluated at the step time). ``start``
    returns ``U @ start`` instead of ``U``.
    """
    scheme = SchemeId(scheme)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    terms = build_terms(spec) if terms is None else terms
    if scheme is SchemeId.EXACT:
        prop = exact if exact is not None else HermitianPropagator(terms.h_total)
        u = prop(t)
        return u if start is None else u @ start
    dt = t / steps
    m = start
    if scheme is SchemeId.TROTTER2:
        for _ in range(steps):
            m = trotter2_chain(terms, dt, spec.h, m)
        return m
    variant = "unit" if scheme is SchemeId.NESTED_UNIT else "perturbative"
    coeffs = build_coefficients(spec, dt, variant)
    for _ in range(steps):
        m = nested_product(terms, coeffs, spec, dt, m)
    return m


def local_unitary_count(scheme: SchemeId | str, spec: ChainSpec) -> tuple[int, Fraction]:
    """Single-site plus two-site unitaries in one application of ``scheme``.

    Each B1/B2-type factor costs one rotation per site, each A1/A2 factor
    one gate per bond it contains (n_sites / 2).
    """
    scheme = SchemeId(scheme)
    sites, bonds = spec.n_sites, spec.n_sites // 2
    trotter2 = 2 * sites + (sites + 2 * bonds)
    if scheme is SchemeId.TROTTER2:
        count = trotter2
    elif scheme in (SchemeId.NESTED_UNIT, SchemeId.NESTED_PERTURBATIVE):
        kinds = [kind for kind, _ in NESTED_FACTORS]
        count = (kinds.count("x") + kinds.count("b1")) * sites
        count += (kinds.count("a1") + kinds.count("a2")) * bonds
    else:
        raise UnsupportedScheme(f"no gate count for {scheme.value}")
    return count, Fraction(count, trotter2)
