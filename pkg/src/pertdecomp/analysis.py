"""Fidelity curves, advantage windows and improvement metrics.

All comparisons apply one formula over the full time ``t`` and measure it
against exact evolution at the same ``t``.  The perturbative nested formula
is compared with a ``reference`` scheme; by default this is the
unit-coefficient nested formula, the baseline behind the reported error
reductions.  ``SchemeId.TROTTER2`` can be passed instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .densela import HermitianPropagator, is_unitary
from .errors import BaselineNotCrossed, DimensionMismatch, NearPole, NotUnitary
from .model import ChainSpec, build_terms
from .schemes import SchemeId, build_coefficients, evolve

FIDELITY_UNITARY_TOL = 1e-9
REFINE_DIVISIONS = 16


def fidelity(u, v, check: bool = True) -> float:
    """|Tr(u v^dagger)|^2 / d^2."""
    u, v = np.asarray(u), np.asarray(v)
    if u.shape != v.shape:
        raise DimensionMismatch(f"shapes {u.shape} and {v.shape} differ")
    if check and not (is_unitary(u, FIDELITY_UNITARY_TOL) and is_unitary(v, FIDELITY_UNITARY_TOL)):
        raise NotUnitary("fidelity needs unitary arguments")
    d = u.shape[0]
    # Tr(u v^dagger) = sum_ij u_ij conj(v_ij)
    overlap = np.vdot(v, u)
    return float(abs(overlap) ** 2 / d**2)


def infidelity(u, v) -> float:
    """1 - fidelity via eigenphases of u v^dagger, free of the 1 - F cancellation."""
    theta = np.angle(np.linalg.eigvals(np.asarray(u) @ np.asarray(v).conj().T))
    d = len(theta)
    diff = theta[:, None] - theta[None, :]
    return float(np.sum(2 * np.sin(diff / 2) ** 2) / d**2)


def operator_error(u, v) -> float:
    """Spectral norm of u - v."""
    return float(np.linalg.norm(np.asarray(u) - np.asarray(v), 2))


@dataclass(frozen=True)
class FidelityCurve:
    t_grid: np.ndarray
    fidelity: np.ndarray
    scheme: SchemeId
    spec_digest: dict


class Evaluator:
    """Caches the Hamiltonian blocks and the exact propagator for one spec."""

    def __init__(self, spec: ChainSpec):
        self.spec = spec
        self.terms = build_terms(spec)
        self.exact = HermitianPropagator(self.terms.h_total)

    def fidelity_at(self, scheme: SchemeId, t: float) -> float:
        """Fidelity of ``scheme`` against exact evolution at time ``t``.

        With exact = V P V^dagger, Tr(exact U^dagger) = sum_j p_j conj((V^dagger U V)_jj),
        and U V is formed by applying the factors to V, avoiding any
        d^3 product.
        """
        scheme = SchemeId(scheme)
        if scheme is SchemeId.EXACT:
            return 1.0
        vecs = self.exact.eigenvectors
        phases = np.exp(-1j * t * self.exact.eigenvalues)
        uv = evolve(scheme, self.spec, t, terms=self.terms, start=vecs)
        diag = np.einsum("kj,kj->j", vecs.conj(), uv)
        d = len(phases)
        return float(abs(np.dot(phases, diag.conj())) ** 2 / d**2)

    def difference_at(self, reference: SchemeId, t: float) -> float:
        return self.fidelity_at(SchemeId.NESTED_PERTURBATIVE, t) - self.fidelity_at(reference, t)


def pole_points(spec: ChainSpec, t_grid) -> list[float]:
    """Grid times where the perturbative coefficients hit the pole guard."""
    bad = []
    for t in t_grid:
        try:
            build_coefficients(spec, float(t), "perturbative")
        except NearPole:
            bad.append(float(t))
    return bad


def _check_grid(t_grid) -> np.ndarray:
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0:
        raise ValueError("t_grid must be a non-empty vector")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly ascending")
    return t_grid


def fidelity_curve(
    spec: ChainSpec, scheme: SchemeId | str, t_grid, evaluator: Evaluator | None = None
) -> FidelityCurve:
    scheme = SchemeId(scheme)
    t_grid = _check_grid(t_grid)
    if scheme is SchemeId.NESTED_PERTURBATIVE:
        bad = pole_points(spec, t_grid)
        if bad:
            raise NearPole(bad[0], "fidelity curve", points=bad)
    ev = evaluator or Evaluator(spec)
    values = np.array([ev.fidelity_at(scheme, float(t)) for t in t_grid])
    digest = dict(spec.digest(), scheme=scheme.value)
    return FidelityCurve(t_grid, values, scheme, digest)


@dataclass(frozen=True)
class AdvantageWindow:
    intervals: list[tuple[float, float]]
    resolution: float
    params: tuple[float, float]
    reference: SchemeId = SchemeId.NESTED_UNIT

    @property
    def total_length(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)


def _refine(ev: Evaluator, reference, lo: float, hi: float, lo_inside: bool, tol: float) -> float:
    """Bisect the sign change of the fidelity difference between lo and hi."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        try:
            inside = ev.difference_at(reference, mid) > 0
        except NearPole:
            break
        if inside == lo_inside:
            lo = mid
        else:
            hi = mid
    return lo if lo_inside else hi


def _window_from_diff(ev, reference, t_grid, diff) -> list[tuple[float, float]]:
    adv = diff > 0
    spacing = float(np.min(np.diff(t_grid))) if len(t_grid) > 1 else 0.0
    tol = spacing / REFINE_DIVISIONS
    intervals = []
    i, n = 0, len(t_grid)
    while i < n:
        if not adv[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and adv[j + 1]:
            j += 1
        lo = t_grid[i] if i == 0 else _refine(ev, reference, t_grid[i - 1], t_grid[i], False, tol)
        hi = t_grid[j] if j == n - 1 else _refine(ev, reference, t_grid[j], t_grid[j + 1], True, tol)
        if hi > lo:
            intervals.append((float(lo), float(hi)))
        i = j + 1
    return intervals


def _curves(ev: Evaluator, t_grid, reference):
    pert = fidelity_curve(ev.spec, SchemeId.NESTED_PERTURBATIVE, t_grid, ev)
    ref = fidelity_curve(ev.spec, reference, t_grid, ev)
    return pert.fidelity, ref.fidelity


def _params(spec: ChainSpec) -> tuple[float, float]:
    return float(spec.g[0]), float(spec.h[0])


def advantage_window(
    spec: ChainSpec, t_grid, reference: SchemeId | str = SchemeId.NESTED_UNIT
) -> AdvantageWindow:
    """Maximal time intervals where the perturbative formula strictly wins."""
    reference = SchemeId(reference)
    t_grid = _check_grid(t_grid)
    ev = Evaluator(spec)
    f_pert, f_ref = _curves(ev, t_grid, reference)
    intervals = _window_from_diff(ev, reference, t_grid, f_pert - f_ref)
    spacing = float(np.min(np.diff(t_grid))) if len(t_grid) > 1 else 0.0
    return AdvantageWindow(intervals, spacing / REFINE_DIVISIONS, _params(spec), reference)


@dataclass(frozen=True)
class SweepPoint:
    axis_value: float
    max_improvement: float = float("nan")
    baseline_time: float = float("nan")
    fidelity_at_baseline: float = float("nan")
    error_reduction: float = float("nan")
    window: AdvantageWindow | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class SweepResult:
    axis: str
    values: np.ndarray
    points: list[SweepPoint] = field(default_factory=list)
    reference: SchemeId = SchemeId.NESTED_UNIT


def _baseline_crossing(t_grid, f_ref, baseline: float) -> float:
    for i in range(1, len(t_grid)):
        if f_ref[i - 1] >= baseline > f_ref[i]:
            t0, t1 = t_grid[i - 1], t_grid[i]
            f0, f1 = f_ref[i - 1], f_ref[i]
            return float(t0 + (baseline - f0) * (t1 - t0) / (f1 - f0))
    raise BaselineNotCrossed(f"reference fidelity never drops below {baseline} on the grid")


def improvement_metrics(
    spec: ChainSpec,
    t_grid,
    baseline: float = 0.9999,
    reference: SchemeId | str = SchemeId.NESTED_UNIT,
    axis_value: float | None = None,
) -> SweepPoint:
    """Fidelity gain of the perturbative formula over ``reference``.

    ``max_improvement`` is the largest F_pert - F_ref over the advantage
    window; when the window is empty it is the largest difference over the
    whole grid, hence <= 0.
    """
    reference = SchemeId(reference)
    t_grid = _check_grid(t_grid)
    ev = Evaluator(spec)
    f_pert, f_ref = _curves(ev, t_grid, reference)
    diff = f_pert - f_ref
    tb = _baseline_crossing(t_grid, f_ref, baseline)
    intervals = _window_from_diff(ev, reference, t_grid, diff)
    spacing = float(np.min(np.diff(t_grid))) if len(t_grid) > 1 else 0.0
    window = AdvantageWindow(intervals, spacing / REFINE_DIVISIONS, _params(spec), reference)
    inside = diff > 0
    max_improvement = float(diff[inside].max() if inside.any() else diff.max())
    f_pert_b = ev.fidelity_at(SchemeId.NESTED_PERTURBATIVE, tb)
    f_ref_b = ev.fidelity_at(reference, tb)
    reduction = 1.0 - (1.0 - f_pert_b) / (1.0 - f_ref_b)
    return SweepPoint(
        axis_value=float("nan") if axis_value is None else float(axis_value),
        max_improvement=max_improvement,
        baseline_time=tb,
        fidelity_at_baseline=f_pert_b,
        error_reduction=reduction,
        window=window,
    )


def parameter_sweep(
    base: ChainSpec,
    axis: str,
    values,
    t_grid,
    baseline: float = 0.9999,
    reference: SchemeId | str = SchemeId.NESTED_UNIT,
) -> SweepResult:
    """improvement_metrics at each value of a uniform g or h field."""
    if axis not in ("g", "h"):
        raise ValueError(f"axis must be 'g' or 'h', got {axis!r}")
    values = np.sort(np.asarray(values, dtype=float))
    points = []
    for v in values:
        spec = base.replace(**{axis: float(v)})
        try:
            points.append(improvement_metrics(spec, t_grid, baseline, reference, v))
        except (NearPole, BaselineNotCrossed) as exc:
            points.append(SweepPoint(axis_value=float(v), error=f"{type(exc).__name__}: {exc}"))
    return SweepResult(axis, values, points, SchemeId(reference))
