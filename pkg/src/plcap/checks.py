"""Executable checkers for the capacity and spectral inequalities.

Each checker computes both sides of one inequality with independent
numerics (quadrature vs optimisation, enumeration vs eigensolve) and
reports the values, the slack and a verdict.  The two-sided bound
harness grades each direction with a tri-state:

* ``certified``  - the computed estimates logically imply the
  inequality for the true quantities (accounting for which inputs are
  exact and which are one-sided bounds);
* ``consistent`` - the estimates do not contradict the inequality but
  do not prove it;
* ``violated``   - the estimates imply the inequality fails.  The graph
  analogs of the continuum bounds are treated as conjectures under
  test, so a violation is a loud, serialised event rather than an
  assertion failure.

Checker tolerances are additive, ``1e-7 * max(1, reference side)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.integrate

from .capacity import capacity
from .graphs import WeightedGraph, p_energy
from .isocap import (
    MODE_DIRICHLET,
    BudgetExceededError,
    DEFAULT_BUDGET,
    IsocapResult,
    isocap_exact,
    isocap_heuristic,
)
from .spectral import CERT_EXACT, SobolevResult, sobolev_constant

GRADE_CERTIFIED = "certified"
GRADE_CONSISTENT = "consistent"
GRADE_VIOLATED = "violated"


def _tol(reference: float) -> float:
    return 1e-7 * max(1.0, abs(reference))


# -- profiles --------------------------------------------------------------


@dataclass(frozen=True)
class LevelProfile:
    """Piecewise-constant superlevel-measure profile t -> a(t).

    ``a(t) = values[i]`` on [breakpoints[i-1], breakpoints[i]) with an
    implicit first breakpoint 0, and 0 beyond the last breakpoint.
    Values must be nonincreasing (a superlevel measure shrinks as the
    level rises) unless ``relaxed`` is set, which is appropriate for
    capacity-level profiles that need not be monotone.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    relaxed: bool = False

    def __post_init__(self):
        t = np.asarray(self.breakpoints, dtype=float)
        a = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or a.shape != t.shape or t.size == 0:
            raise ValueError("breakpoints and values must be matching nonempty 1-D arrays")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(a))):
            raise ValueError("profile entries must be finite")
        if t[0] <= 0 or np.any(np.diff(t) <= 0):
            raise ValueError("breakpoints must be positive and strictly increasing")
        if np.any(a < 0):
            raise ValueError("profile values must be nonnegative")
        if not self.relaxed and np.any(np.diff(a) > 0):
            raise ValueError("profile values must be nonincreasing (pass relaxed=True to allow)")
        object.__setattr__(self, "breakpoints", t)
        object.__setattr__(self, "values", a)


@dataclass(frozen=True)
class MonotoneProfile:
    """Piecewise-linear nondecreasing profile psi -> t(psi) with t(0) = 0."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or v.shape != g.shape or g.size < 2:
            raise ValueError("grid and values must match and hold at least two nodes")
        if g[0] != 0.0 or np.any(np.diff(g) <= 0):
            raise ValueError("grid must start at 0 and increase strictly")
        if v[0] != 0.0 or np.any(np.diff(v) < 0):
            raise ValueError("values must start at 0 and be nondecreasing")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)


# -- 1-D capacity identity -------------------------------------------------


@dataclass(frozen=True)
class IntervalCapacityReport:
    closed_form: float
    minimized: float
    gap: float


def interval_capacity_identity(
    g: Callable[[float], float] | Sequence[float],
    p: float,
    grid_n: int,
    tol: float = 1e-6,
) -> IntervalCapacityReport:
    """Discretised 1-D ramp-energy minimum against its closed form.

    The closed form is (int_0^1 g(t)**(-1/(p-1)) dt)**(1-p).  The
    discrete side minimises sum_i ((l_{i+1}-l_i)/dt)**p g_i dt over
    ramps 0 = l_0 <= ... <= l_N = 1 by running the capacity optimizer on
    the equivalent weighted path; for a positive density the gap decays
    as the grid is refined.

    ``g`` is either a callable sampled at the ``grid_n`` interval
    midpoints (closed form by adaptive quadrature) or the midpoint
    samples themselves (closed form by the midpoint rule).
    """
    p = float(p)
    if not p > 1:
        raise ValueError("p must exceed 1")
    if grid_n < 1:
        raise ValueError("grid_n must be positive")
    dt = 1.0 / grid_n
    mids = (np.arange(grid_n) + 0.5) * dt
    if callable(g):
        samples = np.array([float(g(t)) for t in mids])
    else:
        samples = np.asarray(g, dtype=float)
        if samples.shape != (grid_n,):
            raise ValueError(f"need {grid_n} midpoint samples")
    if not np.all(np.isfinite(samples) & (samples > 0)):
        raise ValueError("density samples must be positive (closed form degenerates at 0)")
    if callable(g):
        integrand = lambda t: float(g(t)) ** (-1.0 / (p - 1.0))
        integral, _ = scipy.integrate.quad(integrand, 0.0, 1.0, limit=200)
        closed = integral ** (1.0 - p)
    else:
        closed = float(np.sum(samples ** (-1.0 / (p - 1.0)) * dt) ** (1.0 - p))

    weights = samples * dt ** (1.0 - p)
    path = WeightedGraph.build(
        grid_n + 1, [(i, i + 1, float(w)) for i, w in enumerate(weights)]
    )
    result = capacity(path, A=(grid_n,), B=(0,), p=p, tol=tol, method="optimizer")
    gap = abs(closed - result.value) / max(abs(closed), 1e-300)
    return IntervalCapacityReport(float(closed), float(result.value), float(gap))


# -- capacity of level sets vs energy --------------------------------------


@dataclass(frozen=True)
class CapacityLevelsReport:
    lhs: float
    rhs: float
    ratio: float
    ok: bool


def capacity_levels_check(
    G: WeightedGraph,
    u: np.ndarray,
    p: float,
    cap_method: str = "auto",
    tol: float = 1e-8,
) -> CapacityLevelsReport:
    """Integral of Cap_p({u >= t}, {u <= 0}) d(t^p) against the energy.

    The left side is exact: the capacity is constant between consecutive
    distinct positive values of u, so the integral is a finite sum.  The
    right side is p**p / (p-1)**(p-1) times the p-energy, and the check
    reports whether lhs <= rhs up to the additive tolerance.
    """
    p = float(p)
    u = np.asarray(u, dtype=float)
    below = tuple(int(v) for v in np.flatnonzero(u <= 0.0))
    levels = np.unique(u[u > 0.0])
    rhs = p ** p / (p - 1.0) ** (p - 1.0) * p_energy(G, u, p)
    if not below or levels.size == 0:
        return CapacityLevelsReport(0.0, rhs, 0.0, True)
    lhs = 0.0
    prev = 0.0
    for t in levels:
        above = tuple(int(v) for v in np.flatnonzero(u >= t))
        cap_t = capacity(G, above, below, p, tol=tol, method=cap_method).value
        lhs += cap_t * (t ** p - prev ** p)
        prev = t
    ratio = lhs / rhs if rhs > 0 else math.inf
    return CapacityLevelsReport(float(lhs), float(rhs), float(ratio), bool(lhs <= rhs + _tol(rhs)))


# -- layer-cake comparison -------------------------------------------------


@dataclass(frozen=True)
class LayerCakeReport:
    lhs: float
    rhs: float
    ok: bool


def layer_cake_check(profile: LevelProfile, p: float, alpha: float) -> LayerCakeReport:
    """(int a(t)^(1/alpha) d(t^p))^alpha against p*alpha int t^(p*alpha-1) a(t) dt.

    Both sides are computed segment-exactly for the piecewise-constant
    profile.  The comparison direction lhs >= rhs is the one used to
    pass from a capacity integral to a recentred moment; its derivation
    needs alpha >= 1, so for 1/p <= alpha < 1 this checker measures
    rather than assumes the inequality (it does fail there for some
    profiles -- see the reported ``ok``).
    """
    p = float(p)
    alpha = float(alpha)
    if not p > 1:
        raise ValueError("p must exceed 1")
    if alpha < 1.0 / p:
        raise ValueError("alpha must be at least 1/p")
    if profile.relaxed:
        raise ValueError("layer-cake comparison needs a monotone (non-relaxed) profile")
    t = np.concatenate([[0.0], profile.breakpoints])
    a = profile.values
    inner = float(np.sum(a ** (1.0 / alpha) * np.diff(t ** p)))
    lhs = inner ** alpha
    rhs = float(np.sum(a * np.diff(t ** (p * alpha))))
    return LayerCakeReport(lhs, rhs, lhs >= rhs - _tol(rhs))


# -- one-dimensional weighted Hardy comparison -----------------------------


@dataclass(frozen=True)
class HardyReport:
    lhs: float
    rhs: float
    ok: bool


def hardy_check(profile: MonotoneProfile, p: float) -> HardyReport:
    """int (t(psi)/psi)^p dpsi against (p/(p-1))^p int t'(psi)^p dpsi.

    The right side is exact (t' is piecewise constant).  On the first
    segment t(psi) = slope * psi, so the integrand is the constant
    slope**p there; later segments are integrated adaptively.
    """
    p = float(p)
    if not p > 1:
        raise ValueError("p must exceed 1")
    psi = profile.grid
    tv = profile.values
    slopes = np.diff(tv) / np.diff(psi)
    rhs = (p / (p - 1.0)) ** p * float(np.sum(slopes ** p * np.diff(psi)))

    lhs = float(slopes[0] ** p * (psi[1] - psi[0]))
    for i in range(1, slopes.size):
        t0, s = tv[i], slopes[i]
        a, b = psi[i], psi[i + 1]
        seg, _ = scipy.integrate.quad(
            lambda x: ((t0 + s * (x - a)) / x) ** p, a, b, limit=200
        )
        lhs += seg
    return HardyReport(lhs, rhs, lhs <= rhs + _tol(rhs))


# -- two-sided isocapacitary bounds ----------------------------------------


def lower_bound_constant(p: float, alpha: float) -> float:
    """(p-1)**(p-1) / (2**(1/alpha) p**p)."""
    return (p - 1.0) ** (p - 1.0) / (2.0 ** (1.0 / alpha) * p ** p)


def upper_bound_constant(p: float, alpha: float) -> float:
    """2**((p*alpha - 1)/alpha)."""
    return 2.0 ** ((p * alpha - 1.0) / alpha)


@dataclass(frozen=True)
class BoundCheckReport:
    """Graded two-sided comparison of the Sobolev constant against the
    isocapacitary constant, with provenance of both estimates."""

    p: float
    alpha: float
    mode: str
    gamma: float
    gamma_mode: str
    middle: float
    middle_cert: str
    lower_const: float
    upper_const: float
    lower_ok: str
    upper_ok: str
    slack_lower: float
    slack_upper: float


def _grade_upper(middle: float, middle_exact: bool, gamma: float, gamma_exact: bool, uc: float) -> str:
    # true middle <= uc * true gamma?
    bound = uc * gamma
    tol = _tol(bound)
    if gamma_exact and middle <= bound + tol:
        return GRADE_CERTIFIED  # middle estimate >= true middle, gamma true
    if middle_exact and middle > bound + tol:
        return GRADE_VIOLATED  # gamma estimate >= true gamma, so bound only shrinks
    return GRADE_CONSISTENT


def _grade_lower(middle: float, middle_exact: bool, gamma: float, gamma_exact: bool, lc: float) -> str:
    # lc * true gamma <= true middle?
    bound = lc * gamma
    tol = _tol(middle)
    if middle_exact and bound <= middle + tol:
        return GRADE_CERTIFIED  # gamma estimate >= true gamma, middle true
    if gamma_exact and bound > middle + tol:
        return GRADE_VIOLATED  # middle estimate >= true middle
    return GRADE_CONSISTENT


def grade_bounds(gamma: IsocapResult, middle: SobolevResult, p: float, alpha: float, mode: str) -> BoundCheckReport:
    """Grade both bound directions from already-computed estimates."""
    gamma_exact = gamma.mode == "exact-enumeration"
    middle_exact = middle.certified == CERT_EXACT
    lc = lower_bound_constant(p, alpha)
    uc = upper_bound_constant(p, alpha)
    return BoundCheckReport(
        p=float(p),
        alpha=float(alpha),
        mode=mode,
        gamma=gamma.value,
        gamma_mode=gamma.mode,
        middle=middle.value,
        middle_cert=middle.certified,
        lower_const=lc,
        upper_const=uc,
        lower_ok=_grade_lower(middle.value, middle_exact, gamma.value, gamma_exact, lc),
        upper_ok=_grade_upper(middle.value, middle_exact, gamma.value, gamma_exact, uc),
        slack_lower=middle.value - lc * gamma.value,
        slack_upper=uc * gamma.value - middle.value,
    )


def two_sided_bound_check(
    G: WeightedGraph,
    p: float,
    alpha: float,
    mode: str,
    budget: int = DEFAULT_BUDGET,
    starts: int = 8,
    seed: int | None = None,
    allow_heuristic: bool = False,
    cap_cache: dict | None = None,
) -> BoundCheckReport:
    """Compute gamma and the Sobolev constant for (p, alpha) and grade.

    ``gamma`` comes from exact enumeration when the pair family fits the
    budget; otherwise, with ``allow_heuristic``, from the level-set
    sweep seeded by the spectral extremal (weakening the certification
    accordingly).  The middle estimate is exact only at p = 2, alpha = 1.
    """
    if mode == MODE_DIRICHLET:
        raise ValueError("two-sided bounds compare steklov or neumann constants")
    middle = sobolev_constant(G, p, alpha, mode, starts=starts, seed=seed)
    try:
        gamma = isocap_exact(G, p, alpha, mode, budget=budget, cap_cache=cap_cache)
    except BudgetExceededError:
        if not allow_heuristic:
            raise
        gamma = isocap_heuristic(
            G, p, alpha, mode, middle.extremal, cap_cache=cap_cache
        )
    return grade_bounds(gamma, middle, p, alpha, mode)


# -- parameter sweep --------------------------------------------------------


@dataclass(frozen=True)
class SweepCell:
    """One sweep cell: either a report or a recorded per-cell error."""

    p: float
    alpha: float
    mode: str
    report: BoundCheckReport | None
    error: str | None


def sweep(
    G: WeightedGraph,
    p_list: Sequence[float],
    alpha_list: Sequence[float],
    mode: str,
    budget: int = DEFAULT_BUDGET,
    starts: int = 8,
    seed: int | None = None,
    allow_heuristic: bool = False,
) -> list[SweepCell]:
    """Grid of bound checks over p and alpha, errors recorded in-row.

    Capacity values are cached across the alpha grid (they depend on p
    only), and the row order is deterministic: p outer, alpha inner.
    """
    cells: list[SweepCell] = []
    for p in p_list:
        cap_cache: dict = {}
        for alpha in alpha_list:
            try:
                rep = two_sided_bound_check(
                    G, p, alpha, mode,
                    budget=budget, starts=starts, seed=seed,
                    allow_heuristic=allow_heuristic, cap_cache=cap_cache,
                )
                cells.append(SweepCell(float(p), float(alpha), mode, rep, None))
            except Exception as exc:  # per-cell failure must not stop the sweep
                cells.append(SweepCell(float(p), float(alpha), mode, None, f"{type(exc).__name__}: {exc}"))
    return cells
