"""Steklov and Neumann Sobolev constants and first nontrivial eigenvalues.

The (p, alpha)-Sobolev constant is the infimum over nonconstant vertex
functions of

    E_p(f) / (min_c sum_x m(x) |f(x) - c|**(p*alpha)) ** (1/alpha),

with m = nu on the boundary (steklov mode) or m = mu on all vertices
(neumann mode).  At alpha = 1 this is the first nontrivial eigenvalue of
the corresponding p-Laplacian problem.

Two routes are provided: exact generalised eigensolves for p = 2,
alpha = 1 (``certified='exact'``), and multistart projected quotient
descent for every other exponent pair (``certified='upper-bound-only'``:
the quotient of any trial function bounds the infimum from above, but
nonconvexity means no lower bound is claimed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .graphs import WeightedGraph, p_energy, p_energy_gradient
from .seeding import spawn_rng

MODE_STEKLOV = "steklov"
MODE_NEUMANN = "neumann"

CERT_EXACT = "exact"
CERT_UPPER = "upper-bound-only"


@dataclass(frozen=True)
class SobolevResult:
    """Constant estimate with extremal function and certification tag.

    ``history`` holds one non-increasing tuple of accepted quotient
    values per descent start (a single one-element tuple for the exact
    linear route).
    """

    value: float
    extremal: np.ndarray
    recenter_c: float
    mode: str        # "descent-multistart" | "linear-p2"
    certified: str   # "exact" | "upper-bound-only"
    starts: int
    history: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class EigenResult(SobolevResult):
    """Sobolev result at alpha = 1 plus the weak-equation residual."""

    residual: float = 0.0


def _measure_weights(G: WeightedGraph, mode: str) -> np.ndarray:
    if mode == MODE_STEKLOV:
        if G.boundary.size < 2:
            raise ValueError("steklov mode needs at least two boundary vertices")
        return G.nu
    if mode == MODE_NEUMANN:
        if G.n < 2:
            raise ValueError("neumann mode needs at least two vertices")
        return G.mu
    raise ValueError(f"unknown mode {mode!r}")


def recenter(G: WeightedGraph, f: np.ndarray, q: float, measure: str = "boundary"):
    """Optimal shift c and minimal moment min_c sum m |f - c|**q.

    ``measure`` selects the boundary area weights ("boundary") or the
    volume weights ("volume").  Requires q >= 1 (the objective is convex
    exactly there); at q = 1 the optimum is a weighted-median interval
    and its midpoint is returned.
    """
    q = float(q)
    if q < 1:
        raise ValueError("recentering requires q >= 1 (objective convex in c)")
    f = np.asarray(f, dtype=float)
    if measure == "boundary":
        if G.boundary.size == 0:
            raise ValueError("boundary measure requested on a graph without boundary")
        vals = f[G.boundary]
        wts = G.nu[G.boundary]
    elif measure == "volume":
        vals, wts = f, G.mu
    else:
        raise ValueError(f"unknown measure {measure!r}")
    c = _recenter_values(vals, wts, q)
    return c, float(np.sum(wts * np.abs(vals - c) ** q))


def _recenter_values(vals: np.ndarray, wts: np.ndarray, q: float) -> float:
    if q == 2.0:
        return float(np.sum(wts * vals) / np.sum(wts))
    if q == 1.0:
        order = np.argsort(vals, kind="stable")
        v, w = vals[order], wts[order]
        total = float(np.sum(w))
        cum = np.cumsum(w)
        lo = v[int(np.searchsorted(cum, 0.5 * total))]
        cum_rev = np.cumsum(w[::-1])
        hi = v[::-1][int(np.searchsorted(cum_rev, 0.5 * total))]
        return 0.5 * (lo + hi)
    lo, hi = float(np.min(vals)), float(np.max(vals))
    if lo == hi:
        return lo

    def dphi(c):
        d = c - vals
        return float(np.sum(wts * np.abs(d) ** (q - 1.0) * np.sign(d)))

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if dphi(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, abs(lo), abs(hi)):
            break
    return 0.5 * (lo + hi)


def rayleigh_quotient(G: WeightedGraph, f: np.ndarray, p: float, alpha: float, mode: str) -> float:
    """E_p(f) / (min-moment)**(1/alpha); +inf for functions constant on the support."""
    measure = "boundary" if mode == MODE_STEKLOV else "volume"
    _, moment = recenter(G, f, p * alpha, measure=measure)
    if moment <= 0.0:
        return np.inf
    return p_energy(G, f, p) / moment ** (1.0 / alpha)


def _normalize(G: WeightedGraph, f, q, measure):
    """Shift by the optimal c and scale so the q-moment equals 1."""
    c, m = recenter(G, f, q, measure=measure)
    if m <= 0.0:
        return None
    return (f - c) / m ** (1.0 / q)


def _descent_start(G, p, alpha, mode, idx, rng, oracle_extremal):
    if idx == 0 and oracle_extremal is not None:
        return oracle_extremal.copy()
    return rng.standard_normal(G.n)


def _quotient_descent(G, f0, p, alpha, mode, tol, max_iter):
    """One descent start; returns (quotient, f, history) or None if degenerate."""
    q = p * alpha
    measure = "boundary" if mode == MODE_STEKLOV else "volume"
    wvec = _measure_weights(G, mode)
    f = _normalize(G, np.asarray(f0, dtype=float), q, measure)
    if f is None:
        return None
    val = p_energy(G, f, p)  # normalised moment = 1, so quotient = energy
    history = [val]
    step = 1.0
    flat_run = 0
    for _ in range(max_iter):
        # quotient gradient at the normalised iterate (c = 0, moment = 1)
        grad = p_energy_gradient(G, f, p)
        grad -= val * p * wvec * np.abs(f) ** (q - 1.0) * np.sign(f)
        gnorm2 = float(np.dot(grad, grad))
        if gnorm2 <= 0.0:
            break
        t = step
        improved = False
        while t > 1e-18:
            fn = _normalize(G, f - t * grad, q, measure)
            if fn is not None:
                vn = p_energy(G, fn, p)
                if vn <= val - 1e-4 * t * gnorm2:
                    improved = True
                    break
            t *= 0.5
        if not improved:
            break
        rel_drop = (val - vn) / max(vn, 1e-300)
        f, val = fn, vn
        history.append(val)
        step = min(t * 2.0, 1e6)
        flat_run = flat_run + 1 if rel_drop < tol else 0
        if flat_run >= 3:
            break
    return val, f, tuple(history)


def steklov_p2_oracle(G: WeightedGraph) -> SobolevResult:
    """Exact first nontrivial Steklov eigenvalue for p = 2, alpha = 1.

    Eliminates interior vertices by the Schur complement of the
    Laplacian onto the boundary (the discrete Dirichlet-to-Neumann map)
    and solves the generalised symmetric eigenproblem against diag(nu).
    The kernel is the constants, so the second-smallest eigenvalue is
    returned together with the harmonic extension of its eigenvector.
    """
    if G.boundary.size < 2:
        raise ValueError("steklov oracle needs at least two boundary vertices")
    b = G.boundary
    i = G.interior
    L = G.laplacian
    if i.size:
        Lii = L[np.ix_(i, i)]
        Lib = L[np.ix_(i, b)]
        S = L[np.ix_(b, b)] - Lib.T @ np.linalg.solve(Lii, Lib)
    else:
        S = L[np.ix_(b, b)].copy()
    S = 0.5 * (S + S.T)
    vals, vecs = scipy.linalg.eigh(S, np.diag(G.nu[b]))
    value = float(vals[1])
    u = np.zeros(G.n)
    u[b] = vecs[:, 1]
    if i.size:
        u[i] = np.linalg.solve(Lii, -Lib @ u[b])
    c, _ = recenter(G, u, 2.0, measure="boundary")
    return SobolevResult(value, u, float(c), "linear-p2", CERT_EXACT, 0, ((value,),))


def neumann_p2_oracle(G: WeightedGraph) -> SobolevResult:
    """Exact first nontrivial Neumann eigenvalue for p = 2, alpha = 1.

    Generalised eigensolve of the graph Laplacian against diag(mu); the
    second-smallest eigenvalue on a connected graph.
    """
    if G.n < 2:
        raise ValueError("neumann oracle needs at least two vertices")
    vals, vecs = scipy.linalg.eigh(G.laplacian, np.diag(G.mu))
    value = float(vals[1])
    u = vecs[:, 1].copy()
    c, _ = recenter(G, u, 2.0, measure="volume")
    return SobolevResult(value, u, float(c), "linear-p2", CERT_EXACT, 0, ((value,),))


def _p2_oracle(G: WeightedGraph, mode: str) -> SobolevResult:
    return steklov_p2_oracle(G) if mode == MODE_STEKLOV else neumann_p2_oracle(G)


def sobolev_constant(
    G: WeightedGraph,
    p: float,
    alpha: float,
    mode: str,
    starts: int = 8,
    tol: float = 1e-10,
    seed: int | None = None,
    method: str = "auto",
    max_iter: int = 100_000,
) -> SobolevResult:
    """(p, alpha)-Sobolev constant estimate for the requested mode.

    ``method='auto'`` uses the exact linear oracle at p = 2, alpha = 1
    and multistart descent otherwise; ``'descent'``/``'oracle'`` force a
    route.  Descent start 0 is the p = 2 oracle eigenvector, the rest
    are seeded random vectors recentred to zero moment; the reported
    value is the smallest quotient reached (an upper bound on the true
    constant, with ties broken by start index).
    """
    p = float(p)
    alpha = float(alpha)
    if not p > 1:
        raise ValueError("p must exceed 1")
    if alpha < 1.0 / p:
        raise ValueError("alpha must be at least 1/p")
    _measure_weights(G, mode)  # validates mode and measure support

    if method == "auto":
        method = "oracle" if (p == 2.0 and alpha == 1.0) else "descent"
    if method == "oracle":
        if p != 2.0 or alpha != 1.0:
            raise ValueError("the linear oracle requires p = 2 and alpha = 1")
        return _p2_oracle(G, mode)
    if method != "descent":
        raise ValueError(f"unknown method {method!r}")

    if starts < 1:
        raise ValueError("at least one start required")
    oracle_f = _p2_oracle(G, mode).extremal
    rng = None if starts == 1 else spawn_rng(seed, "spectral", mode)
    best = None
    histories = []
    for k in range(starts):
        f0 = _descent_start(G, p, alpha, mode, k, rng, oracle_f)
        out = _quotient_descent(G, f0, p, alpha, mode, tol, max_iter)
        if out is None:
            # degenerate start (constant on the measure support): redraw once
            if rng is None:
                continue
            out = _quotient_descent(G, rng.standard_normal(G.n), p, alpha, mode, tol, max_iter)
            if out is None:
                continue
        val, f, hist = out
        histories.append(hist)
        if best is None or val < best[0]:
            best = (val, f)
    if best is None:
        raise ValueError("no admissible nonconstant start found")
    value, f = best
    measure = "boundary" if mode == MODE_STEKLOV else "volume"
    c, _ = recenter(G, f, p * alpha, measure=measure)
    return SobolevResult(
        float(value), f, float(c), "descent-multistart", CERT_UPPER, starts, tuple(histories)
    )


def weak_equation_residual(G: WeightedGraph, u: np.ndarray, value: float, p: float, mode: str) -> float:
    """Residual of the eigenvalue equation for a (recentred) extremal.

    Steklov mode checks that the potential is discretely p-harmonic at
    interior vertices; neumann mode checks the full equation
    div-form(u) = value * mu * |u|**(p-2) u after recentring and moment
    normalisation (both sides are (p-1)-homogeneous, so any common scale
    would do; normalising keeps the residual comparable across inputs).
    """
    measure = "boundary" if mode == MODE_STEKLOV else "volume"
    f = _normalize(G, np.asarray(u, dtype=float), p, measure)
    if f is None:
        raise ValueError("constant extremal has no eigen-residual")
    div_form = p_energy_gradient(G, f, p) / p
    if mode == MODE_STEKLOV:
        if G.interior.size == 0:
            return 0.0
        return float(np.max(np.abs(div_form[G.interior])))
    rhs = value * G.mu * np.abs(f) ** (p - 1.0) * np.sign(f)
    return float(np.max(np.abs(div_form - rhs)))


def first_eigenvalue(
    G: WeightedGraph,
    p: float,
    mode: str,
    starts: int = 8,
    tol: float = 1e-10,
    seed: int | None = None,
    method: str = "auto",
    max_iter: int = 100_000,
) -> EigenResult:
    """First nontrivial eigenvalue (the alpha = 1 Sobolev constant).

    Adds the weak-equation residual of the returned extremal to the
    Sobolev result: interior p-harmonicity for steklov mode, the full
    equation against mu |u|**(p-2) u for neumann mode.
    """
    res = sobolev_constant(
        G, p, 1.0, mode, starts=starts, tol=tol, seed=seed, method=method, max_iter=max_iter
    )
    resid = weak_equation_residual(G, res.extremal, res.value, p, mode)
    return EigenResult(
        res.value, res.extremal, res.recenter_c, res.mode, res.certified,
        res.starts, res.history, resid,
    )
