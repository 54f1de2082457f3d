"""Weighted graphs with boundary data and the p-Dirichlet energy.

A :class:`WeightedGraph` is a finite connected graph carrying three
independent positive weight structures: edge conductances ``w``, a vertex
volume measure ``mu`` and a boundary area measure ``nu`` supported on a
distinguished vertex subset ``boundary``.  Vertex functions are plain
1-D numpy arrays of length ``n`` aligned with vertex indices.

The p-Dirichlet energy sums each undirected edge once,

    E_p(u) = sum_{(x,y,w)} w * |u(x) - u(y)|**p,

not the symmetrised half-double-sum; every capacity and eigenvalue
quantity in this package is normalised to that convention.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class GraphValidationError(ValueError):
    """Raised when graph data violates a structural invariant."""


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Connected weighted graph with measures and a boundary set.

    Fields are numpy arrays frozen after construction; use
    :meth:`build` rather than the raw constructor so the invariants
    (connectivity, positivity, no duplicate edges) are enforced.
    """

    n: int
    edges: np.ndarray    # (m, 2) int64, each row (x, y) with x < y
    weights: np.ndarray  # (m,) positive conductances
    mu: np.ndarray       # (n,) positive volume measure
    boundary: np.ndarray  # sorted int64 vertex indices, possibly empty
    nu: np.ndarray       # (n,) area measure, positive on boundary, 0 elsewhere

    @classmethod
    def build(
        cls,
        n: int,
        edges: Iterable[tuple[int, int, float]],
        mu: Sequence[float] | None = None,
        boundary: Iterable[int] = (),
        nu: dict[int, float] | Sequence[float] | None = None,
    ) -> "WeightedGraph":
        """Validate and normalise raw graph data.

        ``mu`` defaults to 1 on every vertex and ``nu`` to 1 on every
        boundary vertex.  ``nu`` may be given either as a mapping
        ``vertex -> weight`` or as a sequence aligned with ``boundary``.
        """
        if n < 1:
            raise GraphValidationError("graph needs at least one vertex")
        edge_list = [(int(x), int(y), float(w)) for x, y, w in edges]
        m = len(edge_list)
        e = np.zeros((m, 2), dtype=np.int64)
        w = np.zeros(m, dtype=float)
        for k, (x, y, wt) in enumerate(edge_list):
            if not (0 <= x < n and 0 <= y < n):
                raise GraphValidationError(f"edge {k}: vertex out of range")
            if x == y:
                raise GraphValidationError(f"edge {k}: self-loop at vertex {x}")
            if not (np.isfinite(wt) and wt > 0):
                raise GraphValidationError(f"edge {k}: weight must be positive, got {wt}")
            e[k] = (min(x, y), max(x, y))
            w[k] = wt
        order = np.lexsort((e[:, 1], e[:, 0]))
        e, w = e[order], w[order]
        if m > 1 and np.any(np.all(e[1:] == e[:-1], axis=1)):
            k = int(np.flatnonzero(np.all(e[1:] == e[:-1], axis=1))[0])
            raise GraphValidationError(f"duplicate edge {tuple(e[k])}")

        mu_arr = np.ones(n) if mu is None else np.asarray(mu, dtype=float)
        if mu_arr.shape != (n,):
            raise GraphValidationError(f"mu must have length {n}")
        if not np.all(np.isfinite(mu_arr) & (mu_arr > 0)):
            raise GraphValidationError("mu must be positive and finite everywhere")

        bnd = np.array(sorted({int(b) for b in boundary}), dtype=np.int64)
        if bnd.size and (bnd[0] < 0 or bnd[-1] >= n):
            raise GraphValidationError("boundary vertex out of range")

        nu_arr = np.zeros(n)
        if nu is None:
            nu_arr[bnd] = 1.0
        elif isinstance(nu, dict):
            extra = set(int(k) for k in nu) - set(bnd.tolist())
            if extra:
                raise GraphValidationError(f"nu given for non-boundary vertices {sorted(extra)}")
            for b in bnd:
                if int(b) not in nu:
                    raise GraphValidationError(f"boundary vertex {int(b)} lacks a nu entry")
                nu_arr[b] = float(nu[int(b)])
        else:
            vals = np.asarray(nu, dtype=float)
            if vals.shape != (bnd.size,):
                raise GraphValidationError("nu sequence must align with the boundary list")
            nu_arr[bnd] = vals
        if bnd.size and not np.all(np.isfinite(nu_arr[bnd]) & (nu_arr[bnd] > 0)):
            raise GraphValidationError("nu must be positive and finite on boundary vertices")

        g = cls(
            n=n,
            edges=_as_readonly(e),
            weights=_as_readonly(w),
            mu=_as_readonly(mu_arr),
            boundary=_as_readonly(bnd),
            nu=_as_readonly(nu_arr),
        )
        if not g.is_connected():
            raise GraphValidationError("graph must be connected")
        return g

    # -- structure helpers -------------------------------------------------

    @property
    def edge_count(self) -> int:
        return self.edges.shape[0]

    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        seen = np.zeros(self.n, dtype=bool)
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for x, y in self.edges:
            adj[x].append(int(y))
            adj[y].append(int(x))
        queue = deque([0])
        seen[0] = True
        while queue:
            v = queue.popleft()
            for u in adj[v]:
                if not seen[u]:
                    seen[u] = True
                    queue.append(u)
        return bool(seen.all())

    @cached_property
    def interior(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[self.boundary] = False
        out = np.flatnonzero(mask).astype(np.int64)
        out.setflags(write=False)
        return out

    @cached_property
    def adjacency_lists(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for x, y in self.edges:
            adj[x].append(int(y))
            adj[y].append(int(x))
        return tuple(tuple(a) for a in adj)

    @cached_property
    def laplacian(self) -> np.ndarray:
        """Dense weighted graph Laplacian L with u.T @ L @ u = E_2(u)."""
        L = np.zeros((self.n, self.n))
        x, y = self.edges[:, 0], self.edges[:, 1]
        np.add.at(L, (x, y), -self.weights)
        np.add.at(L, (y, x), -self.weights)
        np.add.at(L, (x, x), self.weights)
        np.add.at(L, (y, y), self.weights)
        L.setflags(write=False)
        return L

    def hop_distances(self, sources: Sequence[int]) -> np.ndarray:
        """Unweighted BFS distance from the vertex set ``sources``."""
        dist = np.full(self.n, np.inf)
        queue = deque()
        for s in sources:
            dist[s] = 0.0
            queue.append(int(s))
        adj = self.adjacency_lists
        while queue:
            v = queue.popleft()
            for u in adj[v]:
                if dist[u] == np.inf:
                    dist[u] = dist[v] + 1.0
                    queue.append(u)
        return dist

    def with_weights(self, weights: Sequence[float]) -> "WeightedGraph":
        """Same topology and measures, new edge conductances."""
        return WeightedGraph.build(
            self.n,
            [(int(x), int(y), float(w)) for (x, y), w in zip(self.edges, weights)],
            mu=self.mu,
            boundary=self.boundary,
            nu={int(b): float(self.nu[b]) for b in self.boundary},
        )


def vertex_set(
    members: Iterable[int],
    n: int,
    within: np.ndarray | Sequence[int] | None = None,
    label: str = "vertex set",
) -> tuple[int, ...]:
    """Normalise ``members`` to a sorted duplicate-free tuple of valid indices.

    ``within`` restricts the admissible pool (used for boundary subsets).
    """
    out = tuple(sorted({int(v) for v in members}))
    for v in out:
        if not 0 <= v < n:
            raise GraphValidationError(f"{label}: vertex {v} out of range 0..{n - 1}")
    if within is not None:
        pool = set(int(v) for v in within)
        bad = [v for v in out if v not in pool]
        if bad:
            raise GraphValidationError(f"{label}: vertices {bad} outside the admissible pool")
    return out


def _check_function(G: WeightedGraph, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (G.n,):
        raise GraphValidationError(f"vertex function must have shape ({G.n},)")
    if not np.all(np.isfinite(u)):
        raise GraphValidationError("vertex function contains non-finite entries")
    return u


def _check_p(p: float) -> float:
    p = float(p)
    if not p > 1:
        raise ValueError(f"exponent p must exceed 1, got {p}")
    return p


def p_energy(G: WeightedGraph, u: np.ndarray, p: float) -> float:
    """Edge-sum p-Dirichlet energy sum_w w * |u(x) - u(y)|**p."""
    u = _check_function(G, u)
    p = _check_p(p)
    d = u[G.edges[:, 0]] - u[G.edges[:, 1]]
    return float(np.sum(G.weights * np.abs(d) ** p))


def p_energy_gradient(G: WeightedGraph, u: np.ndarray, p: float) -> np.ndarray:
    """Gradient of the p-energy.

    Component at x is p * sum_{y ~ x} w_xy |u(x)-u(y)|**(p-2) (u(x)-u(y));
    the summand is taken as 0 where u(x) = u(y), which for 1 < p < 2 is
    the continuous extension of |t|**(p-2) t at t = 0.
    """
    u = _check_function(G, u)
    p = _check_p(p)
    x, y = G.edges[:, 0], G.edges[:, 1]
    d = u[x] - u[y]
    flow = p * G.weights * np.abs(d) ** (p - 1.0) * np.sign(d)
    return np.bincount(x, weights=flow, minlength=G.n) - np.bincount(
        y, weights=flow, minlength=G.n
    )


def finite_difference_check(G: WeightedGraph, u: np.ndarray, p: float, h: float = 1e-5) -> float:
    """Max abs deviation between the analytic gradient and central differences."""
    u = _check_function(G, u)
    grad = p_energy_gradient(G, u, p)
    worst = 0.0
    for i in range(G.n):
        up, um = u.copy(), u.copy()
        up[i] += h
        um[i] -= h
        fd = (p_energy(G, up, p) - p_energy(G, um, p)) / (2.0 * h)
        worst = max(worst, abs(fd - grad[i]))
    return worst
