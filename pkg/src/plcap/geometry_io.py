"""Model-geometry generators, mesh-to-graph conversion and file I/O.

Graph files use the JSON schema

    {"n": int, "edges": [[x, y, w], ...], "mu": [real * n],
     "boundary": [int, ...], "nu": {"<vertex>": real, ...}}

with unknown fields rejected and floats written with 17 significant
digits (lossless round trip).  Meshes are triangulations read from
OFF-format text; the induced graph carries cotangent edge weights,
barycentric vertex areas as mu and half the incident boundary-edge
length as nu, so its quadratic energy is the piecewise-linear Dirichlet
energy of the mesh.  For exponents other than 2 the same graph is only
a qualitative analog (the weights are not p-FEM consistent).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graphs import GraphValidationError, WeightedGraph
from .seeding import spawn_rng

COTAN_CLAMP = 1e-12


class SchemaError(ValueError):
    """Schema violation with a JSON pointer to the offending field."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{message} (at {pointer})")
        self.pointer = pointer


# -- float formatting / JSON emission ---------------------------------------


def format_float(x: float, sig: int = 17) -> str:
    """Decimal form with ``sig`` significant digits; 17 round-trips exactly."""
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, f".{sig}g")
    if not any(c in s for c in ".eE"):
        s += ".0"
    return s


def dumps_json(obj, sig: int = 17, indent: int = 2) -> str:
    """Deterministic JSON text with floats at ``sig`` significant digits."""
    out: list[str] = []

    def emit(o, depth):
        pad = " " * (indent * depth)
        inner = " " * (indent * (depth + 1))
        if isinstance(o, dict):
            if not o:
                out.append("{}")
                return
            out.append("{\n")
            for i, (k, v) in enumerate(o.items()):
                out.append(f"{inner}{json.dumps(str(k))}: ")
                emit(v, depth + 1)
                out.append(",\n" if i < len(o) - 1 else "\n")
            out.append(pad + "}")
        elif isinstance(o, (list, tuple)):
            seq = list(o)
            if not seq:
                out.append("[]")
                return
            simple = all(isinstance(v, (int, float, bool)) or v is None for v in seq)
            if simple and len(seq) <= 8:
                out.append("[" + ", ".join(_scalar(v, sig) for v in seq) + "]")
                return
            out.append("[\n")
            for i, v in enumerate(seq):
                out.append(inner)
                emit(v, depth + 1)
                out.append(",\n" if i < len(seq) - 1 else "\n")
            out.append(pad + "]")
        else:
            out.append(_scalar(o, sig))

    def _scalar(v, sig):
        if isinstance(v, bool):
            return "true" if v else "false"
        if v is None:
            return "null"
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        if isinstance(v, (float, np.floating)):
            return format_float(float(v), sig)
        return json.dumps(v)

    emit(obj, 0)
    out.append("\n")
    return "".join(out)


# -- graph JSON -------------------------------------------------------------


def graph_to_json_dict(G: WeightedGraph) -> dict:
    return {
        "n": int(G.n),
        "edges": [[int(x), int(y), float(w)] for (x, y), w in zip(G.edges, G.weights)],
        "mu": [float(v) for v in G.mu],
        "boundary": [int(b) for b in G.boundary],
        "nu": {str(int(b)): float(G.nu[b]) for b in G.boundary},
    }


def graph_from_json_dict(data) -> WeightedGraph:
    if not isinstance(data, dict):
        raise SchemaError("", "top-level value must be an object")
    allowed = {"n", "edges", "mu", "boundary", "nu"}
    for key in data:
        if key not in allowed:
            raise SchemaError(f"/{key}", "unknown field")
    for key in ("n", "edges", "mu", "boundary", "nu"):
        if key not in data:
            raise SchemaError(f"/{key}", "missing required field")
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise SchemaError("/n", "n must be a positive integer")
    if not isinstance(data["edges"], list):
        raise SchemaError("/edges", "edges must be an array")
    edges = []
    for k, item in enumerate(data["edges"]):
        if not (isinstance(item, list) and len(item) == 3):
            raise SchemaError(f"/edges/{k}", "edge must be [x, y, w]")
        x, y, w = item
        for j, v in enumerate((x, y)):
            if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < n:
                raise SchemaError(f"/edges/{k}/{j}", "vertex index out of range")
        if not isinstance(w, (int, float)) or isinstance(w, bool) or not w > 0:
            raise SchemaError(f"/edges/{k}/2", "edge weight must be a positive number")
        edges.append((x, y, float(w)))
    mu = data["mu"]
    if not (isinstance(mu, list) and len(mu) == n):
        raise SchemaError("/mu", f"mu must be an array of length {n}")
    for i, v in enumerate(mu):
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
            raise SchemaError(f"/mu/{i}", "mu entries must be positive numbers")
    if not isinstance(data["boundary"], list):
        raise SchemaError("/boundary", "boundary must be an array")
    boundary = []
    for i, v in enumerate(data["boundary"]):
        if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < n:
            raise SchemaError(f"/boundary/{i}", "boundary vertex out of range")
        boundary.append(v)
    nu_raw = data["nu"]
    if not isinstance(nu_raw, dict):
        raise SchemaError("/nu", "nu must be an object keyed by boundary vertex")
    nu = {}
    bset = set(boundary)
    for key, v in nu_raw.items():
        try:
            vertex = int(key)
        except ValueError:
            raise SchemaError(f"/nu/{key}", "nu keys must be vertex indices") from None
        if vertex not in bset:
            raise SchemaError(f"/nu/{key}", "nu given for a non-boundary vertex")
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
            raise SchemaError(f"/nu/{key}", "nu entries must be positive numbers")
        nu[vertex] = float(v)
    missing = bset - set(nu)
    if missing:
        raise SchemaError("/nu", f"boundary vertices {sorted(missing)} lack nu entries")
    try:
        return WeightedGraph.build(
            n, edges, mu=[float(v) for v in mu], boundary=boundary, nu=nu
        )
    except GraphValidationError as exc:
        raise SchemaError("", str(exc)) from exc


def save_graph(G: WeightedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_json(graph_to_json_dict(G)))


def load_graph(path) -> WeightedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return graph_from_json_dict(json.load(fh))


def graphs_equal(a: WeightedGraph, b: WeightedGraph) -> bool:
    """Structural equality: same vertices, edges, weights, and measures."""
    return (
        a.n == b.n
        and np.array_equal(a.edges, b.edges)
        and np.array_equal(a.weights, b.weights)
        and np.array_equal(a.mu, b.mu)
        and np.array_equal(a.boundary, b.boundary)
        and np.array_equal(a.nu, b.nu)
    )


# -- model graph generators --------------------------------------------------


def gen_model(name: str, seed: int | None = None, **params) -> WeightedGraph:
    """Model graph families with unit weights and measures.

    Boundaries: edge/cycle/complete use all vertices, path its
    endpoints, star its leaves, grid2d the outer ring, and random_gnp a
    seeded random nonempty subset.  Random families require a seed and
    resample disconnected draws up to a retry cap.
    """
    if name == "edge":
        w = float(params.pop("w", 1.0))
        _no_extra(params)
        return WeightedGraph.build(2, [(0, 1, w)], boundary=[0, 1])
    if name == "path":
        n = int(params.pop("n"))
        _no_extra(params)
        if n < 2:
            raise ValueError("path needs n >= 2")
        return WeightedGraph.build(n, [(i, i + 1, 1.0) for i in range(n - 1)], boundary=[0, n - 1])
    if name == "cycle":
        n = int(params.pop("n"))
        _no_extra(params)
        if n < 3:
            raise ValueError("cycle needs n >= 3")
        edges = [(i, (i + 1) % n, 1.0) for i in range(n)]
        return WeightedGraph.build(n, edges, boundary=range(n))
    if name == "star":
        n = int(params.pop("n"))
        _no_extra(params)
        if n < 3:
            raise ValueError("star needs n >= 3 (a centre and at least two leaves)")
        return WeightedGraph.build(n, [(0, i, 1.0) for i in range(1, n)], boundary=range(1, n))
    if name == "complete":
        n = int(params.pop("n"))
        _no_extra(params)
        if n < 2:
            raise ValueError("complete graph needs n >= 2")
        edges = [(i, j, 1.0) for i in range(n) for j in range(i + 1, n)]
        return WeightedGraph.build(n, edges, boundary=range(n))
    if name == "grid2d":
        rows = int(params.pop("rows"))
        cols = int(params.pop("cols"))
        _no_extra(params)
        if rows < 1 or cols < 1 or rows * cols < 2:
            raise ValueError("grid2d needs at least two vertices")
        def vid(i, j):
            return i * cols + j
        edges = []
        for i in range(rows):
            for j in range(cols):
                if j + 1 < cols:
                    edges.append((vid(i, j), vid(i, j + 1), 1.0))
                if i + 1 < rows:
                    edges.append((vid(i, j), vid(i + 1, j), 1.0))
        ring = [
            vid(i, j)
            for i in range(rows)
            for j in range(cols)
            if i in (0, rows - 1) or j in (0, cols - 1)
        ]
        return WeightedGraph.build(rows * cols, edges, boundary=ring)
    if name == "random_gnp":
        n = int(params.pop("n"))
        p_edge = float(params.pop("p_edge"))
        _no_extra(params)
        if n < 2 or not 0 <= p_edge <= 1:
            raise ValueError("random_gnp needs n >= 2 and p_edge in [0, 1]")
        rng = spawn_rng(seed, "gen", "random_gnp")
        for _ in range(100):
            edges = [
                (i, j, 1.0)
                for i in range(n)
                for j in range(i + 1, n)
                if rng.random() < p_edge
            ]
            try:
                g = WeightedGraph.build(n, edges)
            except GraphValidationError:
                continue
            boundary = [v for v in range(n) if rng.random() < 0.5]
            if not boundary:
                boundary = [int(rng.integers(n))]
            return WeightedGraph.build(n, edges, boundary=boundary)
        raise ValueError("random_gnp: no connected draw within the retry cap")
    raise ValueError(f"unknown model family {name!r}")


def _no_extra(params: dict) -> None:
    if params:
        raise ValueError(f"unexpected parameters {sorted(params)}")


# -- triangle meshes ---------------------------------------------------------


@dataclass(frozen=True)
class MeshSpec:
    """Manifold triangulation with an ordered boundary loop."""

    vertices: np.ndarray   # (n, 2) or (n, 3) coordinates
    triangles: np.ndarray  # (t, 3) vertex indices
    boundary_loop: np.ndarray  # ordered boundary vertex indices

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        t = np.asarray(self.triangles, dtype=np.int64)
        loop = np.asarray(self.boundary_loop, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] not in (2, 3):
            raise ValueError("vertices must be (n, 2) or (n, 3)")
        if t.ndim != 2 or t.shape[1] != 3:
            raise ValueError("triangles must be (t, 3)")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise ValueError("triangle index out of range")
        expected = boundary_loop_from_triangles(len(v), t)
        if not _same_loop(loop, expected):
            raise ValueError("boundary_loop inconsistent with triangle adjacency")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        object.__setattr__(self, "boundary_loop", loop)


def _mesh_edge_counts(triangles: np.ndarray) -> dict[tuple[int, int], int]:
    counts: dict[tuple[int, int], int] = {}
    for a, b, c in triangles:
        for x, y in ((a, b), (b, c), (a, c)):
            key = (min(int(x), int(y)), max(int(x), int(y)))
            counts[key] = counts.get(key, 0) + 1
    return counts


def boundary_loop_from_triangles(n: int, triangles: np.ndarray) -> np.ndarray:
    """Ordered loop of the edges used by exactly one triangle."""
    counts = _mesh_edge_counts(triangles)
    if any(c > 2 for c in counts.values()):
        raise ValueError("non-manifold edge (used by more than two triangles)")
    loop_adj: dict[int, list[int]] = {}
    for (x, y), c in counts.items():
        if c == 1:
            loop_adj.setdefault(x, []).append(y)
            loop_adj.setdefault(y, []).append(x)
    if not loop_adj:
        return np.zeros(0, dtype=np.int64)
    if any(len(nb) != 2 for nb in loop_adj.values()):
        raise ValueError("boundary edges do not form a simple loop")
    start = min(loop_adj)
    loop = [start, min(loop_adj[start])]
    while True:
        nxt = [v for v in loop_adj[loop[-1]] if v != loop[-2]]
        if nxt[0] == start:
            break
        loop.append(nxt[0])
    if len(loop) != len(loop_adj):
        raise ValueError("boundary is not a single loop")
    return np.array(loop, dtype=np.int64)


def _same_loop(a: np.ndarray, b: np.ndarray) -> bool:
    if a.size != b.size:
        return False
    if a.size == 0:
        return True
    la = a.tolist()
    lb = b.tolist()
    if set(la) != set(lb):
        return False
    k = lb.index(la[0])
    rolled = lb[k:] + lb[:k]
    return la == rolled or la == [rolled[0]] + rolled[:0:-1]


def mesh_disk(level: int, base_segments: int = 6) -> MeshSpec:
    """Triangulated unit disk: a centre fan refined ``level`` times.

    Each refinement splits every triangle four ways and projects the new
    boundary-edge midpoints onto the unit circle, doubling the boundary
    vertex count.
    """
    if level < 0:
        raise ValueError("level must be nonnegative")
    if base_segments < 3:
        raise ValueError("need at least three boundary segments")
    angles = 2.0 * np.pi * np.arange(base_segments) / base_segments
    verts = [np.zeros(2)] + [np.array([np.cos(a), np.sin(a)]) for a in angles]
    tris = [(0, 1 + i, 1 + (i + 1) % base_segments) for i in range(base_segments)]
    verts = np.array(verts)
    tris = np.array(tris, dtype=np.int64)

    for _ in range(level):
        counts = _mesh_edge_counts(tris)
        vlist = [v for v in verts]
        midpoint: dict[tuple[int, int], int] = {}

        def mid(x: int, y: int) -> int:
            key = (min(x, y), max(x, y))
            if key not in midpoint:
                m = 0.5 * (vlist[x] + vlist[y])
                if counts[key] == 1:  # boundary edge: project to the circle
                    m = m / np.linalg.norm(m)
                midpoint[key] = len(vlist)
                vlist.append(m)
            return midpoint[key]

        new_tris = []
        for a, b, c in tris:
            a, b, c = int(a), int(b), int(c)
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_tris.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
        verts = np.array(vlist)
        tris = np.array(new_tris, dtype=np.int64)

    loop = boundary_loop_from_triangles(len(verts), tris)
    return MeshSpec(verts, tris, loop)


def _cross_norm(u: np.ndarray, v: np.ndarray) -> float:
    """Norm of the cross product, for 2-D or 3-D vectors."""
    if u.shape[-1] == 2:
        return abs(float(u[0] * v[1] - u[1] * v[0]))
    return float(np.linalg.norm(np.cross(u, v)))


def cotan_weights(mesh: MeshSpec) -> tuple[dict[tuple[int, int], float], int]:
    """Cotangent edge weights and the count clamped up to the floor.

    Each triangle contributes cot(opposite angle)/2 to each of its
    edges; sums that fall at or below the positivity floor (possible on
    obtuse triangulations) are clamped to ``COTAN_CLAMP``.
    """
    v = mesh.vertices
    weights: dict[tuple[int, int], float] = {}
    for t_idx, (a, b, c) in enumerate(mesh.triangles):
        idx = (int(a), int(b), int(c))
        for k in range(3):
            apex, e1, e2 = idx[k], idx[(k + 1) % 3], idx[(k + 2) % 3]
            u = v[e1] - v[apex]
            w = v[e2] - v[apex]
            area2 = _cross_norm(u, w)
            if area2 <= 1e-300:
                raise ValueError(f"degenerate (zero-area) triangle {t_idx}")
            cot = float(np.dot(u, w)) / area2
            key = (min(e1, e2), max(e1, e2))
            weights[key] = weights.get(key, 0.0) + 0.5 * cot
    clamped = 0
    for key, w in weights.items():
        if w <= COTAN_CLAMP:
            weights[key] = COTAN_CLAMP
            clamped += 1
    return weights, clamped


def mesh_to_graph(mesh: MeshSpec) -> WeightedGraph:
    """Graph whose quadratic energy is the mesh's piecewise-linear one.

    Cotangent edge weights, barycentric vertex areas as mu, boundary
    vertices from the loop with nu = half the incident boundary-edge
    length.  Emits a warning when any cotangent weight was clamped.
    """
    weights, clamped = cotan_weights(mesh)
    if clamped:
        warnings.warn(f"clamped {clamped} nonpositive cotangent weights to {COTAN_CLAMP}")
    v = mesh.vertices
    n = len(v)
    mu = np.zeros(n)
    for a, b, c in mesh.triangles:
        area = 0.5 * _cross_norm(v[b] - v[a], v[c] - v[a])
        for vertex in (a, b, c):
            mu[vertex] += area / 3.0
    loop = mesh.boundary_loop
    nu: dict[int, float] = {}
    for i in range(loop.size):
        x, y = int(loop[i]), int(loop[(i + 1) % loop.size])
        length = float(np.linalg.norm(v[x] - v[y]))
        nu[x] = nu.get(x, 0.0) + 0.5 * length
        nu[y] = nu.get(y, 0.0) + 0.5 * length
    edges = [(x, y, w) for (x, y), w in sorted(weights.items())]
    return WeightedGraph.build(n, edges, mu=mu, boundary=loop.tolist(), nu=nu)


def load_mesh_off(path) -> MeshSpec:
    """Read a triangulated OFF file (vertex/face listing, faces of size 3)."""
    with open(path, "r", encoding="utf-8") as fh:
        tokens: list[str] = []
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise ValueError("not an OFF file (missing header)")
    pos = 1
    nv, nf = int(tokens[pos]), int(tokens[pos + 1])
    pos += 3  # vertex, face and (ignored) edge counts
    verts = np.zeros((nv, 3))
    for i in range(nv):
        verts[i] = [float(tokens[pos]), float(tokens[pos + 1]), float(tokens[pos + 2])]
        pos += 3
    if np.all(verts[:, 2] == 0.0):
        verts = verts[:, :2]
    tris = np.zeros((nf, 3), dtype=np.int64)
    for i in range(nf):
        k = int(tokens[pos])
        if k != 3:
            raise ValueError(f"face {i} has {k} vertices; only triangles are supported")
        tris[i] = [int(tokens[pos + 1]), int(tokens[pos + 2]), int(tokens[pos + 3])]
        pos += 4
    loop = boundary_loop_from_triangles(nv, tris)
    return MeshSpec(verts, tris, loop)
