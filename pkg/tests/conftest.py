import numpy as np
import pytest

from plcap.graphs import WeightedGraph


def random_connected_graph(rng, n, extra=0.2, boundary_size=None, weighted=True):
    """Random connected graph: a random spanning tree plus extra edges.

    Weights, mu and nu are drawn from [0.5, 2) unless ``weighted`` is
    False (then everything is 1).  Deterministic given ``rng``.
    """
    draw = (lambda: float(rng.uniform(0.5, 2.0))) if weighted else (lambda: 1.0)
    edges = []
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.append((i, j, draw()))
    present = {(min(x, y), max(x, y)) for x, y, _ in edges}
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in present and rng.random() < extra:
                edges.append((i, j, draw()))
    k = boundary_size if boundary_size else int(rng.integers(2, max(3, n // 2 + 1)))
    boundary = sorted(int(v) for v in rng.choice(n, size=min(k, n), replace=False))
    mu = rng.uniform(0.5, 2.0, size=n) if weighted else None
    nu = {b: draw() for b in boundary}
    return WeightedGraph.build(n, edges, mu=mu, boundary=boundary, nu=nu)


def path_graph(weights, boundary_ends=True):
    w = list(weights)
    n = len(w) + 1
    boundary = [0, n - 1] if boundary_ends else []
    return WeightedGraph.build(
        n, [(i, i + 1, float(wi)) for i, wi in enumerate(w)], boundary=boundary
    )


@pytest.fixture
def edge_graph():
    from plcap.geometry_io import gen_model

    return gen_model("edge")


@pytest.fixture
def path3():
    from plcap.geometry_io import gen_model

    return gen_model("path", n=3)
