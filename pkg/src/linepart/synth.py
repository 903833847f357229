"""Synthetic graphs for tests and scaling experiments."""

from __future__ import annotations

import numpy as np

from .graph import Graph

__all__ = ["erdos_renyi", "rmat", "disjoint_cliques", "ring_of_cliques"]


def _ids(n: int) -> list[str]:
    return [str(i) for i in range(n)]


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p): each vertex pair is an edge independently with probability p."""
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(n, k=1)
    mask = rng.random(len(iu)) < p
    return Graph.from_arcs(iu[mask], iv[mask], np.ones(mask.sum()), _ids(n))


def rmat(
    scale: int,
    edges: int,
    seed: int,
    a: float = 0.57,
    b: float = 0.19,
    c: float = 0.19,
) -> Graph:
    """Recursive-matrix random graph on 2^scale vertices, skewed quadrants.

    Samples ``edges`` arcs by choosing one quadrant per bit level with
    probabilities (a, b, c, 1-a-b-c); self-loops drop and duplicates merge,
    then all edge weights reset to 1, so the result is a simple unweighted
    graph (its edge count is a bit below the requested arc count).
    """
    d = 1.0 - a - b - c
    if d < 0:
        raise ValueError("quadrant probabilities exceed 1")
    rng = np.random.default_rng(seed)
    u = np.zeros(edges, dtype=np.int64)
    v = np.zeros(edges, dtype=np.int64)
    for _ in range(scale):
        quad = rng.choice(4, size=edges, p=[a, b, c, d])
        u = (u << 1) | (quad >> 1)
        v = (v << 1) | (quad & 1)
    n = 1 << scale
    g = Graph.from_arcs(u, v, np.ones(edges), _ids(n))
    return g.with_edge_weights(np.ones(g.edge_count))


def disjoint_cliques(count: int, size: int) -> Graph:
    """``count`` disconnected cliques of ``size`` vertices each."""
    us, vs = [], []
    for block in range(count):
        base = block * size
        for i in range(size):
            for j in range(i + 1, size):
                us.append(base + i)
                vs.append(base + j)
    n = count * size
    return Graph.from_arcs(
        np.array(us), np.array(vs), np.ones(len(us)), _ids(n)
    )


def ring_of_cliques(count: int, size: int) -> Graph:
    """Cliques joined in a ring by single edges between consecutive blocks."""
    g = disjoint_cliques(count, size)
    us = list(g.edge_u)
    vs = list(g.edge_v)
    for block in range(count):
        nxt = (block + 1) % count
        us.append(block * size)
        vs.append(nxt * size + size - 1)
    n = count * size
    return Graph.from_arcs(
        np.array(us), np.array(vs), np.ones(len(us)), _ids(n)
    )
