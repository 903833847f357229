"""Shared builders and hypothesis strategies for the test suite."""

from __future__ import annotations

import hypothesis.strategies as st
import numpy as np

from linepart.graph import Graph
from linepart.ordering import Ordering


def make_graph(edges, n=None, weights=None, vertex_weights=None, geo=None) -> Graph:
    """Graph from an edge list of (u, v) pairs; unit weights by default."""
    us = [e[0] for e in edges]
    vs = [e[1] for e in edges]
    ws = list(weights) if weights is not None else [1.0] * len(edges)
    nn = n if n is not None else (max(max(us), max(vs)) + 1 if edges else 0)
    return Graph.from_arcs(
        np.array(us, dtype=np.int64),
        np.array(vs, dtype=np.int64),
        np.array(ws, dtype=np.float64),
        [str(i) for i in range(nn)],
        np.array(vertex_weights, dtype=np.float64) if vertex_weights is not None else None,
        geo,
    )


def path_graph(n: int) -> Graph:
    return make_graph([(i, i + 1) for i in range(n - 1)], n=n)


def random_graph(rng: np.random.Generator, n: int, m: int, weighted=False) -> Graph:
    eu = rng.integers(0, n, m)
    ev = rng.integers(0, n, m)
    keep = eu != ev
    w = rng.integers(1, 5, int(keep.sum())).astype(float) if weighted else np.ones(int(keep.sum()))
    return Graph.from_arcs(eu[keep], ev[keep], w, [str(i) for i in range(n)])


@st.composite
def small_graph_and_order(draw, max_n=10, max_m=20, weighted=False):
    n = draw(st.integers(min_value=1, max_value=max_n))
    m = draw(st.integers(min_value=0, max_value=max_m))
    pairs = st.tuples(
        st.integers(min_value=0, max_value=n - 1),
        st.integers(min_value=0, max_value=n - 1),
    )
    edges = [e for e in draw(st.lists(pairs, min_size=m, max_size=m)) if e[0] != e[1]]
    if weighted:
        ws = draw(
            st.lists(
                st.floats(min_value=0.0, max_value=9.0, allow_nan=False),
                min_size=len(edges),
                max_size=len(edges),
            )
        )
    else:
        ws = [1.0] * len(edges)
    g = make_graph(edges, n=n, weights=ws)
    perm = draw(st.permutations(list(range(n))))
    return g, Ordering.from_vertex_at(np.array(perm, dtype=np.int64))
