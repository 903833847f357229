"""Initial linear embeddings: random, space-filling-curve, and affinity orders.

An ordering is a permutation of vertex ids; contiguous rank ranges of a good
ordering make cheap, low-cut parts. The affinity ordering builds a bottom-up
clustering (every cluster links to its highest-similarity neighbor each
round, linked components merge) and sorts vertices by their root-to-leaf
label paths so each cluster occupies a contiguous stretch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .graph import Graph
from .hilbert import hilbert_index

__all__ = [
    "Ordering",
    "AffinityHierarchy",
    "random_ordering",
    "hilbert_ordering",
    "affinity_ordering",
]

AFFINITY_ROUND_CAP = 30  # > log2 of any practical vertex count


@dataclass
class Ordering:
    """A permutation of vertex ids with rank lookup in both directions."""

    vertex_at: np.ndarray  # rank -> vertex id
    rank_of: np.ndarray  # vertex id -> rank

    @classmethod
    def from_vertex_at(cls, vertex_at: np.ndarray) -> "Ordering":
        vertex_at = np.asarray(vertex_at, dtype=np.int64)
        n = len(vertex_at)
        rank_of = np.empty(n, dtype=np.int64)
        rank_of[vertex_at] = np.arange(n)
        return cls(vertex_at, rank_of)

    @classmethod
    def from_rank_of(cls, rank_of: np.ndarray) -> "Ordering":
        rank_of = np.asarray(rank_of, dtype=np.int64)
        n = len(rank_of)
        vertex_at = np.empty(n, dtype=np.int64)
        vertex_at[rank_of] = np.arange(n)
        return cls(vertex_at, rank_of)

    @classmethod
    def identity(cls, n: int) -> "Ordering":
        ids = np.arange(n, dtype=np.int64)
        return cls(ids.copy(), ids.copy())

    @property
    def n(self) -> int:
        return len(self.vertex_at)

    def validate(self) -> None:
        n = self.n
        if sorted(self.vertex_at.tolist()) != list(range(n)):
            raise ValueError("vertex_at is not a permutation")
        if not np.array_equal(self.vertex_at[self.rank_of], np.arange(n)):
            raise ValueError("rank_of is not the inverse of vertex_at")

    def copy(self) -> "Ordering":
        return Ordering(self.vertex_at.copy(), self.rank_of.copy())

    def __eq__(self, other) -> bool:
        return isinstance(other, Ordering) and np.array_equal(
            self.vertex_at, other.vertex_at
        )


@dataclass
class AffinityHierarchy:
    """Bottom-up cluster tree produced by the affinity ordering.

    ``levels[i]`` maps each vertex to the representative (minimum member id)
    of its cluster after round i; level 0 is all singletons. ``labels`` holds
    each vertex's representative path from root to leaf; a vertex gains one
    entry per round in which its cluster merged, plus its own id as the leaf.
    """

    levels: list[np.ndarray] = field(default_factory=list)
    labels: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.levels)

    def cluster_counts(self) -> list[int]:
        return [len(np.unique(level)) for level in self.levels]

    def label_of(self, v: int) -> tuple[int, ...]:
        return self.labels[v]


def random_ordering(g: Graph, seed: int) -> Ordering:
    """Uniformly random permutation, fully determined by the seed."""
    rng = np.random.default_rng(seed)
    return Ordering.from_vertex_at(rng.permutation(g.n).astype(np.int64))


def hilbert_ordering(g: Graph, curve_order: int = 16) -> Ordering:
    """Rank vertices along the Hilbert curve over their coordinates.

    The geo bounding box is scaled onto the 2^curve_order grid per axis, so
    the result is invariant under translation and uniform scaling of all
    coordinates. Curve-index ties break by ascending vertex id.
    """
    if g.geo is None:
        if g.n == 0:
            return Ordering.identity(0)
        raise ValueError(f"vertex {g.external_ids[0]!r} has no coordinates")
    bad = np.isnan(g.geo).any(axis=1)
    if bad.any():
        v = int(np.argmax(bad))
        raise ValueError(f"vertex {g.external_ids[v]!r} has no coordinates")

    side = (1 << curve_order) - 1

    def to_cells(coord: np.ndarray) -> np.ndarray:
        span = coord.max() - coord.min()
        if span <= 0:
            return np.zeros(len(coord), dtype=np.int64)
        scaled = (coord - coord.min()) / span * side
        return np.clip(np.rint(scaled).astype(np.int64), 0, side)

    xs = to_cells(g.geo[:, 1])  # longitude -> x
    ys = to_cells(g.geo[:, 0])  # latitude  -> y
    idx = hilbert_index(xs, ys, curve_order)
    vertex_at = np.lexsort((np.arange(g.n), idx))
    return Ordering.from_vertex_at(vertex_at)


def affinity_ordering(
    g: Graph, max_rounds: int = AFFINITY_ROUND_CAP
) -> tuple[Ordering, AffinityHierarchy]:
    """Agglomerative affinity clustering order.

    Per round every cluster selects its highest-similarity neighbor (ties to
    the neighbor with the smaller minimum member id); connected components of
    the undirected selection graph merge. Cluster-pair similarity is the mean
    of edge similarities between their members that are adjacent in ``g``.
    Each merged cluster's minimum member id is prepended to its members'
    labels; the final order sorts label paths lexicographically, then by id.

    Clusters with no positive-similarity neighbor make no selection and
    survive unmerged, so a graph of several components keeps each component
    contiguous in the output.
    """
    n = g.n
    cluster = np.arange(n, dtype=np.int64)  # representative = min member id
    rev_labels: list[list[int]] = [[v] for v in range(n)]
    hierarchy = AffinityHierarchy(levels=[cluster.copy()])

    eu, ev, ew = g.edge_u, g.edge_v, g.edge_w
    for _ in range(max_rounds):
        cu = cluster[eu]
        cv = cluster[ev]
        cross = cu != cv
        if not cross.any():
            break
        a = np.minimum(cu[cross], cv[cross])
        b = np.maximum(cu[cross], cv[cross])
        key = a * np.int64(n) + b
        uniq, inverse = np.unique(key, return_inverse=True)
        sums = np.bincount(inverse, weights=ew[cross], minlength=len(uniq))
        counts = np.bincount(inverse, minlength=len(uniq))
        means = sums / counts
        pos = means > 0
        if not pos.any():
            break
        pa = (uniq[pos] // n).astype(np.int64)
        pb = (uniq[pos] % n).astype(np.int64)
        pw = means[pos]

        # Best neighbor per cluster: max similarity, ties to smaller rep id.
        src = np.concatenate([pa, pb])
        dst = np.concatenate([pb, pa])
        sim = np.concatenate([pw, pw])
        order = np.lexsort((dst, -sim, src))
        src_sorted = src[order]
        first = np.ones(len(order), dtype=bool)
        first[1:] = src_sorted[1:] != src_sorted[:-1]
        sel_src = src_sorted[first]
        sel_dst = dst[order][first]

        # Merge connected components of the undirected selection graph.
        reps = np.unique(cluster)
        comp_of_rep = np.full(n, -1, dtype=np.int64)
        ri = np.searchsorted(reps, sel_src)
        rj = np.searchsorted(reps, sel_dst)
        m = len(reps)
        sel_graph = coo_matrix(
            (np.ones(len(ri)), (ri, rj)), shape=(m, m)
        )
        n_comp, comp = connected_components(sel_graph, directed=False)
        comp_of_rep[reps] = comp

        # New representative per component: minimum member id.
        comp_min = np.full(n_comp, n, dtype=np.int64)
        np.minimum.at(comp_min, comp, reps)
        comp_size = np.bincount(comp, minlength=n_comp)

        merged = comp_size[comp_of_rep[cluster]] >= 2
        if not merged.any():
            break
        new_cluster = cluster.copy()
        new_cluster[merged] = comp_min[comp_of_rep[cluster[merged]]]
        for v in np.flatnonzero(merged):
            rev_labels[v].append(int(new_cluster[v]))
        cluster = new_cluster
        hierarchy.levels.append(cluster.copy())

    hierarchy.labels = [tuple(reversed(lbl)) for lbl in rev_labels]
    vertex_at = np.array(
        sorted(range(n), key=lambda v: (hierarchy.labels[v], v)), dtype=np.int64
    )
    return Ordering.from_vertex_at(vertex_at), hierarchy
