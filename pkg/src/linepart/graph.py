"""Graph data model, similarity weighting, and partition quality metrics.

The graph is immutable after construction: an undirected multigraph collapsed
to simple form (parallel edges merged by weight summation, self-loops
dropped), stored both as a flat edge list and as a CSR adjacency with sorted
neighbor lists. Vertex weights are positive; edge weights are non-negative
and double as lengths where an operation needs a metric.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

if TYPE_CHECKING:
    from .ordering import Ordering

__all__ = [
    "Graph",
    "GraphFormatError",
    "Partition",
    "BalanceReport",
    "VertexRecord",
    "common_neighbors_similarity",
    "cut_weight",
    "check_balance",
    "cross_shard_rate",
    "query_weighted_graph",
]

# Relative slack used when comparing aggregated float weights against bounds.
_REL_TOL = 1e-9


class GraphFormatError(ValueError):
    """Malformed input data; message carries file name and line number."""


@dataclass(frozen=True)
class VertexRecord:
    """One vertex: dense internal id, external name, weight, optional geo."""

    id: int
    external_id: str
    weight: float = 1.0
    geo: tuple[float, float] | None = None  # (latitude, longitude), degrees


class Graph:
    """Immutable undirected graph with weighted vertices and edges.

    Vertices carry dense ids 0..n-1 assigned in first-seen input order;
    external string ids are preserved for I/O. Neighbor lists are sorted by
    vertex id.
    """

    def __init__(
        self,
        external_ids: Sequence[str],
        vertex_weights: np.ndarray,
        edge_u: np.ndarray,
        edge_v: np.ndarray,
        edge_w: np.ndarray,
        geo: np.ndarray | None = None,
    ):
        n = len(external_ids)
        self.n = n
        self.external_ids = list(external_ids)
        self.vertex_weights = np.asarray(vertex_weights, dtype=np.float64)
        if self.vertex_weights.shape != (n,):
            raise ValueError("vertex_weights must have one entry per vertex")
        if n and self.vertex_weights.min() <= 0:
            bad = int(np.argmin(self.vertex_weights))
            raise ValueError(
                f"vertex {self.external_ids[bad]!r} has non-positive weight "
                f"{self.vertex_weights[bad]}"
            )
        self.edge_u = np.asarray(edge_u, dtype=np.int64)
        self.edge_v = np.asarray(edge_v, dtype=np.int64)
        self.edge_w = np.asarray(edge_w, dtype=np.float64)
        m = len(self.edge_w)
        if len(self.edge_u) != m or len(self.edge_v) != m:
            raise ValueError("edge arrays must have equal length")
        if m:
            if self.edge_u.min() < 0 or self.edge_v.max() >= n:
                raise ValueError("edge endpoint out of range")
            if not (self.edge_u < self.edge_v).all():
                raise ValueError("edges must be stored with u < v")
            if self.edge_w.min() < 0:
                bad = int(np.argmin(self.edge_w))
                raise ValueError(
                    f"edge ({self.external_ids[self.edge_u[bad]]!r}, "
                    f"{self.external_ids[self.edge_v[bad]]!r}) has negative "
                    f"weight {self.edge_w[bad]}"
                )
        if geo is not None:
            geo = np.asarray(geo, dtype=np.float64)
            if geo.shape != (n, 2):
                raise ValueError("geo must have shape (n, 2)")
            lat, lng = geo[:, 0], geo[:, 1]
            ok_lat = np.isnan(lat) | ((lat >= -90.0) & (lat <= 90.0))
            ok_lng = np.isnan(lng) | ((lng >= -180.0) & (lng <= 180.0))
            if not (ok_lat & ok_lng).all():
                bad = int(np.argmin(ok_lat & ok_lng))
                raise ValueError(
                    f"vertex {self.external_ids[bad]!r} has out-of-range "
                    f"coordinates {tuple(geo[bad])}"
                )
        self.geo = geo

        # CSR adjacency over both arc directions, neighbors sorted by id.
        src = np.concatenate([self.edge_u, self.edge_v])
        dst = np.concatenate([self.edge_v, self.edge_u])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((dst, src))
        self.adj_indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(self.adj_indptr, src + 1, 1)
        np.cumsum(self.adj_indptr, out=self.adj_indptr)
        self.adj_indices = dst[order]
        self.adj_edge = eid[order]
        self.adj_weights = self.edge_w[self.adj_edge]

        self.total_edge_weight = float(self.edge_w.sum())
        self.total_vertex_weight = float(self.vertex_weights.sum())
        self._ext_index: dict[str, int] | None = None

    # -- construction --------------------------------------------------

    @classmethod
    def from_arcs(
        cls,
        tails: Iterable[int],
        heads: Iterable[int],
        weights: Iterable[float],
        external_ids: Sequence[str],
        vertex_weights: np.ndarray | None = None,
        geo: np.ndarray | None = None,
    ) -> "Graph":
        """Build a graph from raw (possibly directed, duplicated) arcs.

        Arcs are symmetrized: each arc contributes its weight once to the
        undirected edge, duplicates merge by summation. Self-loops are
        dropped.
        """
        n = len(external_ids)
        tails = np.asarray(list(tails) if not isinstance(tails, np.ndarray) else tails, dtype=np.int64)
        heads = np.asarray(list(heads) if not isinstance(heads, np.ndarray) else heads, dtype=np.int64)
        weights = np.asarray(list(weights) if not isinstance(weights, np.ndarray) else weights, dtype=np.float64)
        lo = np.minimum(tails, heads)
        hi = np.maximum(tails, heads)
        keep = lo != hi
        lo, hi, weights = lo[keep], hi[keep], weights[keep]
        if len(lo):
            key = lo * np.int64(n) + hi
            uniq, inverse = np.unique(key, return_inverse=True)
            merged = np.bincount(inverse, weights=weights, minlength=len(uniq))
            edge_u = (uniq // n).astype(np.int64)
            edge_v = (uniq % n).astype(np.int64)
            edge_w = merged.astype(np.float64)
        else:
            edge_u = edge_v = np.zeros(0, dtype=np.int64)
            edge_w = np.zeros(0, dtype=np.float64)
        if vertex_weights is None:
            vertex_weights = np.ones(n, dtype=np.float64)
        return cls(external_ids, vertex_weights, edge_u, edge_v, edge_w, geo)

    def with_edge_weights(self, edge_w: np.ndarray) -> "Graph":
        """Same vertices and edge set, different edge weights."""
        return Graph(
            self.external_ids,
            self.vertex_weights,
            self.edge_u,
            self.edge_v,
            np.asarray(edge_w, dtype=np.float64),
            self.geo,
        )

    # -- accessors ------------------------------------------------------

    @property
    def edge_count(self) -> int:
        return len(self.edge_w)

    def degree(self, v: int) -> int:
        return int(self.adj_indptr[v + 1] - self.adj_indptr[v])

    def neighbors(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        """(neighbor ids, edge weights) views, neighbors sorted by id."""
        lo, hi = self.adj_indptr[v], self.adj_indptr[v + 1]
        return self.adj_indices[lo:hi], self.adj_weights[lo:hi]

    def vertex(self, v: int) -> VertexRecord:
        geo = None
        if self.geo is not None and not np.isnan(self.geo[v]).any():
            geo = (float(self.geo[v, 0]), float(self.geo[v, 1]))
        return VertexRecord(v, self.external_ids[v], float(self.vertex_weights[v]), geo)

    def vertices(self) -> Iterable[VertexRecord]:
        return (self.vertex(v) for v in range(self.n))

    @property
    def ext_index(self) -> dict[str, int]:
        if self._ext_index is None:
            self._ext_index = {ext: i for i, ext in enumerate(self.external_ids)}
        return self._ext_index

    def internal_id(self, external_id: str) -> int:
        try:
            return self.ext_index[external_id]
        except KeyError:
            raise KeyError(f"unknown vertex id {external_id!r}") from None

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.edge_count})"


class Partition:
    """Assignment of every vertex to one of k parts, with cached part weights."""

    def __init__(self, assignment: np.ndarray, k: int, part_weights: np.ndarray):
        self.assignment = np.asarray(assignment, dtype=np.int64)
        self.k = int(k)
        self.part_weights = np.asarray(part_weights, dtype=np.float64)
        if len(self.part_weights) != self.k:
            raise ValueError("part_weights must have one entry per part")
        if len(self.assignment) and (
            self.assignment.min() < 0 or self.assignment.max() >= self.k
        ):
            raise ValueError("part id out of range")

    @classmethod
    def from_assignment(cls, assignment: np.ndarray, k: int, g: Graph) -> "Partition":
        assignment = np.asarray(assignment, dtype=np.int64)
        if len(assignment) != g.n:
            raise ValueError(
                f"partition covers {len(assignment)} vertices, graph has {g.n}"
            )
        part_weights = np.bincount(assignment, weights=g.vertex_weights, minlength=k)
        return cls(assignment, k, part_weights)

    @classmethod
    def from_contiguous(cls, ordering: "Ordering", splits, g: Graph) -> "Partition":
        """Parts are contiguous rank ranges of the ordering between splits."""
        q = np.asarray(splits.q if hasattr(splits, "q") else splits, dtype=np.int64)
        k = len(q) - 1
        assignment = np.empty(g.n, dtype=np.int64)
        for j in range(k):
            assignment[ordering.vertex_at[q[j] : q[j + 1]]] = j
        return cls.from_assignment(assignment, k, g)

    @property
    def n(self) -> int:
        return len(self.assignment)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Partition)
            and self.k == other.k
            and np.array_equal(self.assignment, other.assignment)
        )

    def __repr__(self) -> str:
        return f"Partition(n={self.n}, k={self.k})"


@dataclass
class BalanceReport:
    """Outcome of an alpha-balance check, with per-part detail."""

    balanced: bool
    alpha: float
    target: float  # w(V) / k
    part_weights: np.ndarray
    deviations: np.ndarray  # (w_i - target) / target

    def rows(self) -> Iterable[tuple[int, float, float]]:
        for j in range(len(self.part_weights)):
            yield j, float(self.part_weights[j]), float(self.deviations[j])

    def __bool__(self) -> bool:
        return self.balanced


# -- similarity ---------------------------------------------------------


def common_neighbors_similarity(g: Graph) -> Graph:
    """Reweight every edge by the common-neighbor ratio of its endpoints.

    For edge (u, v) the weight becomes |N(u) & N(v)| / |(N(u) | N(v)) - {u, v}|;
    edges whose endpoints have no third neighbor get weight 0. Input edge
    weights are ignored; only the adjacency structure matters.
    """
    deg = np.diff(g.adj_indptr)
    new_w = np.zeros(g.edge_count, dtype=np.float64)
    indptr, indices = g.adj_indptr, g.adj_indices
    for e in range(g.edge_count):
        u = g.edge_u[e]
        v = g.edge_v[e]
        if deg[u] > deg[v]:
            u, v = v, u
        small = indices[indptr[u] : indptr[u + 1]]
        big = indices[indptr[v] : indptr[v + 1]]
        pos = np.searchsorted(big, small)
        pos[pos == len(big)] = 0  # harmless: compared entry then mismatches
        common = int(np.count_nonzero(big[pos] == small))
        denom = int(deg[g.edge_u[e]]) + int(deg[g.edge_v[e]]) - common - 2
        if denom > 0:
            new_w[e] = common / denom
    return g.with_edge_weights(new_w)


# -- metrics ------------------------------------------------------------


def cut_weight(g: Graph, p: Partition) -> tuple[float, float]:
    """(total weight of inter-part edges, that weight / total edge weight)."""
    if p.n != g.n:
        raise ValueError(f"partition covers {p.n} vertices, graph has {g.n}")
    a = p.assignment
    crossing = a[g.edge_u] != a[g.edge_v]
    absolute = float(g.edge_w[crossing].sum())
    fraction = absolute / g.total_edge_weight if g.total_edge_weight > 0 else 0.0
    return absolute, fraction


def check_balance(g: Graph, p: Partition, alpha: float) -> BalanceReport:
    """Is every part weight within (1 +/- alpha) * w(V)/k of the ideal?"""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    target = g.total_vertex_weight / p.k
    tol = _REL_TOL * max(1.0, target)
    lo = (1.0 - alpha) * target - tol
    hi = (1.0 + alpha) * target + tol
    w = p.part_weights
    balanced = bool((w >= lo).all() and (w <= hi).all())
    deviations = (w - target) / target if target > 0 else np.zeros_like(w)
    return BalanceReport(balanced, alpha, target, w.copy(), deviations)


def cross_shard_rate(p: Partition, queries: Sequence[tuple[int, int]]) -> float:
    """Fraction of (src, dst) queries whose endpoints land in different parts."""
    if len(queries) == 0:
        return 0.0
    qs = np.asarray(queries, dtype=np.int64).reshape(-1, 2)
    if qs.min() < 0 or qs.max() >= p.n:
        bad = qs.flatten()[int(np.argmax((qs < 0) | (qs >= p.n)))]
        raise ValueError(f"query endpoint {int(bad)} is not a vertex")
    a = p.assignment
    return float(np.mean(a[qs[:, 0]] != a[qs[:, 1]]))


def _shortest_path_tree(g: Graph, src: int) -> tuple[np.ndarray, np.ndarray]:
    """Dijkstra from src; predecessor ties resolved to the smallest vertex id."""
    dist = np.full(g.n, np.inf)
    pred = np.full(g.n, -1, dtype=np.int64)
    settled = np.zeros(g.n, dtype=bool)
    dist[src] = 0.0
    heap: list[tuple[float, int]] = [(0.0, src)]
    indptr, indices, weights = g.adj_indptr, g.adj_indices, g.adj_weights
    while heap:
        d, x = heapq.heappop(heap)
        if settled[x]:
            continue
        settled[x] = True
        for pos in range(indptr[x], indptr[x + 1]):
            y = indices[pos]
            if settled[y]:
                continue
            nd = d + weights[pos]
            if nd < dist[y]:
                dist[y] = nd
                pred[y] = x
                heapq.heappush(heap, (nd, int(y)))
            elif nd == dist[y] and (pred[y] == -1 or x < pred[y]):
                pred[y] = x
    return dist, pred


def query_weighted_graph(
    g: Graph, queries: Sequence[tuple[int, int]]
) -> tuple[Graph, list[tuple[int, int]]]:
    """Reweight edges by shortest-path traffic implied by the queries.

    Each query contributes one shortest path (ties broken toward the
    lexicographically smallest predecessor id); every traversed edge's count
    increases by one. Edges on no path keep weight 0 but remain in the graph.
    Unreachable query pairs are skipped and returned, not fatal.
    """
    counts = np.zeros(g.edge_count, dtype=np.float64)
    skipped: list[tuple[int, int]] = []
    trees: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    indptr, indices, edge_of = g.adj_indptr, g.adj_indices, g.adj_edge
    for src, dst in queries:
        src, dst = int(src), int(dst)
        for v in (src, dst):
            if not (0 <= v < g.n):
                raise ValueError(f"query endpoint {v} is not a vertex")
        if src == dst:
            continue
        if src not in trees:
            trees[src] = _shortest_path_tree(g, src)
        dist, pred = trees[src]
        if not np.isfinite(dist[dst]):
            skipped.append((src, dst))
            continue
        y = dst
        while y != src:
            x = pred[y]
            row = indices[indptr[y] : indptr[y + 1]]
            pos = int(np.searchsorted(row, x))
            counts[edge_of[indptr[y] + pos]] += 1.0
            y = int(x)
    return g.with_edge_weights(counts), skipped
