"""Boundary postprocessing inside imbalance windows.

Split points chop an ordering into k contiguous parts. Around every interior
boundary sits a window whose half-width is the rank slack the imbalance
parameter allows; boundaries may move only inside their window, so part
weights stay within the alpha bound no matter how many passes run. Three
optimizers work on windows or the whole boundary set:

* a linear scan that finds the cheapest order-respecting split per window,
* a two-terminal minimum cut that may also permute the window's vertices,
* contraction of contiguous rank blocks into supernodes followed by a
  dynamic program that places all k-1 boundaries at once.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .graph import Graph
from .maxflow import FlowNetwork
from .ordering import Ordering

__all__ = [
    "SplitPoints",
    "Window",
    "WindowCutResult",
    "ContractedGraph",
    "DpResult",
    "make_split_points",
    "make_windows",
    "window_crossing_weight",
    "linopt_window",
    "mincut_window",
    "apply_window_stage",
    "contract_blocks",
    "crossing_cost",
    "dp_partition",
    "dp_base_layer",
    "set_max_workers",
]

log = logging.getLogger(__name__)

_REL_TOL = 1e-9
_max_workers: int = 1


def set_max_workers(n: int) -> None:
    """Cap parallelism for per-window tasks. Results are independent of n."""
    global _max_workers
    if n < 1:
        raise ValueError("worker count must be positive")
    _max_workers = int(n)


@dataclass
class SplitPoints:
    """Boundary indices q with q[0] = 0 and q[k] = n; part j = ranks [q_j, q_j+1)."""

    q: np.ndarray
    alpha: float

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=np.int64)
        if len(self.q) < 2 or self.q[0] != 0:
            raise ValueError("split points must start at 0")
        if (np.diff(self.q) <= 0).any():
            raise ValueError("split points must be strictly increasing")

    @property
    def k(self) -> int:
        return len(self.q) - 1

    @property
    def n(self) -> int:
        return int(self.q[-1])

    def part_range(self, j: int) -> tuple[int, int]:
        return int(self.q[j]), int(self.q[j + 1])

    def part_sizes(self) -> np.ndarray:
        return np.diff(self.q)

    def copy(self) -> "SplitPoints":
        return SplitPoints(self.q.copy(), self.alpha)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SplitPoints)
            and self.alpha == other.alpha
            and np.array_equal(self.q, other.q)
        )


def make_split_points(g: Graph, o: Ordering, k: int, alpha: float) -> SplitPoints:
    """Fully balanced boundaries q_j = floor(j*n/k)."""
    n = g.n
    if o.n != n:
        raise ValueError("ordering does not cover the graph")
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > n:
        raise ValueError(f"cannot split {n} vertices into {k} parts")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    q = np.array([(j * n) // k for j in range(k + 1)], dtype=np.int64)
    return SplitPoints(q, alpha)


@dataclass(frozen=True)
class Window:
    """Movement range for one interior boundary.

    Candidate split indices are [lo, hi] inclusive; the vertices at ranks
    [lo, hi) are the ones whose side can change. ``center`` is the fully
    balanced boundary position the window is anchored to.
    """

    index: int
    center: int
    lo: int
    hi: int

    @property
    def size(self) -> int:
        return self.hi - self.lo


def window_half_width(n: int, k: int, alpha: float) -> int:
    """Rank half-width of a boundary window under uniform vertex weights.

    floor(alpha*n / 2k), guarded against float noise in the product: each
    boundary absorbs at most half of a part's permitted imbalance, so two
    moving boundaries can never push a part past the alpha bound.
    """
    v = alpha * n / (2 * k)
    return int(math.floor(v + 1e-9 * (1.0 + abs(v))))


def make_windows(g: Graph, o: Ordering, k: int, alpha: float) -> list[Window]:
    """Windows around the fully balanced boundaries.

    Boundary j may sit at rank s only while the cumulative vertex weight at
    s stays within alpha*w(V)/2k of the ideal boundary weight j*w(V)/k, so
    any combination of in-window splits keeps every part inside the alpha
    bound. With unit weights this is the classic alpha*n/2k half-width
    (floored). Windows anchor at the balanced positions, not at the current
    splits, which bounds drift across any number of passes; adjacent windows
    are clamped at midpoints so their vertex ranges stay disjoint and splits
    remain strictly increasing even for extreme alpha. A window whose slack
    admits no rank degenerates to the balanced position (no movement).
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    n = g.n
    if o.n != n:
        raise ValueError("ordering does not cover the graph")
    cw = np.concatenate([[0.0], np.cumsum(g.vertex_weights[o.vertex_at])])
    total = cw[-1]
    slack = alpha * total / (2 * k)
    tol = 1e-9 * max(1.0, slack)
    centers = [(j * n) // k for j in range(k + 1)]
    windows = []
    for j in range(1, k):
        c = centers[j]
        ideal = j * total / k
        lo = int(np.searchsorted(cw, ideal - slack - tol, side="left"))
        hi = int(np.searchsorted(cw, ideal + slack + tol, side="right")) - 1
        lo = max(lo, 1)
        hi = min(hi, n - 1)
        if j > 1:
            lo = max(lo, (centers[j - 1] + c) // 2 + 1)
        if j < k - 1:
            hi = min(hi, (c + centers[j + 1]) // 2)
        if lo > hi:
            lo = hi = min(max(c, 1), n - 1)
        windows.append(Window(j, c, lo, hi))
    return windows


def window_crossing_weight(g: Graph, o: Ordering, win: Window, split: int) -> float:
    """Weight of edges crossing ``split``, excluding constant before-to-after
    edges (those with no endpoint among the window's vertices)."""
    if not win.lo <= split <= win.hi:
        raise ValueError(f"split {split} outside window [{win.lo}, {win.hi}]")
    ranks = o.rank_of
    total = 0.0
    for r in range(win.lo, win.hi):
        v = int(o.vertex_at[r])
        nbr, wt = g.neighbors(v)
        nr = ranks[nbr]
        dup = (nr >= win.lo) & (nr < win.hi) & (nr < r)  # counted at other end
        crossing = (np.minimum(nr, r) < split) & (np.maximum(nr, r) >= split)
        total += float(wt[crossing & ~dup].sum())
    return total


def _bipartition_crossing_weight(
    g: Graph,
    o: Ordering,
    win: Window,
    left_mask: np.ndarray,
) -> float:
    """Crossing weight of an arbitrary bipartition of the window vertices.

    ``left_mask[i]`` marks whether the vertex at rank lo+i joins the
    before-side. Edges wholly outside the window are excluded (constant).
    """
    lo, hi = win.lo, win.hi
    ranks = o.rank_of
    on_left = np.zeros(o.n, dtype=bool)
    on_left[:lo] = True
    on_left[lo:hi] = left_mask
    total = 0.0
    for i in range(hi - lo):
        r = lo + i
        v = int(o.vertex_at[r])
        nbr, wt = g.neighbors(v)
        nr = ranks[nbr]
        dup = (nr >= lo) & (nr < hi) & (nr < r)
        crossing = on_left[nr] != on_left[r]
        total += float(wt[crossing & ~dup].sum())
    return total


# -- per-window optimizers -----------------------------------------------


def linopt_window(g: Graph, o: Ordering, win: Window) -> int:
    """Cheapest order-respecting split in the window via one prefix scan.

    Scans candidates left to right, maintaining the crossing weight by
    subtracting edges to the left of the passed vertex and adding edges to
    its right. Ties go to the split closest to the balanced center, then to
    the smaller index. Runs in O(|V_W| + |E_W|) plus the scan sort.
    """
    lo, hi = win.lo, win.hi
    if hi <= lo:
        return lo
    ranks = o.rank_of
    c0 = 0.0
    deltas = np.empty(hi - lo, dtype=np.float64)
    for t in range(hi - lo):
        v = int(o.vertex_at[lo + t])
        nbr, wt = g.neighbors(v)
        nr = ranks[nbr]
        c0 += float(wt[nr < lo].sum())
        deltas[t] = float(wt[nr > lo + t].sum()) - float(wt[nr < lo + t].sum())
    c = np.empty(hi - lo + 1, dtype=np.float64)
    c[0] = c0
    c[1:] = c0 + np.cumsum(deltas)
    s = np.arange(lo, hi + 1)
    pick = int(np.lexsort((s, np.abs(s - win.center), c))[0])
    return lo + pick


@dataclass
class WindowCutResult:
    """Outcome of a window minimum cut: sides, internal order, new split."""

    window: Window
    left: list[int]
    right: list[int]
    order: list[int]
    split: int
    cut_value: float
    used_fallback: bool = False


def mincut_window(
    g: Graph,
    o: Ordering,
    win: Window,
    max_augmentations: int | None = None,
) -> WindowCutResult:
    """Best bipartition of the window, free to permute its vertices.

    Everything before the window contracts into the source, everything after
    into the sink; window-internal edges keep their weight in both
    directions. Among minimum cuts the canonical source-side-minimal one is
    taken (residual reachability). Vertices with no incident instance edges
    are indifferent, so they are placed to pull the split toward the
    balanced center. Both sides keep their previous relative order, which
    makes a rerun a no-op. If the flow exceeds the augmentation budget the
    order-respecting scan is used instead and the result is flagged.
    """
    lo, hi = win.lo, win.hi
    nw = hi - lo
    members = [int(v) for v in o.vertex_at[lo:hi]]
    if nw == 0:
        return WindowCutResult(win, [], [], [], lo, 0.0, False)
    if max_augmentations is None:
        max_augmentations = 1000 + 100 * nw
    ranks = o.rank_of
    local = {v: i for i, v in enumerate(members)}
    net = FlowNetwork(nw + 2)
    s, t = nw, nw + 1
    incident = np.zeros(nw, dtype=np.float64)
    for i, v in enumerate(members):
        nbr, wt = g.neighbors(v)
        nr = ranks[nbr]
        src_cap = float(wt[nr < lo].sum())
        snk_cap = float(wt[nr >= hi].sum())
        if src_cap > 0:
            net.add_edge(s, i, src_cap)
        if snk_cap > 0:
            net.add_edge(i, t, snk_cap)
        incident[i] += src_cap + snk_cap
        inside = (nr >= lo) & (nr < hi)
        for x, wx in zip(nbr[inside], wt[inside]):
            j = local[int(x)]
            incident[i] += float(wx)
            if j > i and wx > 0:
                net.add_edge(i, j, float(wx), float(wx))
    _, exceeded = net.max_flow(s, t, max_augmentations)
    if exceeded:
        split = linopt_window(g, o, win)
        left = members[: split - lo]
        right = members[split - lo :]
        value = window_crossing_weight(g, o, win, split)
        log.warning("window %d: flow budget exhausted, linear-scan fallback", win.index)
        return WindowCutResult(win, left, right, left + right, split, value, True)

    reach = net.source_side(s)[:nw]
    free = incident <= 0.0
    left_mask = reach & ~free
    # Indifferent vertices drift toward the balanced center.
    need = int(np.clip(win.center - lo - int(left_mask.sum()), 0, int(free.sum())))
    if need:
        free_idx = np.flatnonzero(free)[:need]
        left_mask[free_idx] = True
    left = [v for i, v in enumerate(members) if left_mask[i]]
    right = [v for i, v in enumerate(members) if not left_mask[i]]
    split = lo + len(left)
    value = _bipartition_crossing_weight(g, o, win, left_mask)
    return WindowCutResult(win, left, right, left + right, split, value, False)


def _frozen_local_cut(
    g: Graph,
    o: Ordering,
    win: Window,
    left_mask: np.ndarray,
    part_of: np.ndarray,
    boundary_index: int,
) -> float:
    """True cut contribution of the window's incident edges, exterior frozen.

    Window vertices join part boundary_index-1 (left) or boundary_index
    (right) per ``left_mask``; every other vertex keeps its snapshot part.
    The window objective used by the optimizers treats all edges into the
    before/after blocks as variable, but edges to parts further than the two
    adjacent ones are cut regardless; this evaluation counts those correctly
    and is what acceptance decisions compare.
    """
    lo, hi = win.lo, win.hi
    ranks = o.rank_of
    total = 0.0
    for i in range(hi - lo):
        v = int(o.vertex_at[lo + i])
        part_v = boundary_index - 1 if left_mask[i] else boundary_index
        nbr, wt = g.neighbors(v)
        nr = ranks[nbr]
        inside = (nr >= lo) & (nr < hi)
        partner = np.clip(nr - lo, 0, hi - lo - 1)
        internal_cross = inside & (nr > lo + i) & (left_mask[partner] != left_mask[i])
        external_cross = ~inside & (part_of[nbr] != part_v)
        total += float(wt[internal_cross | external_cross].sum())
    return total


def apply_window_stage(
    g: Graph,
    o: Ordering,
    splits: SplitPoints,
    method: str,
) -> tuple[Ordering, SplitPoints, list[tuple]]:
    """Run one window optimizer over every window and apply accepted results.

    Windows are disjoint, so per-window tasks run against an immutable
    snapshot (optionally in parallel; results are applied in window order
    and are independent of worker count). A window's proposal is accepted
    only if it does not increase the true local cut against the frozen
    exterior; the window objective alone can overcount edges to far-away
    parts as variable. Returns the new ordering, the new split points, and
    per-window diagnostic rows
    (window index, old local cut, new local cut, vertices moved).
    """
    if method not in ("linopt", "mincut"):
        raise ValueError(f"unknown window method {method!r}")
    windows = make_windows(g, o, splits.k, splits.alpha)
    if not windows:
        return o, splits, []

    part_of = np.empty(g.n, dtype=np.int64)
    for j in range(splits.k):
        part_of[o.vertex_at[splits.q[j] : splits.q[j + 1]]] = j

    def task(win: Window):
        if method == "linopt":
            return linopt_window(g, o, win)
        return mincut_window(g, o, win)

    if _max_workers > 1 and len(windows) > 1:
        with ThreadPoolExecutor(max_workers=_max_workers) as pool:
            results = list(pool.map(task, windows))
    else:
        results = [task(w) for w in windows]

    tol = 1e-12 * max(1.0, g.total_edge_weight)
    new_q = splits.q.copy()
    vertex_at = o.vertex_at.copy()
    diagnostics = []
    for win, res in zip(windows, results):
        old_split = int(splits.q[win.index])
        positions = np.arange(win.lo, win.hi)
        old_mask = positions < old_split
        if method == "linopt":
            new_split = res
            new_mask = positions < new_split
            new_order = None
        else:
            new_split = res.split
            left_set = set(res.left)
            new_mask = np.array(
                [int(v) in left_set for v in o.vertex_at[win.lo : win.hi]],
                dtype=bool,
            )
            new_order = res.order
        old_value = _frozen_local_cut(g, o, win, old_mask, part_of, win.index)
        new_value = _frozen_local_cut(g, o, win, new_mask, part_of, win.index)
        accepted = new_value <= old_value + tol
        moved = 0
        if accepted:
            new_q[win.index] = new_split
            if new_order:
                moved = sum(
                    1
                    for pos, v in enumerate(new_order)
                    if o.vertex_at[win.lo + pos] != v
                )
                vertex_at[win.lo : win.hi] = new_order
        diagnostics.append(
            (win.index, old_value, new_value if accepted else old_value, moved)
        )
        log.info(
            "window\t%d\told\t%.6g\tnew\t%.6g\tmoved\t%d\taccepted\t%d",
            win.index,
            old_value,
            new_value,
            moved,
            int(accepted),
        )
    new_o = Ordering.from_vertex_at(vertex_at)
    return new_o, SplitPoints(new_q, splits.alpha), diagnostics


# -- contraction and dynamic programming ---------------------------------


@dataclass
class ContractedGraph:
    """Contiguous rank blocks contracted to supernodes with merged edges.

    Intra-block edge weight is dropped: blocks are atomic, so those edges
    can never be cut. ``block_starts`` maps block index to original rank
    offset (length block_count + 1).
    """

    block_starts: np.ndarray
    block_weights: np.ndarray
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_w: np.ndarray
    total_vertex_weight: float

    @property
    def block_count(self) -> int:
        return len(self.block_weights)

    @cached_property
    def _prefix(self) -> np.ndarray:
        """S[a][b] = total superedge weight over pairs u < a, v < b (symmetric)."""
        b = self.block_count
        m = np.zeros((b, b), dtype=np.float64)
        if len(self.edge_w):
            m[self.edge_u, self.edge_v] = self.edge_w
            m[self.edge_v, self.edge_u] = self.edge_w
        s = np.zeros((b + 1, b + 1), dtype=np.float64)
        np.cumsum(m, axis=0, out=m)
        np.cumsum(m, axis=1, out=m)
        s[1:, 1:] = m
        return s

    def rect_weight(self, i1: int, i2: int, j1: int, j2: int) -> float:
        """Superedge weight between block ranges [i1, i2) x [j1, j2)."""
        s = self._prefix
        return float(s[i2, j2] - s[i1, j2] - s[i2, j1] + s[i1, j1])

    @cached_property
    def weight_prefix(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.block_weights)])


def contract_blocks(g: Graph, o: Ordering, block_count: int) -> ContractedGraph:
    """Contract near-equal contiguous rank blocks (sizes differ by <= 1)."""
    n = g.n
    if not 1 <= block_count <= n:
        raise ValueError(f"block_count must be in [1, {n}], got {block_count}")
    starts = np.array(
        [(b * n) // block_count for b in range(block_count + 1)], dtype=np.int64
    )
    block_of_rank = np.repeat(np.arange(block_count, dtype=np.int64), np.diff(starts))
    block_of_vertex = np.empty(n, dtype=np.int64)
    block_of_vertex[o.vertex_at] = block_of_rank
    block_weights = np.bincount(
        block_of_vertex, weights=g.vertex_weights, minlength=block_count
    )
    bu = block_of_vertex[g.edge_u]
    bv = block_of_vertex[g.edge_v]
    cross = bu != bv
    lo = np.minimum(bu[cross], bv[cross])
    hi = np.maximum(bu[cross], bv[cross])
    if len(lo):
        key = lo * np.int64(block_count) + hi
        uniq, inverse = np.unique(key, return_inverse=True)
        w = np.bincount(inverse, weights=g.edge_w[cross], minlength=len(uniq))
        se_u = (uniq // block_count).astype(np.int64)
        se_v = (uniq % block_count).astype(np.int64)
    else:
        se_u = se_v = np.zeros(0, dtype=np.int64)
        w = np.zeros(0, dtype=np.float64)
    return ContractedGraph(
        starts, block_weights, se_u, se_v, w, g.total_vertex_weight
    )


def crossing_cost(cg: ContractedGraph, i: int, j: int, m: int) -> float:
    """Superedge weight between block ranges [i..j] and [j+1..m], inclusive."""
    if not (0 <= i <= j < m < cg.block_count):
        raise ValueError(f"need 0 <= i <= j < m < {cg.block_count}")
    return cg.rect_weight(i, j + 1, j + 1, m + 1)


@dataclass
class DpResult:
    """Outcome of the boundary dynamic program."""

    feasible: bool
    cut_value: float
    split_ranks: np.ndarray | None  # k+1 boundaries on original ranks
    split_blocks: np.ndarray | None  # k+1 boundaries in block space
    peak_live_layers: int = 0

    def split_points(self, alpha: float) -> SplitPoints:
        if not self.feasible or self.split_ranks is None:
            raise ValueError("no feasible partition to convert")
        return SplitPoints(self.split_ranks, alpha)


def _needed_part_counts(k: int) -> list[int]:
    """The part counts reachable from k by repeated halving, ascending."""
    needed = set()
    frontier = {k}
    while frontier:
        q = frontier.pop()
        if q in needed:
            continue
        needed.add(q)
        if q > 1:
            frontier.add(q // 2)
            frontier.add((q + 1) // 2)
    return sorted(needed)


def dp_base_layer(
    cg: ContractedGraph, k: int, alpha: float, allow_empty_parts: bool = False
) -> np.ndarray:
    """A[i][e] for one part over block range [i, e): 0 if feasible else +inf.

    Feasible means the range weight is at most (1+alpha)*w(V)/k, and, unless
    empty parts are allowed, at least (1-alpha)*w(V)/k.
    """
    b = cg.block_count
    target = cg.total_vertex_weight / k
    tol = _REL_TOL * max(1.0, target)
    hi_bound = (1.0 + alpha) * target + tol
    lo_bound = -np.inf if allow_empty_parts else (1.0 - alpha) * target - tol
    wp = cg.weight_prefix
    rangew = wp[None, :] - wp[:, None]  # weight of [i, e); negative if e < i
    layer = np.where(
        (rangew >= lo_bound) & (rangew <= hi_bound), 0.0, np.inf
    )
    layer[np.arange(b + 1)[:, None] > np.arange(b + 1)[None, :]] = np.inf
    return layer


def dp_partition(
    cg: ContractedGraph,
    k: int,
    alpha: float,
    allow_empty_parts: bool = False,
) -> DpResult:
    """Optimal alpha-balanced contiguous k-partition of the supernode line.

    Computes the halved recursion A[i][e][q] = min over mid of
    A[i][mid][floor(q/2)] + A[mid][e][ceil(q/2)] + crossing(i, mid, e),
    touching only part counts reachable from k by halving, with no more
    than three value layers alive at once. By default every part must also
    meet the lower balance bound (so exactly k nonempty parts come out);
    ``allow_empty_parts`` switches to the upper-bound-only rule where empty
    parts are legal.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    b = cg.block_count
    counts = _needed_part_counts(k)
    refs: dict[int, int] = {q: 0 for q in counts}
    for q in counts:
        if q > 1:
            refs[q // 2] += 1
            if (q + 1) // 2 != q // 2:
                refs[(q + 1) // 2] += 1

    s = cg._prefix
    # intra[i][e]: edge weight wholly inside [i, e) = (S[e,e] - 2 S[i,e] + S[i,i]) / 2
    diag = s.diagonal()
    intra = (diag[None, :] - 2 * s + diag[:, None]) / 2.0
    intra[np.arange(b + 1)[:, None] > np.arange(b + 1)[None, :]] = 0.0

    layers: dict[int, np.ndarray] = {}
    backptr: dict[int, np.ndarray] = {}
    layers[1] = dp_base_layer(cg, k, alpha, allow_empty_parts)
    peak = 1
    for q in counts:
        if q == 1:
            continue
        a, c = q // 2, (q + 1) // 2
        da = layers[a] - intra  # inf stays inf
        dc = layers[c] - intra
        val = np.full((b + 1, b + 1), np.inf)
        bp = np.zeros((b + 1, b + 1), dtype=np.int32)
        buf = np.empty((b + 1, b + 1), dtype=np.float64)
        for i in range(b + 1):
            np.add(da[i][:, None], dc, out=buf)
            mid = np.argmin(buf, axis=0)
            cols = np.arange(b + 1)
            val[i] = buf[mid, cols] + intra[i]
            bp[i] = mid
        layers[q] = val
        backptr[q] = bp
        peak = max(peak, len(layers))
        for child in {a, c}:
            refs[child] -= 1
            if refs[child] == 0 and child != k:
                del layers[child]

    answer = float(layers[k][0, b])
    if not np.isfinite(answer):
        return DpResult(False, np.inf, None, None, peak)

    boundaries: list[int] = []

    def recover(i: int, e: int, q: int) -> None:
        if q == 1:
            return
        mid = int(backptr[q][i, e])
        recover(i, mid, q // 2)
        boundaries.append(mid)
        recover(mid, e, (q + 1) // 2)

    recover(0, b, k)
    split_blocks = np.array([0] + boundaries + [b], dtype=np.int64)
    split_ranks = cg.block_starts[split_blocks]
    return DpResult(True, answer, split_ranks, split_blocks, peak)
