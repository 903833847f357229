"""Semilocal order improvement: weighted-median iteration and rank swaps.

The median iteration drives the weighted linear-arrangement objective
sum |rank(u) - rank(v)| * w(u,v): every vertex proposes the weighted median
of its neighbors' ranks, then a global sort resolves collisions. Proposals
are simultaneous, so a single round may overshoot; the driver keeps the best
ordering seen and stops on convergence, round cap, or a detected
oscillation.

Rank swaps improve the cut of the k-way chop directly: partitions are paired
along the line, each partition is sliced into intervals, paired intervals
exchange their best-improving vertex pairs until no swap helps. Swaps are
one-for-one, so part sizes never change.
"""

from __future__ import annotations

import hashlib
import heapq
import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .boundary import SplitPoints
from .graph import Graph
from .ordering import Ordering

__all__ = [
    "MinLAState",
    "SwapPlan",
    "minla_objective",
    "minla_round",
    "minla_refine",
    "make_swap_plan",
    "rank_swap_round",
]

log = logging.getLogger(__name__)

_OSCILLATION_MEMORY = 4


def minla_objective(g: Graph, o: Ordering) -> float:
    """sum over edges of |rank(u) - rank(v)| * w(u, v)."""
    r = o.rank_of
    return float((np.abs(r[g.edge_u] - r[g.edge_v]) * g.edge_w).sum())


def minla_round(g: Graph, o: Ordering) -> Ordering:
    """One propose-and-resort round.

    Every vertex independently proposes the weighted median of its
    neighbors' current ranks (the smallest rank where the cumulative weight
    reaches half the total); isolated vertices keep their rank. Final ranks
    come from sorting by (proposed rank, current rank, id).
    """
    n = g.n
    ranks = o.rank_of
    deg = np.diff(g.adj_indptr)
    proposed = ranks.astype(np.float64).copy()
    if g.edge_count:
        src = np.repeat(np.arange(n), deg)
        nbr_rank = ranks[g.adj_indices]
        order = np.lexsort((nbr_rank, src))
        r_sorted = nbr_rank[order].astype(np.float64)
        w_sorted = g.adj_weights[order]
        cw = np.cumsum(w_sorted)
        starts = g.adj_indptr[:-1]
        seg_prefix = np.concatenate([[0.0], cw])[starts]
        within = cw - np.repeat(seg_prefix, deg)
        seg_total = np.concatenate([[0.0], cw])[g.adj_indptr[1:]] - seg_prefix
        half = np.repeat(seg_total / 2.0, deg)
        idx = np.arange(len(cw))
        cand = np.where(within >= half, idx, len(cw))
        nonempty = deg > 0
        first = np.minimum.reduceat(cand, starts[nonempty])
        proposed[nonempty] = r_sorted[first]
    final = np.lexsort((np.arange(n), ranks, proposed))
    return Ordering.from_vertex_at(final)


@dataclass
class MinLAState:
    """Result of the median iteration: best ordering, objective, rounds run."""

    ordering: Ordering
    objective: float
    round: int
    trace: list[float] = field(default_factory=list)


def _perm_digest(o: Ordering) -> bytes:
    return hashlib.blake2b(o.vertex_at.tobytes(), digest_size=16).digest()


def minla_refine(
    g: Graph,
    o: Ordering,
    max_rounds: int,
    epsilon: float = 0.0,
) -> MinLAState:
    """Iterate minla_round until convergence, cap, or oscillation.

    Stops when the permutation is unchanged, when the objective's relative
    improvement drops below epsilon, when a permutation from the last few
    rounds recurs (the simultaneous proposals can cycle), or at max_rounds.
    Returns the best ordering seen, which is never worse than the input.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    current = o
    obj = minla_objective(g, current)
    trace = [obj]
    best, best_obj = current, obj
    seen: deque[bytes] = deque([_perm_digest(current)], maxlen=_OSCILLATION_MEMORY)
    rounds = 0
    for _ in range(max_rounds):
        nxt = minla_round(g, current)
        rounds += 1
        new_obj = minla_objective(g, nxt)
        trace.append(new_obj)
        log.info("minla\tround\t%d\tobjective\t%.6g", rounds, new_obj)
        if new_obj < best_obj:
            best, best_obj = nxt, new_obj
        if np.array_equal(nxt.vertex_at, current.vertex_at):
            current = nxt
            break
        improvement = (obj - new_obj) / obj if obj > 0 else 0.0
        digest = _perm_digest(nxt)
        oscillating = digest in seen
        seen.append(digest)
        current, obj = nxt, new_obj
        if improvement < epsilon or oscillating:
            break
    return MinLAState(best, best_obj, rounds, trace)


@dataclass
class SwapPlan:
    """Pairing of partitions and of their intervals for one swap round.

    ``interval_pairs`` holds ((part_a, interval_i), (part_b, interval_j));
    concrete rank ranges are resolved against the split points at execution
    time. Each partition appears in at most one pair per round.
    """

    k: int
    r: int
    partition_pairs: list[tuple[int, int]]
    interval_pairs: list[tuple[tuple[int, int], tuple[int, int]]]
    seed: int


def make_swap_plan(k: int, r: int, round_index: int, seed: int) -> SwapPlan:
    """Pair adjacent partitions, alternating phase by round parity.

    Even rounds pair (0,1), (2,3), ...; odd rounds pair (1,2), (3,4), ...,
    so every adjacent boundary is visited over two rounds. Intervals between
    paired partitions are matched uniformly at random by the seed.
    """
    if k < 2:
        raise ValueError("need at least two partitions to swap")
    if r < 1:
        raise ValueError("interval count must be positive")
    start = 0 if round_index % 2 == 0 else 1
    partition_pairs = [(a, a + 1) for a in range(start, k - 1, 2)]
    interval_pairs = []
    for a, b in partition_pairs:
        rng = np.random.default_rng([abs(int(seed)), int(round_index), a, b])
        perm = rng.permutation(r)
        for i in range(r):
            interval_pairs.append(((a, i), (b, int(perm[i]))))
    return SwapPlan(k, r, partition_pairs, interval_pairs, seed)


def _interval_range(q: np.ndarray, part: int, idx: int, r: int) -> tuple[int, int]:
    lo, hi = int(q[part]), int(q[part + 1])
    size = hi - lo
    return lo + (idx * size) // r, lo + ((idx + 1) * size) // r


class _SwapState:
    """Mutable ordering/partition view shared by the interval-pair passes.

    ``red[v]`` holds the live cut reduction of moving v to its paired part:
    weight to the paired part minus weight to its own part. It is seeded by
    one vectorized edge pass per round and maintained incrementally, so
    later interval pairs of the same partition pair see the true state.
    """

    def __init__(self, g: Graph, o: Ordering, splits: SplitPoints, plan: SwapPlan):
        self.g = g
        self.vertex_at = o.vertex_at.copy()
        self.rank_of = o.rank_of.copy()
        q = splits.q
        self.part_of = np.empty(g.n, dtype=np.int64)
        for j in range(splits.k):
            self.part_of[self.vertex_at[q[j] : q[j + 1]]] = j
        self.part_weights = np.bincount(
            self.part_of, weights=g.vertex_weights, minlength=splits.k
        )
        self.target = g.total_vertex_weight / splits.k
        tol = 1e-9 * max(1.0, self.target)
        self.lo_bound = (1.0 - splits.alpha) * self.target - tol
        self.hi_bound = (1.0 + splits.alpha) * self.target + tol
        scale = float(g.edge_w.max()) if g.edge_count else 1.0
        self.gain_tol = 1e-12 * max(1.0, scale)
        self.swaps = 0
        self.red = self._initial_reductions(plan)

    def _initial_reductions(self, plan: SwapPlan) -> np.ndarray:
        g = self.g
        paired = np.full(plan.k, -1, dtype=np.int64)
        for a, b in plan.partition_pairs:
            paired[a], paired[b] = b, a
        pu = self.part_of[g.edge_u]
        pv = self.part_of[g.edge_v]
        same = pu == pv
        to_paired = paired[pu] == pv  # symmetric: pairing is an involution
        idx = np.concatenate([g.edge_u[same], g.edge_v[same],
                              g.edge_u[to_paired], g.edge_v[to_paired]])
        deltas = np.concatenate([-g.edge_w[same], -g.edge_w[same],
                                 g.edge_w[to_paired], g.edge_w[to_paired]])
        return np.bincount(idx, weights=deltas, minlength=g.n)

    def reduction(self, v: int, other_part: int) -> float:
        """Cut change (positive = improvement) of moving v to other_part."""
        nbr, wt = self.g.neighbors(v)
        parts = self.part_of[nbr]
        own = float(wt[parts == self.part_of[v]].sum())
        other = float(wt[parts == other_part].sum())
        return other - own

    def shift_neighbor_reductions(
        self, moved: int, from_part: int, to_part: int
    ) -> np.ndarray:
        """Account for ``moved`` leaving from_part: neighbors still in
        from_part gain 2w, neighbors in to_part lose 2w. Returns the
        vertices whose reduction changed."""
        nbr, wt = self.g.neighbors(moved)
        parts = self.part_of[nbr]
        delta = np.where(
            parts == from_part, 2.0 * wt, np.where(parts == to_part, -2.0 * wt, 0.0)
        )
        mask = delta != 0.0
        touched = nbr[mask]
        self.red[touched] += delta[mask]  # neighbor lists have no duplicates
        return touched

    def weight_feasible(self, u: int, v: int) -> bool:
        """Would swapping u and v keep (or not worsen) the alpha bound?"""
        wu = self.g.vertex_weights[u]
        wv = self.g.vertex_weights[v]
        if wu == wv:
            return True
        pa, pb = int(self.part_of[u]), int(self.part_of[v])
        delta = wv - wu
        for part, neww in ((pa, self.part_weights[pa] + delta),
                           (pb, self.part_weights[pb] - delta)):
            if self.lo_bound <= neww <= self.hi_bound:
                continue
            if abs(neww - self.target) > abs(self.part_weights[part] - self.target):
                return False
        return True

    def apply_swap(self, u: int, v: int) -> None:
        ru, rv = int(self.rank_of[u]), int(self.rank_of[v])
        self.rank_of[u], self.rank_of[v] = rv, ru
        self.vertex_at[ru], self.vertex_at[rv] = v, u
        pa, pb = int(self.part_of[u]), int(self.part_of[v])
        self.part_of[u], self.part_of[v] = pb, pa
        delta = self.g.vertex_weights[v] - self.g.vertex_weights[u]
        self.part_weights[pa] += delta
        self.part_weights[pb] -= delta
        self.swaps += 1


def _edge_weight_between(g: Graph, u: int, v: int) -> float:
    nbr, wt = g.neighbors(u)
    pos = int(np.searchsorted(nbr, v))
    if pos < len(nbr) and nbr[pos] == v:
        return float(wt[pos])
    return 0.0


def _swap_interval_pair(
    state: _SwapState,
    range_a: tuple[int, int],
    range_b: tuple[int, int],
    part_a: int,
    part_b: int,
) -> int:
    """Local optimum between two intervals via best-partner swaps.

    Repeatedly walks the first interval's candidates in descending order of
    individual cut reduction; the first candidate with an improving,
    weight-feasible partner in the other interval is swapped (combined gain
    r(u) + r(v) - 2 w(u,v) must be strictly positive). Reductions of the
    swapped vertices and their in-play neighbors are updated incrementally.
    """
    g = state.g
    red = state.red
    if range_a[0] >= range_a[1] or range_b[0] >= range_b[1]:
        return 0
    tol = state.gain_tol
    # gain <= max r(u) + max r(v): skip the whole pair when nothing can help
    if (
        red[state.vertex_at[range_a[0] : range_a[1]]].max()
        + red[state.vertex_at[range_b[0] : range_b[1]]].max()
        <= tol
    ):
        return 0
    members_a = [int(v) for v in state.vertex_at[range_a[0] : range_a[1]]]
    members_b = [int(v) for v in state.vertex_at[range_b[0] : range_b[1]]]
    side = {v: 0 for v in members_a}
    side.update({v: 1 for v in members_b})
    # Lazy max-heaps keyed by (-reduction, id); entries go stale when a
    # vertex's reduction changes or it switches sides.
    heap_a = [(-red[v], v) for v in members_a]
    heap_b = [(-red[v], v) for v in members_b]
    heapq.heapify(heap_a)
    heapq.heapify(heap_b)
    heaps = (heap_a, heap_b)

    def pop_valid(which: int):
        heap = heaps[which]
        while heap:
            negr, v = heapq.heappop(heap)
            if side.get(v) == which and -negr == red[v]:
                return -negr, v
        return None

    def push_fresh(v: int) -> None:
        which = side.get(v)
        if which is not None:
            heapq.heappush(heaps[which], (-red[v], v))

    # Strictly improving swaps over a finite configuration space terminate;
    # the cap is a float-drift safety net only.
    cap = 1000 + 50 * (len(members_a) + len(members_b))
    swaps = 0
    while swaps < cap:
        chosen = None
        stash_a = []
        while True:
            got = pop_valid(0)
            if got is None:
                break
            ru, u = got
            stash_a.append(got)
            peek = pop_valid(1)
            if peek is None:
                break
            heapq.heappush(heap_b, (-peek[0], peek[1]))
            if ru + peek[0] <= tol:
                break
            best_gain, best_v = tol, None
            stash_b = []
            while True:
                got_b = pop_valid(1)
                if got_b is None:
                    break
                rv, v = got_b
                stash_b.append(got_b)
                if ru + rv <= best_gain:
                    break
                gain = ru + rv - 2.0 * _edge_weight_between(g, u, v)
                if gain > best_gain and state.weight_feasible(u, v):
                    best_gain, best_v = gain, v
            for rv, v in stash_b:
                heapq.heappush(heap_b, (-rv, v))
            if best_v is not None:
                chosen = (u, best_v)
                break
        for ru, u in stash_a:
            heapq.heappush(heap_a, (-ru, u))
        if chosen is None:
            break
        u, v = chosen
        # u leaves part_a (+2w for its part_a neighbors, -2w for part_b
        # ones), v leaves part_b symmetrically; the movers get fresh values.
        touched = state.shift_neighbor_reductions(u, part_a, part_b)
        touched2 = state.shift_neighbor_reductions(v, part_b, part_a)
        state.apply_swap(u, v)
        side[u], side[v] = 1, 0
        red[v] = state.reduction(v, part_b)
        red[u] = state.reduction(u, part_a)
        for x in touched:
            if x != u and x != v:
                push_fresh(int(x))
        for x in touched2:
            if x != u and x != v:
                push_fresh(int(x))
        push_fresh(u)
        push_fresh(v)
        swaps += 1
    if swaps >= cap:
        log.warning("interval pair hit swap cap (%d); float drift suspected", cap)
    return swaps


def rank_swap_round(
    g: Graph, o: Ordering, splits: SplitPoints, plan: SwapPlan
) -> Ordering:
    """Execute one planned round of interval-paired swaps.

    Partition pairs are fully independent (a vertex's reduction only reads
    the two parts it could belong to); interval pairs within a partition
    pair run in a fixed order against live state, so the true cut weight
    never increases. Vertex counts per part are untouched; a swap that would
    worsen a part's weight deviation beyond the alpha bound is rejected.
    """
    if plan.k != splits.k:
        raise ValueError(
            f"plan is for k={plan.k}, split points have k={splits.k}"
        )
    if splits.n != g.n or o.n != g.n:
        raise ValueError("ordering/split points do not cover the graph")
    state = _SwapState(g, o, splits, plan)
    q = splits.q
    for (pa, ia), (pb, ib) in plan.interval_pairs:
        ra = _interval_range(q, pa, ia, plan.r)
        rb = _interval_range(q, pb, ib, plan.r)
        _swap_interval_pair(state, ra, rb, pa, pb)
    log.info("rankswap\tswaps\t%d", state.swaps)
    return Ordering(state.vertex_at, state.rank_of)
