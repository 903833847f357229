"""Driver that combines embedding, refinement, and boundary optimization.

One run weights the graph for affinity, embeds the vertices on a line, sets
fully balanced split points, then repeats the configured stage list until a
full pass changes neither the ordering nor the splits (or the iteration cap
is hit). The metric stage optimizes the linear-arrangement objective and is
allowed to move the cut either way; every other stage never increases it.
The driver keeps the best pass-end state, so the emitted partition never
cuts more than the initial balanced chop.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import refine
from .boundary import SplitPoints, apply_window_stage, contract_blocks, dp_partition, make_split_points
from .graph import Graph, Partition, check_balance, common_neighbors_similarity, cut_weight
from .ordering import Ordering, affinity_ordering, hilbert_ordering, random_ordering

__all__ = [
    "PipelineConfig",
    "StageRecord",
    "PipelineReport",
    "combine",
    "run_stage",
    "STAGES",
    "INITIAL_ORDERINGS",
]

log = logging.getLogger(__name__)

STAGES = ("metric", "swap", "linopt", "mincut", "dp")
INITIAL_ORDERINGS = ("random", "hilbert", "affinity")

DEFAULT_DP_BLOCKS = 1000


@dataclass(frozen=True)
class PipelineConfig:
    k: int
    alpha: float
    initial_ordering: str = "affinity"
    stages: tuple[str, ...] = ("metric", "swap", "mincut")
    max_outer_iters: int = 10
    seed: int = 0
    swap_intervals: int = 8  # intervals per partition in a swap round
    dp_blocks: int | None = None  # None -> min(n, DEFAULT_DP_BLOCKS)
    minla_max_rounds: int = 10
    curve_order: int = 16

    def validate(self, g: Graph) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.k > g.n:
            raise ValueError(f"cannot split {g.n} vertices into {self.k} parts")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.initial_ordering not in INITIAL_ORDERINGS:
            raise ValueError(f"unknown initial ordering {self.initial_ordering!r}")
        if not self.stages:
            raise ValueError("stage list must not be empty")
        for s in self.stages:
            if s not in STAGES:
                raise ValueError(f"unknown stage {s!r}")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be at least 1")
        if self.swap_intervals < 1:
            raise ValueError("swap interval count must be positive")


@dataclass
class StageRecord:
    iteration: int
    stage: str
    cut_weight: float
    cut_fraction: float
    balanced: bool
    changed: bool
    note: str = ""

    def row(self) -> str:
        return (
            f"{self.iteration}\t{self.stage}\t{self.cut_weight:.6g}"
            f"\t{self.cut_fraction:.4f}\t{int(self.balanced)}"
            f"\t{int(self.changed)}\t{self.note}"
        )


@dataclass
class PipelineReport:
    records: list[StageRecord]
    partition: Partition
    ordering: Ordering
    splits: SplitPoints
    converged: bool
    iterations: int
    initial_cut_fraction: float
    final_cut_fraction: float
    warnings: list[str] = field(default_factory=list)


def _state_cut(g: Graph, o: Ordering, s: SplitPoints) -> tuple[float, float, Partition]:
    part = Partition.from_contiguous(o, s, g)
    w, f = cut_weight(g, part)
    return w, f, part


def _run_stage(
    stage: str,
    g: Graph,
    o: Ordering,
    s: SplitPoints,
    cfg: PipelineConfig,
    iteration: int,
) -> tuple[Ordering, SplitPoints, str]:
    note = ""
    if stage == "metric":
        st = refine.minla_refine(g, o, cfg.minla_max_rounds)
        if not np.array_equal(st.ordering.vertex_at, o.vertex_at):
            o = st.ordering
            # reordering invalidates previous boundary choices
            s = make_split_points(g, o, s.k, s.alpha)
    elif stage == "swap":
        if s.k >= 2:
            for parity in (0, 1):
                plan = refine.make_swap_plan(
                    s.k, cfg.swap_intervals, 2 * iteration + parity, cfg.seed
                )
                o = refine.rank_swap_round(g, o, s, plan)
    elif stage in ("linopt", "mincut"):
        # Per-window acceptance handles the window objective's bias toward
        # far-away parts; interactions between simultaneously moved windows
        # can still in principle raise the cut, so gate the whole stage too.
        before, _, _ = _state_cut(g, o, s)
        o2, s2, _diag = apply_window_stage(g, o, s, stage)
        after, _, _ = _state_cut(g, o2, s2)
        if after <= before * (1 + 1e-12) + 1e-12:
            o, s = o2, s2
        else:
            note = f"{stage} stage rejected: combined window moves raise the cut"
            log.warning(note)
    elif stage == "dp":
        blocks = cfg.dp_blocks or min(g.n, DEFAULT_DP_BLOCKS)
        cg = contract_blocks(g, o, blocks)
        res = dp_partition(cg, s.k, s.alpha)
        if not res.feasible:
            note = "dp stage skipped: no alpha-balanced contiguous partition"
            log.warning(note)
        else:
            candidate = res.split_points(s.alpha)
            before, _, _ = _state_cut(g, o, s)
            after, _, _ = _state_cut(g, o, candidate)
            if after <= before * (1 + 1e-12) + 1e-12:
                s = candidate
            else:
                note = "dp stage rejected: candidate splits would raise the cut"
                log.warning(note)
    else:
        raise ValueError(f"unknown stage {stage!r}")
    return o, s, note


def run_stage(
    stage: str,
    g: Graph,
    o: Ordering,
    s: SplitPoints,
    cfg: PipelineConfig | None = None,
    iteration: int = 0,
) -> tuple[Ordering, SplitPoints]:
    """Apply one named stage to (ordering, splits)."""
    if cfg is None:
        cfg = PipelineConfig(k=s.k, alpha=s.alpha)
    o2, s2, _ = _run_stage(stage, g, o, s, cfg, iteration)
    return o2, s2


def _initial_ordering(g: Graph, cfg: PipelineConfig) -> Ordering:
    if cfg.initial_ordering == "random":
        return random_ordering(g, cfg.seed)
    if cfg.initial_ordering == "hilbert":
        return hilbert_ordering(g, cfg.curve_order)
    sim = common_neighbors_similarity(g)
    ordering, _hierarchy = affinity_ordering(sim)
    return ordering


def combine(g: Graph, cfg: PipelineConfig) -> PipelineReport:
    """Full pipeline: similarity, embedding, balanced splits, stage loop.

    Deterministic given (graph bytes, config, seed). The final state is the
    best cut among the initial chop and every pass-end state, so the
    reported cut never exceeds the initial ordering's balanced chop.
    """
    cfg.validate(g)
    ordering = _initial_ordering(g, cfg)
    splits = make_split_points(g, ordering, cfg.k, cfg.alpha)

    records: list[StageRecord] = []
    warnings: list[str] = []
    w0, f0, part0 = _state_cut(g, ordering, splits)
    bal0 = check_balance(g, part0, cfg.alpha).balanced
    records.append(StageRecord(0, "init", w0, f0, bal0, True))
    log.info("combine\t%s", records[-1].row())

    best_cut = w0
    best_state = (ordering.copy(), splits.copy())
    converged = False
    iterations = 0
    for it in range(1, cfg.max_outer_iters + 1):
        iterations = it
        pass_start = (ordering.vertex_at.copy(), splits.q.copy())
        for stage in cfg.stages:
            o2, s2, note = _run_stage(stage, g, ordering, splits, cfg, it)
            changed = not (
                np.array_equal(o2.vertex_at, ordering.vertex_at)
                and np.array_equal(s2.q, splits.q)
            )
            ordering, splits = o2, s2
            cw, cf, part = _state_cut(g, ordering, splits)
            bal = check_balance(g, part, cfg.alpha).balanced
            records.append(StageRecord(it, stage, cw, cf, bal, changed, note))
            if note:
                warnings.append(note)
            log.info("combine\t%s", records[-1].row())
        cw, _, _ = _state_cut(g, ordering, splits)
        if cw < best_cut:
            best_cut = cw
            best_state = (ordering.copy(), splits.copy())
        if np.array_equal(pass_start[0], ordering.vertex_at) and np.array_equal(
            pass_start[1], splits.q
        ):
            converged = True
            break

    final_cut, _, _ = _state_cut(g, ordering, splits)
    if final_cut > best_cut:
        ordering, splits = best_state
        warnings.append("final state replaced by best intermediate state")
        log.info("combine\treverted to best intermediate state")

    _, final_f, partition = _state_cut(g, ordering, splits)
    return PipelineReport(
        records=records,
        partition=partition,
        ordering=ordering,
        splits=splits,
        converged=converged,
        iterations=iterations,
        initial_cut_fraction=f0,
        final_cut_fraction=final_f,
        warnings=warnings,
    )
