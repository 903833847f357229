#!/usr/bin/env python3
"""Scaling experiment: end-to-end pipeline runtime over growing RMAT graphs.

Times the full combine run (similarity, affinity embedding, refinement,
boundary optimization) at several edge scales and part counts, then reports
the log-log slope of runtime versus edge count.

    python3 scripts/rmat_scaling.py --scales 16,18,20 --parts 2,256
"""

import argparse
import math
import sys
import time

from linepart.pipeline import PipelineConfig, combine
from linepart.synth import rmat


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scales", default="16,18,20",
                    help="log2 of the arc counts to sample (default 16,18,20)")
    ap.add_argument("--parts", default="2",
                    help="comma-separated k values (default 2)")
    ap.add_argument("--alpha", type=float, default=0.03)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--avg-degree", type=int, default=16,
                    help="vertex count is arcs / avg-degree (default 16)")
    args = ap.parse_args()

    scales = [int(s) for s in args.scales.split(",")]
    parts = [int(k) for k in args.parts.split(",")]
    print("scale\tk\tvertices\tedges\tseconds\tinit_cut\tfinal_cut")
    by_k: dict[int, list[tuple[int, float]]] = {k: [] for k in parts}
    for scale in scales:
        arcs = 1 << scale
        vertex_scale = scale - int(math.log2(args.avg_degree))
        g = rmat(vertex_scale, arcs, seed=args.seed)
        for k in parts:
            cfg = PipelineConfig(k=k, alpha=args.alpha, seed=0,
                                 max_outer_iters=2, minla_max_rounds=8)
            t0 = time.perf_counter()
            report = combine(g, cfg)
            elapsed = time.perf_counter() - t0
            by_k[k].append((g.edge_count, elapsed))
            print(f"{scale}\t{k}\t{g.n}\t{g.edge_count}\t{elapsed:.2f}"
                  f"\t{report.initial_cut_fraction:.4f}"
                  f"\t{report.final_cut_fraction:.4f}")
    for k, rows in by_k.items():
        if len(rows) >= 2:
            slope = (math.log(rows[-1][1]) - math.log(rows[0][1])) / (
                math.log(rows[-1][0]) - math.log(rows[0][0])
            )
            print(f"# k={k}: log-log runtime slope {slope:.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
