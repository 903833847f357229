#!/usr/bin/env python3
"""Emit a synthetic RMAT edge list for use with the linepart CLI.

    python3 scripts/make_rmat.py --scale 14 --edges 262144 -o rmat14.tsv
"""

import argparse
import sys

from linepart.io import write_graph
from linepart.synth import rmat


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scale", type=int, required=True,
                    help="log2 of the vertex count")
    ap.add_argument("--edges", type=int, required=True,
                    help="number of arcs to sample (merged edge count is lower)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("-o", "--output", required=True)
    args = ap.parse_args()
    g = rmat(args.scale, args.edges, seed=args.seed)
    write_graph(g, args.output)
    print(f"wrote {g.edge_count} edges on {g.n} vertices to {args.output}",
          file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
