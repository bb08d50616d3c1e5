"""Scaling sweep: total update counts against n * ln(n) at fixed degree.

Writes a per-size CSV and prints the least-squares fit through the origin.
"""

import argparse
import math
import sys

import numpy as np

from cftp_colorings import engine
from cftp_colorings.graphs import gen_random_regular


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delta", type=int, default=8)
    ap.add_argument("--sizes", default="100,200,400,800,1600")
    ap.add_argument("--runs", type=int, default=5)
    ap.add_argument("--q", type=int, default=None)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    q = args.q or math.ceil(engine.regime_threshold(args.delta)) + 1
    sizes = [int(x) for x in args.sizes.split(",")]
    print(f"# delta={args.delta} q={q} runs={args.runs} seed={args.seed}")
    print("n,mean_updates,mean_blocks,mean_wall_ms")
    xs, ys = [], []
    for n in sizes:
        g = gen_random_regular(n, args.delta, seed=args.seed)
        stats = [
            engine.sample(g, engine.SamplerConfig(q=q, master_seed=args.seed + 100 * i))
            for i in range(args.runs)
        ]
        mean_updates = sum(r.updates for r in stats) / args.runs
        mean_blocks = sum(r.blocks_used for r in stats) / args.runs
        mean_wall = sum(r.wall_ms for r in stats) / args.runs
        print(f"{n},{mean_updates:.1f},{mean_blocks:.2f},{mean_wall:.1f}")
        xs.append(n * math.log(n))
        ys.append(mean_updates)
    x, y = np.array(xs), np.array(ys)
    c = float((x * y).sum() / (x * x).sum())
    r2 = 1.0 - float(((y - c * x) ** 2).sum()) / float(((y - y.mean()) ** 2).sum())
    print(f"# fit: updates ~ {c:.2f} * n * ln(n), R^2 = {r2:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
