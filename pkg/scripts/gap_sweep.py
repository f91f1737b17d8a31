"""Sweep the generic-task fraction and report mean heuristic/optimal gaps.

    python3 scripts/gap_sweep.py --seeds 40
"""

import argparse

import numpy as np

from htap.allocators import cycle_split, hetero_minmax_split, naive_allocation
from htap.instance import generate_euclidean
from htap.oracle import exact_minmax


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=40)
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--m", type=int, default=2)
    args = ap.parse_args()

    print(f"{'gf':>5} {'naive':>8} {'cyclesplit':>11} {'heterominmax':>13}")
    for gf in (0.0, 0.25, 0.5, 0.75, 1.0):
        rows = []
        for seed in range(args.seeds):
            inst = generate_euclidean(seed, args.n, args.k, args.m, gf)
            opt = exact_minmax(inst).minmax
            if opt <= 0:
                continue
            rows.append([naive_allocation(inst).minmax / opt, cycle_split(inst).minmax / opt,
                         hetero_minmax_split(inst)[0].minmax / opt])
        mean = np.mean(rows, axis=0)
        print(f"{gf:5.2f} {mean[0]:8.3f} {mean[1]:11.3f} {mean[2]:13.3f}")


if __name__ == "__main__":
    main()
