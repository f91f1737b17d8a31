"""Print the min-max value of every algorithm on the four illustrative instances.

    python3 scripts/example_layouts.py [--d 4 --dprime 3 --k 5]
"""

import argparse

from htap.allocators import cycle_split, hetero_minmax_split, naive_allocation
from htap.instance import generate_example
from htap.oracle import exact_minmax


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=float, default=4.0)
    ap.add_argument("--dprime", type=float, default=3.0)
    ap.add_argument("--k", type=int, default=5, help="agents in the star example")
    args = ap.parse_args()

    print(f"{'instance':>18} {'naive':>8} {'cyclesplit':>11} {'heterominmax':>13} {'exact':>8}")
    for which in (1, 2, 3, 4):
        inst = generate_example(which, d=args.d, d_prime=args.dprime, k=args.k)
        try:
            exact = f"{exact_minmax(inst).minmax:8.4g}"
        except ValueError:
            exact = f"{'-':>8}"
        print(f"{inst.name:>18} {naive_allocation(inst).minmax:8.4g} "
              f"{cycle_split(inst).minmax:11.4g} {hetero_minmax_split(inst)[0].minmax:13.4g} {exact}")


if __name__ == "__main__":
    main()
