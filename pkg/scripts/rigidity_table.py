#!/usr/bin/env python3
"""Tangent H^1 growth for W_{k1,k2} over a grid of (k1, k2)."""

import argparse

from wkcech.deform import classify_rigidity
from wkcech.series import TruncationPolicy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k1", type=int, nargs=2, default=(0, 3), metavar=("LO", "HI"))
    ap.add_argument("--k2", type=int, nargs=2, default=(-1, 2), metavar=("LO", "HI"))
    ap.add_argument("--u-deg", type=int, default=5)
    args = ap.parse_args()

    policy = TruncationPolicy(args.u_deg, -12, 12)
    print(f"{'k1':>3} {'k2':>3}  {'kind':<16} counts")
    for k1 in range(args.k1[0], args.k1[1] + 1):
        for k2 in range(args.k2[0], args.k2[1] + 1):
            rep = classify_rigidity(k1, k2, policy)
            counts = " ".join(f"{d}:{n}" for d, n in sorted(rep.counts.items()))
            print(f"{k1:>3} {k2:>3}  {rep.label():<16} {counts}")


if __name__ == "__main__":
    main()
