#!/usr/bin/env python3
"""Run every reference check and write a JSON report next to the table."""

import argparse
import json
import sys
import time

from wkcech.cech import DEFAULT_POLICY
from wkcech.series import TruncationPolicy
from wkcech.suite import run_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="suite_report.json")
    ap.add_argument("--u-deg", type=int, default=DEFAULT_POLICY.u_deg_max)
    ap.add_argument("--only", help="comma separated check numbers")
    args = ap.parse_args()

    policy = TruncationPolicy(args.u_deg, DEFAULT_POLICY.z_min, DEFAULT_POLICY.z_max)
    only = set(args.only.split(",")) if args.only else None
    t0 = time.perf_counter()
    results = run_suite(policy, only)
    elapsed = time.perf_counter() - t0

    for r in results:
        print(f"{r.status:<9} {r.name:<28} {r.computed}")
    with open(args.out, "w") as fh:
        json.dump({"policy": policy.as_dict(), "checks": [r.to_json() for r in results]}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    failed = sum(r.status == "fail" for r in results)
    print(f"{len(results)} rows, {failed} failed, {elapsed:.1f}s -> {args.out}")
    return 3 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
