#!/usr/bin/env python3
"""Scan distillation thresholds across interferometer sizes.

Example:
    python3 scripts/threshold_scan.py --family fourier --n-min 3 --n-max 8
"""
import argparse
import sys

from photondistill.distill import (
    NoThresholdError,
    distillation_threshold,
    parse_model,
    rate_polynomials,
)
from photondistill.unitary import parse_spec


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="fourier", help="spec family prefix")
    ap.add_argument("--n-min", type=int, default=3)
    ap.add_argument("--n-max", type=int, default=8)
    ap.add_argument("--model", default="obb")
    ap.add_argument("--max-n", type=int, default=12)
    args = ap.parse_args(argv)

    model = parse_model(args.model)
    print(f"{'spec':>12s}  {'threshold':>10s}  {'1/n':>8s}")
    for n in range(args.n_min, args.n_max + 1):
        spec = parse_spec(f"{args.family}:{n}")
        poly = rate_polynomials(spec, model, max_n=args.max_n)
        try:
            thr = f"{distillation_threshold(poly):10.6f}"
        except NoThresholdError:
            thr = f"{'none':>10s}"
        print(f"{spec.key():>12s}  {thr}  {1 / n:8.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
