#!/usr/bin/env python3
"""Sweep the input error rate and tabulate heralding and output error.

Example:
    python3 scripts/rate_sweep.py --spec fourier:6 --models obb,sbb,urs:4
"""
import argparse
import sys

import numpy as np

from photondistill.distill import (
    eval_error,
    eval_heralding,
    parse_model,
    rate_polynomials,
)
from photondistill.unitary import parse_spec


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--spec", default="fourier:6")
    ap.add_argument("--models", default="obb,sbb")
    ap.add_argument("--eps-max", type=float, default=0.5)
    ap.add_argument("--steps", type=int, default=11)
    ap.add_argument("--max-n", type=int, default=12)
    args = ap.parse_args(argv)

    spec = parse_spec(args.spec)
    models = [parse_model(m) for m in args.models.split(",")]
    polys = [rate_polynomials(spec, m, max_n=args.max_n) for m in models]

    header = ["eps"]
    for m in models:
        header += [f"h[{m}]", f"e[{m}]"]
    print("  ".join(f"{h:>12s}" for h in header))
    for eps in np.linspace(0.0, args.eps_max, args.steps):
        row = [eps]
        for poly in polys:
            h = eval_heralding(poly, float(eps))
            row += [h, eval_error(poly, float(eps)) if h > 0 else float("nan")]
        print("  ".join(f"{v:12.6f}" for v in row))
    return 0


if __name__ == "__main__":
    sys.exit(main())
