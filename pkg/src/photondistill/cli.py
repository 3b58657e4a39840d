"""Command-line front end.

Every computation is exposed as a subcommand emitting key-sorted JSON (or
CSV) with floats at 12 significant digits, so identical configurations give
byte-identical output.  Exit codes: 0 success, 2 invalid input, 3 desk-limit
budget exceeded, 4 golden-data mismatch.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from importlib import resources
from pathlib import Path

from . import distill, fock, haar, loss, patterns
from .evolve import BudgetExceededError
from .unitary import SpecError, build, parse_spec, symmetry_generators, verify_generator

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BUDGET = 3
EXIT_MISMATCH = 4

SHORT_MAX_N = 8
LONG_MAX_N = 12
GOLDEN_TOL = 5e-6


def _round_floats(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _emit(result: dict, args) -> None:
    if args.format == "csv":
        text = _to_csv(result)
    else:
        text = json.dumps(_round_floats(result), sort_keys=True, indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _to_csv(result: dict) -> str:
    """Flatten a result dict into rows of (key, index, value)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "index", "value"])

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}.{k}" if prefix else str(k), obj[k])
        elif isinstance(obj, (list, tuple)):
            for i, v in enumerate(obj):
                walk_leaf = not isinstance(v, (dict, list, tuple))
                if walk_leaf:
                    writer.writerow([prefix, i, _fmt(v)])
                else:
                    walk(f"{prefix}[{i}]", v)
        else:
            writer.writerow([prefix, "", _fmt(obj)])

    def _fmt(v):
        return f"{v:.12g}" if isinstance(v, float) else v

    walk("", result)
    return buf.getvalue()


def _max_n(args) -> int:
    return LONG_MAX_N if args.long else SHORT_MAX_N


def _symmetry(args) -> bool:
    return args.symmetry == "on"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_rates(args) -> dict:
    spec = parse_spec(args.spec)
    model = distill.parse_model(args.model)
    poly = distill.rate_polynomials(spec, model, _symmetry(args), _max_n(args))
    out = {
        "spec": spec.key(),
        "model": model.key(),
        "n": poly.n,
        "h_k": list(poly.h_k),
        "ebar_k": list(poly.ebar_k),
    }
    if args.eps is not None:
        out["eps"] = args.eps
        out["heralding"] = distill.eval_heralding(poly, args.eps)
        out["error"] = distill.eval_error(poly, args.eps)
    return out


def _cmd_threshold(args) -> dict:
    spec = parse_spec(args.spec)
    model = distill.parse_model(args.model)
    poly = distill.rate_polynomials(spec, model, _symmetry(args), _max_n(args))
    try:
        thr = distill.distillation_threshold(poly)
    except distill.NoThresholdError:
        thr = None
    return {"spec": spec.key(), "model": model.key(), "n": poly.n, "threshold": thr}


def _cmd_optimal_n(args) -> dict:
    model = distill.parse_model(args.model)
    specs = [parse_spec(s) for s in args.candidates.split(";")]
    polys = [
        distill.rate_polynomials(s, model, _symmetry(args), _max_n(args))
        for s in specs
    ]
    best = distill.optimal_n(args.eps, polys)
    return {
        "eps": args.eps,
        "model": model.key(),
        "candidates": [s.key() for s in specs],
        "optimal": best.spec.key(),
        "n": best.n,
        "error": distill.eval_error(best, args.eps),
        "photons_per_output": distill.resource_cost(best, args.eps),
    }


def _cmd_patterns(args) -> dict:
    spec = parse_spec(args.spec)
    if spec.n > _max_n(args):
        raise BudgetExceededError(f"n={spec.n} exceeds the desk limit {_max_n(args)}")
    ideal = patterns.enumerate_ideal_patterns(spec)
    out = {
        "spec": spec.key(),
        "n": spec.n,
        "count": len(ideal.amplitudes),
        "patterns": [list(p) for p in ideal.amplitudes],
    }
    if args.diff_ztl:
        report = patterns.verify_prime_power_law(spec.n)
        out["law_count"] = report["total_ztl_s0_1"]
        out["prime_power"] = report["prime_power"]
        out["suppressed_law_patterns"] = [list(p) for p in report["exceptions"]]
    return out


def _cmd_herald0(args) -> dict:
    spec = parse_spec(args.spec)
    exact, approx = distill.ideal_heralding_closed_form(spec.n)
    out = {"spec": spec.key(), "n": spec.n, "herald0": approx}
    if spec.n <= 64:
        out["numerator"] = str(exact.numerator)
        out["denominator"] = str(exact.denominator)
    out["quarter_excess_times_16n"] = distill.herald0_quarter_excess_ratio(spec.n)
    return out


def _cmd_loss(args) -> dict:
    spec = parse_spec(args.spec)
    model = distill.parse_model(args.model)
    lp = loss.LossParams(args.lam, spec.n)
    eps = args.eps if args.eps is not None else 0.0
    runs, photons = loss.lossy_resource_estimate(spec, model, eps, lp, _max_n(args))
    out = {
        "spec": spec.key(),
        "model": model.key(),
        "n": spec.n,
        "eps": eps,
        "lambda": args.lam,
        "per_mode_loss": lp.per_mode,
        "expected_runs": runs,
        "expected_photons": photons,
    }
    if spec.n <= _max_n(args):
        out["heralding"] = loss.lossy_heralding(spec, model, eps, lp)
        out["fidelity"] = loss.output_fidelity(spec, model, eps, lp)
        out["false_herald"] = loss.c_n(spec, model, eps)
    return out


def _cmd_haar(args) -> dict:
    fractions = [float(f) for f in args.fractions.split(",")]
    report = haar.top_k_distillation(args.n, args.seed, fractions)
    return {
        "n": report.n,
        "seed": args.seed,
        "h0_analytic": report.h0_analytic,
        "h0_empirical": report.h0_empirical,
        "p_ideal": report.p_ideal,
        "p_err": report.p_err,
        "top_k_curve": [
            {"fraction": r, "heralding": h, "error_ratio": e, "analytic_heralding": a}
            for r, h, e, a in report.top_k_curve
        ],
        "pt_statistic": report.pt_statistic,
    }


def _cmd_orbits(args) -> dict:
    spec = parse_spec(args.spec)
    classes = distill.subset_orbit_count(spec)
    model = distill.parse_model(args.model)
    per_k = [
        len(distill.error_orbits(spec, model, k)) for k in range(spec.n + 1)
    ]
    return {
        "spec": spec.key(),
        "n": spec.n,
        "subset_classes": classes,
        "classes_per_k": per_k,
        "generators": len(distill.reduction_generators(spec)),
    }


def _cmd_verify(args) -> dict:
    if args.golden:
        golden = json.loads(Path(args.golden).read_text())
    else:
        golden = json.loads(
            resources.files("photondistill").joinpath("data/appendixE.json").read_text()
        )
    max_n = args.max_n if args.max_n else _max_n(args)
    checked = 0
    mismatches = []
    for key in sorted(golden):
        spec = parse_spec(key)
        if spec.n > max_n:
            continue
        for mk in sorted(golden[key]):
            poly = distill.rate_polynomials(
                spec, distill.parse_model(mk), _symmetry(args), max_n
            )
            for name, got in (("h", poly.h_k), ("ebar", poly.ebar_k)):
                for k, (a, b) in enumerate(zip(got, golden[key][mk][name])):
                    checked += 1
                    if abs(a - b) > GOLDEN_TOL:
                        mismatches.append(
                            {"spec": key, "model": mk, "table": name, "k": k,
                             "computed": a, "golden": b}
                        )
    return {
        "max_n": max_n,
        "coefficients_checked": checked,
        "tolerance": GOLDEN_TOL,
        "mismatches": mismatches,
        "ok": not mismatches,
    }


def _cmd_conjectures(args) -> dict:
    spec = parse_spec(args.spec)
    model = distill.parse_model(args.model)
    if spec.n > _max_n(args):
        raise BudgetExceededError(f"n={spec.n} exceeds the desk limit {_max_n(args)}")
    return distill.conjecture_probe(spec, model)


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photondistill",
        description="Simulate and analyze n-photon indistinguishability distillation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, spec=False, model=False):
        if spec:
            p.add_argument("--spec", required=True, help="e.g. fourier:8, hadamard:3, ftuple:4,2")
        if model:
            p.add_argument("--model", default="obb", help="obb | sbb | urs:R")
        p.add_argument("--symmetry", choices=["on", "off"], default="on")
        p.add_argument("--threads", type=int, default=0, help="worker pool size (0 = auto)")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--long", action="store_true", help="unlock n > 8 computations")

    p = sub.add_parser("rates", help="per-k heralding and error coefficients")
    common(p, spec=True, model=True)
    p.add_argument("--eps", type=float, default=None)
    p.set_defaults(func=_cmd_rates)

    p = sub.add_parser("threshold", help="distillation break-even error rate")
    common(p, spec=True, model=True)
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("optimal-n", help="candidate with the lowest output error")
    common(p, model=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument(
        "--candidates",
        default="fourier:3;fourier:4;fourier:5;fourier:6;fourier:7;fourier:8",
        help="semicolon-separated spec strings",
    )
    p.set_defaults(func=_cmd_optimal_n)

    p = sub.add_parser("patterns", help="enumerate ideal output patterns")
    common(p, spec=True)
    p.add_argument("--diff-ztl", action="store_true",
                   help="also list law-satisfying patterns that are suppressed")
    p.set_defaults(func=_cmd_patterns)

    p = sub.add_parser("herald0", help="closed-form zero-error heralding rate")
    common(p, spec=True)
    p.set_defaults(func=_cmd_herald0)

    p = sub.add_parser("loss", help="loss-corrected heralding, fidelity, resources")
    common(p, spec=True, model=True)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.set_defaults(func=_cmd_loss)

    p = sub.add_parser("haar", help="Haar-random comparison and top-k distillation")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fractions", default="0.05,0.1,0.3,1.0")
    p.set_defaults(func=_cmd_haar)

    p = sub.add_parser("orbits", help="symmetry orbit counts of error configurations")
    common(p, spec=True, model=True)
    p.set_defaults(func=_cmd_orbits)

    p = sub.add_parser("verify", help="check rates against the bundled golden tables")
    common(p)
    p.add_argument("--golden", default=None, help="golden JSON path (default: bundled)")
    p.add_argument("--max-n", type=int, default=None)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("conjectures", help="numeric probes of the heralding conjectures")
    common(p, spec=True, model=True)
    p.set_defaults(func=_cmd_conjectures)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (SpecError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _emit(result, args)
    if args.command == "verify" and not result["ok"]:
        print(f"error: {len(result['mismatches'])} golden mismatches", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
