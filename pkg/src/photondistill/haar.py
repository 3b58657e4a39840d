"""Haar-random comparison.

Averaged over the Haar measure, the ideal heralding rate has a closed form
(the unitary group is a continuous 1-design over output patterns), the
first-order error behavior is computable, and post-selecting only the
highest-weight patterns restores distillation for a single sampled unitary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from . import fock
from .distill import OBB, RateEngine, error_orbits
from .evolve import BudgetExceededError, evolve_modes
from .patterns import SUPPRESSION_TOL, IdealPatternSet, enumerate_ideal_patterns
from .unitary import UnitaryMatrix, sample_haar

TOP_K_MAX_N = 8
PT_MAX_N = 7
PT_BINS = 100
PT_TAIL_EXCLUDE = 0.01


@dataclass(frozen=True)
class HaarReport:
    n: int
    h0_analytic: float
    h0_empirical: float
    p_ideal: float
    p_err: float
    top_k_curve: tuple[tuple[float, float, float, float], ...]
    pt_statistic: float


def haar_ideal_heralding(n: int) -> tuple[Fraction, float]:
    """Haar-averaged h(0) = d_(n-1,n-1) / d_(n,n), exact and double."""
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    q = Fraction(fock.dimension(n - 1, n - 1), fock.dimension(n, n))
    return q, float(q)


def haar_first_order(n: int) -> tuple[float, float]:
    """Haar-averaged (P_ideal, P_err) governing the small-eps error slope."""
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    p_ideal = 0.25 * (1 - 1 / n) ** 2 / (1 - 1.5 / n)
    p_err = 1 / (2 * n)
    return p_ideal, p_err


def empirical_ideal_heralding(u: UnitaryMatrix) -> float:
    """Zero-error heralding of one sampled unitary over all one-photon-out patterns."""
    ideal = enumerate_ideal_patterns(u)
    return math.fsum(abs(a) ** 2 for a in ideal.amplitudes.values())


def _restricted_error_ratio(u: UnitaryMatrix, ideal: IdealPatternSet) -> float:
    """Small-eps output error over input error: n * ebar_1 / h0 at first order."""
    engine = RateEngine(u, OBB, use_symmetry=False, ideal=ideal)
    h0 = math.fsum(abs(a) ** 2 for a in ideal.amplitudes.values())
    n = u.n
    ebar_1 = math.fsum(
        engine.config_probabilities(cfg.error_positions)[0]
        for cfg in error_orbits(u.spec, OBB, 1, use_symmetry=False)
    ) / n
    return n * ebar_1 / h0


def top_k_distillation(n: int, seed: int, fractions: list[float]) -> HaarReport:
    """Heralding and small-eps error ratio when keeping the top fraction r of patterns."""
    if n > TOP_K_MAX_N:
        raise BudgetExceededError(f"n={n} exceeds the top-k limit {TOP_K_MAX_N}")
    u = sample_haar(n, seed)
    ideal = enumerate_ideal_patterns(u)
    ranked = sorted(
        ideal.amplitudes.items(), key=lambda kv: -abs(kv[1]) ** 2
    )
    d_total = fock.dimension(n - 1, n - 1)
    _, h0_analytic = haar_ideal_heralding(n)
    p_ideal, p_err = haar_first_order(n)
    curve = []
    for r in fractions:
        if not 0 < r <= 1:
            raise ValueError(f"fractions must lie in (0, 1], got {r}")
        keep = max(1, round(r * d_total))
        subset = dict(ranked[:keep])
        restricted = IdealPatternSet(u.spec, dict(sorted(subset.items())))
        h_r = math.fsum(abs(a) ** 2 for a in subset.values())
        ratio = _restricted_error_ratio(u, restricted)
        analytic = r * h0_analytic * (1 - math.log(r)) if r > 0 else 0.0
        curve.append((r, h_r, ratio, analytic))
    return HaarReport(
        n=n,
        h0_analytic=h0_analytic,
        h0_empirical=math.fsum(abs(a) ** 2 for a in ideal.amplitudes.values()),
        p_ideal=p_ideal,
        p_err=p_err,
        top_k_curve=tuple(curve),
        pt_statistic=porter_thomas_check(n, seed)[0] if n <= PT_MAX_N else float("nan"),
    )


def porter_thomas_check(n: int, seed: int) -> tuple[float, float]:
    """Chi-square fit of output probabilities against the d e^(-d p) density.

    Bins the bulk of the distribution (top PT_TAIL_EXCLUDE quantile removed,
    matching the heavy permanental tail) into PT_BINS equal-width cells and
    compares with the exponential law with rate d = number of patterns.
    Returns (statistic, p_value); diagnostic only, not a hard test.
    """
    if n > PT_MAX_N:
        raise BudgetExceededError(f"n={n} exceeds the Porter-Thomas limit {PT_MAX_N}")
    u = sample_haar(n, seed)
    amp = evolve_modes(u, range(n), truncate_mode0=False)
    probs = np.array([abs(a) ** 2 for a in amp.entries.values()])
    d = fock.dimension(n, n)
    cutoff = -math.log(PT_TAIL_EXCLUDE) / d
    bulk = probs[probs <= cutoff]
    edges = np.linspace(0.0, cutoff, PT_BINS + 1)
    observed, _ = np.histogram(bulk, bins=edges)
    cdf = 1 - np.exp(-d * edges)
    expected = len(bulk) * np.diff(cdf) / cdf[-1]
    stat = float(np.sum((observed - expected) ** 2 / expected))
    p_value = float(stats.chi2.sf(stat, PT_BINS - 1))
    return stat, p_value


def output_probability_stats(n: int, seed: int) -> dict:
    """Summary statistics of a sampled unitary's full output distribution."""
    u = sample_haar(n, seed)
    amp = evolve_modes(u, range(n), truncate_mode0=False)
    probs = np.array([abs(a) ** 2 for a in amp.entries.values()])
    d = fock.dimension(n, n)
    d_ideal = fock.dimension(n - 1, n - 1)
    return {
        "n": n,
        "seed": seed,
        "pattern_count": int(len(probs)),
        "mean_probability": float(probs.mean()),
        "expected_mean": 1 / d,
        "fraction_above_mean": float(np.mean(probs > 1 / d)),
        "expected_fraction_above_mean": math.exp(-1),
        "max_probability": float(probs.max()),
        "order_statistic_estimate": math.log(d_ideal) / d,
    }
