import math
from fractions import Fraction

import numpy as np
import pytest

from photondistill import fock, unitary
from photondistill.distill import ideal_heralding_closed_form
from photondistill.evolve import BudgetExceededError
from photondistill.haar import (
    empirical_ideal_heralding,
    haar_first_order,
    haar_ideal_heralding,
    output_probability_stats,
    porter_thomas_check,
    top_k_distillation,
)


def test_haar_heralding_closed_form():
    assert haar_ideal_heralding(5)[0] == Fraction(
        fock.dimension(4, 4), fock.dimension(5, 5)
    )
    assert haar_ideal_heralding(5)[1] == pytest.approx(0.25 / (1 - 0.1))
    with pytest.raises(ValueError):
        haar_ideal_heralding(2)


def test_haar_heralding_monotone_to_quarter():
    vals = [haar_ideal_heralding(n)[1] for n in range(3, 40)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert all(v > 0.25 for v in vals)
    assert vals[-1] == pytest.approx(0.25, abs=0.005)


def test_haar_beats_fourier_at_moderate_sizes():
    for n in range(4, 10):
        assert haar_ideal_heralding(n)[1] > ideal_heralding_closed_form(n)[1], n


def test_haar_first_order_values():
    p_ideal, p_err = haar_first_order(8)
    assert p_err == pytest.approx(1 / 16)
    assert p_ideal == pytest.approx(0.25 * (7 / 8) ** 2 / (1 - 3 / 16))


def test_empirical_heralding_matches_average():
    # 50-sample Monte Carlo mean within 3 sigma of the closed form
    n = 5
    vals = [
        empirical_ideal_heralding(unitary.sample_haar(n, seed)) for seed in range(50)
    ]
    mean, sem = np.mean(vals), np.std(vals) / math.sqrt(len(vals))
    assert abs(mean - haar_ideal_heralding(n)[1]) < 3 * sem


def test_top_k_report_shape_and_heralding():
    report = top_k_distillation(5, seed=3, fractions=[1.0, 0.3, 0.1])
    assert report.n == 5
    assert report.h0_analytic == pytest.approx(haar_ideal_heralding(5)[1])
    # keeping everything reproduces the empirical heralding
    r, h_r, ratio, analytic = report.top_k_curve[0]
    assert r == 1.0
    assert h_r == pytest.approx(report.h0_empirical, abs=1e-12)
    assert analytic == pytest.approx(report.h0_analytic)
    # heralding shrinks as the kept fraction shrinks; error ratio improves
    hs = [h for _, h, _, _ in report.top_k_curve]
    ratios = [x for _, _, x, _ in report.top_k_curve]
    assert all(a > b for a, b in zip(hs, hs[1:]))
    assert all(a > b for a, b in zip(ratios, ratios[1:]))


def test_top_k_rejects_bad_input():
    with pytest.raises(BudgetExceededError):
        top_k_distillation(9, 0, [0.5])
    with pytest.raises(ValueError):
        top_k_distillation(4, 0, [0.0])


def test_full_set_error_slope_near_haar_average():
    # keeping all patterns: slope should track p_err / (2 p_ideal) ~ 1/(2 h0)
    report = top_k_distillation(6, seed=7, fractions=[1.0])
    ratio = report.top_k_curve[0][2]
    expected = 1 / (2 * report.h0_analytic)
    assert abs(ratio / expected - 1) < 0.15


def test_porter_thomas_diagnostic():
    stat, p_value = porter_thomas_check(6, seed=7)
    assert stat > 0
    assert 0.01 < p_value < 1.0
    with pytest.raises(BudgetExceededError):
        porter_thomas_check(8, 0)


def test_output_probability_stats():
    stats = output_probability_stats(6, seed=7)
    d = fock.dimension(6, 6)
    assert stats["pattern_count"] == d
    assert stats["mean_probability"] == pytest.approx(1 / d, rel=1e-9)
    assert abs(stats["fraction_above_mean"] - math.exp(-1)) < 0.05
    assert stats["order_statistic_estimate"] == pytest.approx(
        math.log(fock.dimension(5, 5)) / d
    )
    # the largest probability fluctuates; the log-based estimate should get
    # the scale right on average
    maxima = [output_probability_stats(6, s)["max_probability"] for s in range(20)]
    ratio = np.mean(maxima) / stats["order_statistic_estimate"]
    assert 0.5 < ratio < 2.5
