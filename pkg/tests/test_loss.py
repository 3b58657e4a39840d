import itertools
import math

import numpy as np
import pytest

from photondistill import unitary
from photondistill.distill import OBB, SBB, ideal_heralding_closed_form, rate_polynomials
from photondistill.evolve import BudgetExceededError, evolve_modes
from photondistill.loss import (
    LossParams,
    c_n,
    false_herald_coefficients,
    lossy_heralding,
    lossy_resource_estimate,
    output_fidelity,
)
from photondistill.patterns import enumerate_ideal_patterns


def oracle_coefficient(spec, k):
    """Direct-enumeration false-heralding coefficient for k classical errors.

    Good photons evolve quantum mechanically, each error photon lands in mode
    j with probability |U[j, g]|^2; sum over join patterns t with t_0 = 0 of
    P(t) * sum_j (t_j / n) [t - e_j + e_0 ideal].
    """
    u = unitary.build(spec)
    n = u.n
    ideal = enumerate_ideal_patterns(spec).patterns
    col = np.abs(u.entries) ** 2
    total = 0.0
    for errors in itertools.combinations(range(n), k):
        good = [g for g in range(n) if g not in errors]
        amp = evolve_modes(u, good)
        quantum = {s: abs(a) ** 2 for s, a in amp.entries.items()}
        config_total = 0.0
        for s, p in quantum.items():
            for err_modes in itertools.product(range(n), repeat=k):
                t = list(s)
                for g, j in zip(errors, err_modes):
                    t[j] += 1
                if t[0] != 0:
                    continue
                w = p * math.prod(col[j, g] for g, j in zip(errors, err_modes))
                for j in range(1, n):
                    if t[j] == 0:
                        continue
                    cand = list(t)
                    cand[j] -= 1
                    cand[0] += 1
                    if tuple(cand) in ideal:
                        config_total += w * t[j] / n
        total += config_total
    return total / math.comb(n, k)


def test_false_herald_coefficients_against_oracle():
    spec = unitary.fourier(4)
    coeffs = false_herald_coefficients(spec, OBB)
    for k in range(3):
        assert coeffs[k] == pytest.approx(oracle_coefficient(spec, k), abs=1e-10), k


def test_structured_specs_have_no_zero_error_false_heralds():
    for spec in [
        unitary.fourier(4),
        unitary.fourier(6),
        unitary.hadamard(3),
        unitary.ftuple((3, 2)),
    ]:
        assert false_herald_coefficients(spec, OBB)[0] == 0.0
        assert c_n(spec, OBB, 0.0) == 0.0


def test_haar_matrix_has_zero_error_false_heralds():
    # generic matrices accept every tail, so a lost photon can fake a herald
    spec = unitary.haar(4, 0)
    assert false_herald_coefficients(spec, OBB)[0] > 0
    assert false_herald_coefficients(spec, OBB)[0] == pytest.approx(
        oracle_coefficient(spec, 0), abs=1e-10
    )


def test_loss_params():
    loss = LossParams(0.01, 16)
    assert loss.per_mode == pytest.approx(1 - 0.99**4)
    with pytest.raises(ValueError):
        LossParams(-0.1, 4)


def test_lossless_limits():
    spec = unitary.fourier(5)
    poly = rate_polynomials(spec, OBB)
    none = LossParams(0.0, 5)
    for eps in (0.0, 0.1, 0.3):
        from photondistill.distill import eval_error, eval_heralding

        assert lossy_heralding(spec, OBB, eps, none) == pytest.approx(
            eval_heralding(poly, eps)
        )
        assert output_fidelity(spec, OBB, eps, none) == pytest.approx(
            1 - eval_error(poly, eps)
        )


def test_zero_error_heralding_closed_form():
    for spec in [unitary.fourier(6), unitary.hadamard(3)]:
        n = spec.n
        loss = LossParams(0.02, n)
        expected = (1 - loss.per_mode) ** (n - 1) * ideal_heralding_closed_form(n)[1]
        assert lossy_heralding(spec, OBB, 0.0, loss) == pytest.approx(
            expected, abs=1e-12
        )


def test_heralding_exceeds_pure_attenuation_with_errors():
    # the false-heralding channel only adds events
    spec = unitary.fourier(5)
    loss = LossParams(0.05, 5)
    from photondistill.distill import eval_heralding

    poly = rate_polynomials(spec, OBB)
    for eps in (0.05, 0.2):
        floor = (1 - loss.per_mode) ** 4 * eval_heralding(poly, eps)
        assert lossy_heralding(spec, OBB, eps, loss) >= floor


def test_fidelity_monotone_in_loss():
    spec = unitary.fourier(5)
    vals = [
        output_fidelity(spec, SBB, 0.1, LossParams(lam, 5))
        for lam in (0.0, 0.01, 0.05, 0.1)
    ]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_resource_estimate_n16_fast_path():
    runs, photons = lossy_resource_estimate(
        unitary.fourier(16), OBB, 0.0, LossParams(0.01, 16)
    )
    assert runs == pytest.approx(7.2, abs=0.1)
    assert photons == pytest.approx(16 * runs)


def test_resource_estimate_budget_guard():
    with pytest.raises(BudgetExceededError):
        lossy_resource_estimate(unitary.fourier(16), OBB, 0.1, LossParams(0.01, 16))
    runs, photons = lossy_resource_estimate(
        unitary.fourier(5), OBB, 0.1, LossParams(0.01, 5)
    )
    assert photons == pytest.approx(5 * runs)
