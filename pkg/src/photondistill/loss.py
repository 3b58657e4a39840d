"""Photon loss corrections.

Simplified per-mode loss model: every mode of the n-mode interferometer loses
a photon independently with probability Lambda = 1 - (1-lambda)^(log2 n),
lambda being the per-beamsplitter loss.  Loss opens a false-heralding channel:
a photon in a nonzero mode is lost and the surviving detector pattern matches
an ideal tail while mode 0 is actually empty.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distill import (
    DEFAULT_MAX_N,
    ErrorModel,
    RateEngine,
    _cached_engine,
    _herald0_mpq,
    error_orbits,
    eval_error,
    eval_heralding,
    rate_polynomials,
)
from .evolve import BudgetExceededError
from .unitary import UnitarySpec


@dataclass(frozen=True)
class LossParams:
    """Per-beamsplitter loss rate and the derived per-mode loss."""

    lambda_bs: float
    n: int

    def __post_init__(self):
        if not 0 <= self.lambda_bs < 1:
            raise ValueError(f"need 0 <= lambda < 1, got {self.lambda_bs}")

    @property
    def per_mode(self) -> float:
        return 1 - (1 - self.lambda_bs) ** math.log2(self.n)


def _false_herald_config(engine: RateEngine, positions) -> float:
    """sum_t P(t | t_0 = 0) * sum_j (t_j / n) [t - e_j has an ideal tail]."""
    keys, probs = engine.joint_zero_mode_dist(positions)
    if len(keys) == 0:
        return 0.0
    bits = engine.bits
    mask = (1 << bits) - 1
    ideal = engine._ideal_keys
    n = engine.n
    total = 0.0
    for j in range(1, n):
        t_j = (keys >> (bits * j)) & mask
        has = t_j > 0
        if not has.any():
            continue
        # remove one photon from mode j, add one to mode 0: ideal iff tail matches
        cand = keys[has] - (np.int64(1) << np.int64(bits * j)) + 1
        idx = np.minimum(np.searchsorted(ideal, cand), len(ideal) - 1)
        hit = ideal[idx] == cand
        total += float(np.sum(probs[has][hit] * t_j[has][hit] / n))
    return total


def false_herald_coefficients(
    spec: UnitarySpec, model: ErrorModel, use_symmetry: bool = True
) -> tuple[float, ...]:
    """Per-k Bernstein coefficients of the false-heralding correction c_n."""
    engine = _cached_engine(spec, model, use_symmetry)
    n = engine.n
    coeffs = []
    for k in range(n + 1):
        configs = error_orbits(spec, model, k, engine.use_symmetry)
        total = math.fsum(
            c.orbit_multiplicity * _false_herald_config(engine, c.error_positions)
            for c in configs
        )
        coeffs.append(total / math.comb(n, k))
    return tuple(coeffs)


def c_n(
    spec: UnitarySpec, model: ErrorModel, eps: float, use_symmetry: bool = True
) -> float:
    """False-heralding correction at error rate eps."""
    coeffs = false_herald_coefficients(spec, model, use_symmetry)
    n = len(coeffs) - 1
    return math.fsum(
        math.comb(n, k) * eps**k * (1 - eps) ** (n - k) * c
        for k, c in enumerate(coeffs)
    )


def lossy_heralding(
    spec: UnitarySpec, model: ErrorModel, eps: float, loss: LossParams
) -> float:
    """h(eps; lambda) = (1-L)^(n-1) h(eps) + n L (1-L)^(n-1) c_n(eps)."""
    n = spec.n
    lam = loss.per_mode
    h = eval_heralding(rate_polynomials(spec, model), eps)
    if lam == 0.0:
        return h
    return (1 - lam) ** (n - 1) * (h + n * lam * c_n(spec, model, eps))


def output_fidelity(
    spec: UnitarySpec, model: ErrorModel, eps: float, loss: LossParams
) -> float:
    """f(eps; lambda) = (1-L)(1 - e(eps)) / (1 + n L c_n(eps)/h(eps))."""
    n = spec.n
    lam = loss.per_mode
    poly = rate_polynomials(spec, model)
    fidelity = 1 - eval_error(poly, eps)
    if lam == 0.0:
        return fidelity
    h = eval_heralding(poly, eps)
    return (1 - lam) * fidelity / (1 + n * lam * c_n(spec, model, eps) / h)


def lossy_resource_estimate(
    spec: UnitarySpec,
    model: ErrorModel,
    eps: float,
    loss: LossParams,
    max_n: int = DEFAULT_MAX_N,
) -> tuple[float, float]:
    """(expected runs, expected photons) per heralded output: 1/h and n/h.

    At eps = 0 the false-heralding correction vanishes for the structured
    matrices, so the closed-form zero-error heralding suffices and sizes past
    the desk limit (e.g. n = 16) stay cheap.
    """
    n = spec.n
    if eps == 0.0 and spec.kind in ("fourier", "hadamard", "ftuple"):
        h = (1 - loss.per_mode) ** (n - 1) * float(_herald0_mpq(n))
    elif n > max_n:
        raise BudgetExceededError(
            f"n={n} exceeds the desk limit {max_n} for eps > 0"
        )
    else:
        h = lossy_heralding(spec, model, eps, loss)
    runs = 1 / h
    return runs, n * runs
