"""Distillation rates.

Per-configuration heralding and error probabilities, per-k rates in the
Bernstein decomposition, full rate polynomials, thresholds, optimal protocol
size, symmetry orbit reduction of error configurations, and the exact closed
form for the zero-error heralding rate.

Error models: URS(R) assigns each error photon one of R internal labels
uniformly; SBB = URS(1) (all errors identical), OBB is the R -> infinity
limit (all errors mutually orthogonal, handled classically).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import gmpy2
import numpy as np

from . import fock
from .evolve import BudgetExceededError, _bits_per_mode, _evolve_packed, pack_pattern
from .patterns import IdealPatternSet, enumerate_ideal_patterns
from .unitary import UnitaryMatrix, UnitarySpec, build

DEFAULT_MAX_N = 12
THRESHOLD_GRID = 10_000
THRESHOLD_TOL = 1e-9


class NoThresholdError(RuntimeError):
    """The break-even equation e(eps) = eps has no root in (0, 1)."""


@dataclass(frozen=True)
class ErrorModel:
    kind: str  # "obb" | "sbb" | "urs"
    r: int = 1

    def __post_init__(self):
        if self.kind not in ("obb", "sbb", "urs"):
            raise ValueError(f"unknown error model {self.kind!r}")
        if self.kind == "urs" and self.r < 1:
            raise ValueError(f"urs needs R >= 1, got {self.r}")

    def key(self) -> str:
        return f"urs:{self.r}" if self.kind == "urs" else self.kind

    def __str__(self) -> str:
        return self.key()


OBB = ErrorModel("obb")
SBB = ErrorModel("sbb")


def parse_model(text: str) -> ErrorModel:
    text = text.strip().lower()
    if text == "obb":
        return OBB
    if text == "sbb":
        return SBB
    if text.startswith("urs:"):
        return ErrorModel("urs", int(text.split(":", 1)[1]))
    raise ValueError(f"cannot parse error model {text!r}")


@dataclass(frozen=True)
class ErrorConfig:
    """Which input photons carry an error, with orbit multiplicity."""

    error_positions: tuple[int, ...]
    internal_labels: tuple[int, ...] | None = None
    orbit_multiplicity: int = 1


@dataclass(frozen=True)
class RatePolynomial:
    """Per-k rates: h(eps) = sum_k C(n,k) eps^k (1-eps)^(n-k) h_k, same for ebar."""

    n: int
    h_k: tuple[float, ...]
    ebar_k: tuple[float, ...]
    model: ErrorModel
    spec: UnitarySpec


# ---------------------------------------------------------------------------
# closed-form ideal heralding
# ---------------------------------------------------------------------------

def _herald0_mpq(n: int) -> gmpy2.mpq:
    """h_n(0) = (-1/n)^(n-1) (n-1)! sum_t (n-t)(-n)^t / t!, exactly.

    Evaluated through the integer recurrence U_t = t U_(t-1) + (-n)^t by
    binary splitting of 2x2 matrix products, so n up to 10^6 stays fast.
    """
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    neg_n = gmpy2.mpz(-n)

    def prod(lo: int, hi: int):
        # product M_hi ... M_lo of M_t = [[t, -n], [0, -n]] as (a, b, c)
        if lo > hi:
            return (gmpy2.mpz(1), gmpy2.mpz(0), gmpy2.mpz(1))
        if lo == hi:
            return (gmpy2.mpz(lo), neg_n, neg_n)
        mid = (lo + hi) // 2
        a1, b1, c1 = prod(lo, mid)
        a2, b2, c2 = prod(mid + 1, hi)
        return (a2 * a1, a2 * b1 + b2 * c1, c2 * c1)

    a, b, c = prod(1, n - 2)
    x_prev = a + b  # U_(n-2)
    y_prev = c  # (-n)^(n-2)
    x_last = (n - 1) * x_prev + neg_n * y_prev  # U_(n-1)
    num = x_last + (n - 1) * x_prev
    if (n - 1) % 2:
        num = -num
    return gmpy2.mpq(num, gmpy2.mpz(n) ** (n - 2))


def ideal_heralding_closed_form(n: int) -> tuple[Fraction, float]:
    """Exact rational h_n(0) plus its double approximation."""
    q = _herald0_mpq(n)
    return Fraction(int(q.numerator), int(q.denominator)), float(q)


def herald0_quarter_excess_ratio(n: int) -> float:
    """16 n (h_n(0) - 1/4): approaches 1 following the 1/(16n) asymptotic."""
    q = _herald0_mpq(n)
    return float(16 * n * (q - gmpy2.mpq(1, 4)))


# ---------------------------------------------------------------------------
# symmetry orbits of error configurations
# ---------------------------------------------------------------------------

def _unit_maps(f: int, stride: int, n: int) -> list[tuple[int, ...]]:
    """Affine generators acting on one mixed-radix digit of the mode label."""
    perms = []
    # digit shift d -> d + 1
    perms.append(tuple(x + stride * (((x // stride) % f + 1) % f - (x // stride) % f) for x in range(n)))
    # digit multiplication by each unit
    for a in range(2, f):
        if math.gcd(a, f) == 1:
            perms.append(
                tuple(x + stride * ((((x // stride) % f) * a) % f - (x // stride) % f) for x in range(n))
            )
    return perms


def _gl2_bit_maps(r: int, n: int) -> list[tuple[int, ...]]:
    """Generators of GL(r, 2) acting on mode labels viewed as bit vectors."""
    perms = []
    if r >= 2:
        # swap bits 0 and 1
        perms.append(
            tuple((x & ~3) | ((x & 1) << 1) | ((x >> 1) & 1) for x in range(n))
        )
        # cyclic rotation of all bits
        perms.append(tuple(((x >> 1) | ((x & 1) << (r - 1))) for x in range(n)))
        # transvection: bit0 ^= bit1
        perms.append(tuple(x ^ ((x >> 1) & 1) for x in range(n)))
    return perms


def reduction_generators(spec: UnitarySpec) -> list[tuple[int, ...]]:
    """Mode permutations leaving all heralding statistics invariant.

    Fourier factors give affine maps x -> a x + b (a a unit); Hadamard stacks
    give the full affine group over bit vectors (translations plus GL(r, 2)
    row/column swap symmetries).
    """
    n = spec.n
    if spec.kind == "fourier":
        return _unit_maps(n, 1, n)
    if spec.kind == "hadamard":
        r = len(spec.factors)
        perms = [tuple(x ^ (1 << i) for x in range(n)) for i in range(r)]
        return perms + _gl2_bit_maps(r, n)
    if spec.kind == "ftuple":
        perms = []
        stride = 1
        for f in spec.factors:
            perms.extend(_unit_maps(f, stride, n))
            stride *= f
        return perms
    return []


def _orbit_partition(n: int, generators: list[tuple[int, ...]]) -> dict[int, int]:
    """Map subset bitmask -> orbit size, keyed by the minimal representative."""
    total = 1 << n
    seen = bytearray(total)
    reps: dict[int, int] = {}
    for start in range(total):
        if seen[start]:
            continue
        orbit = {start}
        frontier = [start]
        seen[start] = 1
        while frontier:
            cur = frontier.pop()
            for perm in generators:
                img = 0
                rem = cur
                while rem:
                    low = rem & -rem
                    img |= 1 << perm[low.bit_length() - 1]
                    rem ^= low
                if img not in orbit:
                    orbit.add(img)
                    seen[img] = 1
                    frontier.append(img)
        reps[start] = len(orbit)
    return reps


@lru_cache(maxsize=32)
def _orbits_for(spec: UnitarySpec) -> dict[int, int]:
    return _orbit_partition(spec.n, reduction_generators(spec))


def subset_orbit_count(spec: UnitarySpec) -> int:
    """Number of error-configuration classes pooled over all subset sizes."""
    return len(_orbits_for(spec))


def error_orbits(
    spec: UnitarySpec, model: ErrorModel, k: int, use_symmetry: bool = True
) -> list[ErrorConfig]:
    """Representative error configurations of weight k with multiplicities."""
    n = spec.n
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= {n}, got {k}")
    labels = _default_labels(model, k)
    if not use_symmetry or not reduction_generators(spec):
        return [
            ErrorConfig(pos, labels, 1)
            for pos in itertools.combinations(range(n), k)
        ]
    configs = []
    for mask, size in sorted(_orbits_for(spec).items()):
        if mask.bit_count() == k:
            pos = tuple(i for i in range(n) if mask >> i & 1)
            configs.append(ErrorConfig(pos, labels, size))
    assert sum(c.orbit_multiplicity for c in configs) == math.comb(n, k)
    return configs


def _default_labels(model: ErrorModel, k: int) -> tuple[int, ...] | None:
    if model.kind == "sbb":
        return (0,) * k
    if model.kind == "obb":
        return tuple(range(k))
    return None  # URS averages over label assignments internally


# ---------------------------------------------------------------------------
# set partitions for URS label averaging
# ---------------------------------------------------------------------------

def _set_partitions(items: tuple[int, ...]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [first]] + part[i + 1 :]
        yield [[first]] + part


def _partition_weight(r: int, blocks: int, k: int) -> float:
    """P(labels realize this partition) = falling(R, b) / R^k."""
    w = 1.0
    for i in range(blocks):
        w *= (r - i) / r
    return w * float(r) ** (blocks - k)


# ---------------------------------------------------------------------------
# rate engine
# ---------------------------------------------------------------------------

class RateEngine:
    """Computes per-configuration and per-k rates for one (unitary, model) pair."""

    def __init__(
        self,
        spec_or_matrix: UnitarySpec | UnitaryMatrix,
        model: ErrorModel,
        use_symmetry: bool = True,
        ideal: IdealPatternSet | None = None,
    ):
        if isinstance(spec_or_matrix, UnitaryMatrix):
            self.u = spec_or_matrix
            self.spec = spec_or_matrix.spec
        else:
            self.spec = spec_or_matrix
            self.u = build(spec_or_matrix)
        self.model = model
        self.n = self.u.n
        self.use_symmetry = use_symmetry and bool(reduction_generators(self.spec))
        self.ideal = ideal if ideal is not None else enumerate_ideal_patterns(self.u)
        self.bits = _bits_per_mode(self.n)
        self._ideal_keys = np.sort(
            np.array(
                [pack_pattern(p, self.bits) for p in self.ideal.amplitudes],
                dtype=np.int64,
            )
        )
        self._dist_cache: dict[tuple[int, ...], tuple] = {}

    # -- distributions -----------------------------------------------------

    def _quantum_dist(self, modes: tuple[int, ...]):
        """Truncated evolution of identical photons, split by mode-0 occupancy."""
        if modes not in self._dist_cache:
            keys, amps = _evolve_packed(
                self.u.entries, modes, truncate_mode0=True, prune=1e-14, bits=self.bits
            )
            self._dist_cache[modes] = self._split(keys, np.abs(amps) ** 2)
        return self._dist_cache[modes]

    def _split(self, keys, probs):
        mask = (1 << self.bits) - 1
        occ0 = keys & mask
        zero = occ0 == 0
        return (keys[zero], probs[zero]), (keys[~zero], probs[~zero])

    def _classical_dist(self, modes: tuple[int, ...]):
        """Independent (mutually orthogonal) photons: classical convolution."""
        mask = (1 << self.bits) - 1
        keys = np.zeros(1, dtype=np.int64)
        probs = np.ones(1, dtype=float)
        weights = np.abs(self.u.entries) ** 2
        for g in modes:
            parts_k, parts_p = [], []
            for i in range(self.n):
                w = weights[i, g]
                if w < 1e-30:
                    continue
                if i == 0:
                    keep = (keys & mask) < 1
                    if not keep.any():
                        continue
                    k, p = keys[keep], probs[keep]
                else:
                    k, p = keys, probs
                parts_k.append(k + (np.int64(1) << np.int64(self.bits * i)))
                parts_p.append(p * w)
            keys = np.concatenate(parts_k)
            probs = np.concatenate(parts_p)
            keys, inverse = np.unique(keys, return_inverse=True)
            merged = np.zeros(len(keys))
            np.add.at(merged, inverse, probs)
            probs = merged
        return self._split(keys, probs)

    def _convolve(self, a, b):
        """Classical convolution of two split distributions, capping mode 0 at 1."""
        (a0k, a0p), (a1k, a1p) = a
        (b0k, b0p), (b1k, b1p) = b
        zero_k = (a0k[:, None] + b0k[None, :]).ravel()
        zero_p = (a0p[:, None] * b0p[None, :]).ravel()
        one_k = np.concatenate(
            [(a0k[:, None] + b1k[None, :]).ravel(), (a1k[:, None] + b0k[None, :]).ravel()]
        )
        one_p = np.concatenate(
            [(a0p[:, None] * b1p[None, :]).ravel(), (a1p[:, None] * b0p[None, :]).ravel()]
        )

        def merge(keys, probs):
            keys, inverse = np.unique(keys, return_inverse=True)
            merged = np.zeros(len(keys))
            np.add.at(merged, inverse, probs)
            return keys, merged

        return merge(zero_k, zero_p), merge(one_k, one_p)

    def _error_dist(self, positions: tuple[int, ...]):
        """Split output distribution of the error photons under the model."""
        if self.model.kind == "obb":
            return self._classical_dist(positions)
        if self.model.kind == "sbb":
            return self._quantum_dist(positions)
        # URS(R): average over label assignments via set partitions
        if not positions:
            return self._quantum_dist(())
        k = len(positions)
        acc = None
        r = self.model.r
        for part in _set_partitions(positions):
            w = _partition_weight(r, len(part), k)
            if w == 0.0:
                continue
            dist = self._quantum_dist(tuple(sorted(part[0])))
            for block in part[1:]:
                dist = self._convolve(dist, self._quantum_dist(tuple(sorted(block))))
            acc = _weighted_merge(acc, dist, w)
        return acc

    # -- combination against the ideal set ----------------------------------

    def _pair_sum(self, keys_a, probs_a, keys_b, probs_b) -> float:
        """sum over pairs with key_a + key_b in the ideal set of p_a * p_b."""
        if len(keys_a) == 0 or len(keys_b) == 0:
            return 0.0
        if len(keys_a) > len(keys_b):
            keys_a, keys_b, probs_a, probs_b = keys_b, keys_a, probs_b, probs_a
        ideal = self._ideal_keys
        terms = []
        for ka, pa in zip(keys_a, probs_a):
            cand = keys_b + ka
            idx = np.searchsorted(ideal, cand)
            idx_c = np.minimum(idx, len(ideal) - 1)
            hit = ideal[idx_c] == cand
            if hit.any():
                terms.append(pa * float(probs_b[hit].sum()))
        return math.fsum(terms)

    def config_probabilities(self, positions: tuple[int, ...]) -> tuple[float, float]:
        """(P01, P10): herald probability with an error / ideal photon in mode 0."""
        ideal_positions = tuple(i for i in range(self.n) if i not in positions)
        (r0k, r0p), (r1k, r1p) = self._quantum_dist(ideal_positions)
        (s0k, s0p), (s1k, s1p) = self._error_dist(tuple(sorted(positions)))
        p01 = self._pair_sum(r0k, r0p, s1k, s1p)
        p10 = self._pair_sum(r1k, r1p, s0k, s0p)
        return p01, p10

    def joint_zero_mode_dist(self, positions: tuple[int, ...]):
        """Full joint output distribution restricted to zero photons in mode 0."""
        ideal_positions = tuple(i for i in range(self.n) if i not in positions)
        (r0k, r0p), _ = self._quantum_dist(ideal_positions)
        (s0k, s0p), _ = self._error_dist(tuple(sorted(positions)))
        keys = (r0k[:, None] + s0k[None, :]).ravel()
        probs = (r0p[:, None] * s0p[None, :]).ravel()
        keys, inverse = np.unique(keys, return_inverse=True)
        merged = np.zeros(len(keys))
        np.add.at(merged, inverse, probs)
        return keys, merged

    # -- per-k rates ---------------------------------------------------------

    def phi_rate(self, k: int) -> tuple[float, float]:
        configs = error_orbits(self.spec, self.model, k, self.use_symmetry)
        h_terms, e_terms = [], []
        for cfg in configs:
            p01, p10 = self.config_probabilities(cfg.error_positions)
            h_terms.append(cfg.orbit_multiplicity * (p01 + p10))
            e_terms.append(cfg.orbit_multiplicity * p01)
        c = math.comb(self.n, k)
        return math.fsum(h_terms) / c, math.fsum(e_terms) / c

    def polynomials(self) -> RatePolynomial:
        rates = [self.phi_rate(k) for k in range(self.n + 1)]
        return RatePolynomial(
            self.n,
            tuple(h for h, _ in rates),
            tuple(e for _, e in rates),
            self.model,
            self.spec,
        )


def _weighted_merge(acc, dist, w):
    """acc += w * dist for split (zero, one) key/prob distributions."""
    scaled = tuple((k, p * w) for k, p in dist)
    if acc is None:
        return scaled
    out = []
    for (ka, pa), (kb, pb) in zip(acc, scaled):
        keys = np.concatenate([ka, kb])
        probs = np.concatenate([pa, pb])
        keys, inverse = np.unique(keys, return_inverse=True)
        merged = np.zeros(len(keys))
        np.add.at(merged, inverse, probs)
        out.append((keys, merged))
    return tuple(out)


@lru_cache(maxsize=64)
def _cached_engine(spec: UnitarySpec, model: ErrorModel, use_symmetry: bool) -> RateEngine:
    return RateEngine(spec, model, use_symmetry)


def config_probabilities(
    spec: UnitarySpec, config: ErrorConfig, model: ErrorModel, use_symmetry: bool = True
) -> tuple[float, float]:
    return _cached_engine(spec, model, use_symmetry).config_probabilities(
        config.error_positions
    )


def phi_rates(
    spec: UnitarySpec, model: ErrorModel, k: int, use_symmetry: bool = True
) -> tuple[float, float]:
    return _cached_engine(spec, model, use_symmetry).phi_rate(k)


def rate_polynomials(
    spec: UnitarySpec,
    model: ErrorModel,
    use_symmetry: bool = True,
    max_n: int = DEFAULT_MAX_N,
) -> RatePolynomial:
    if spec.n > max_n:
        raise BudgetExceededError(
            f"n={spec.n} exceeds the desk limit {max_n}; raise max_n (or pass --long)"
        )
    return _cached_engine(spec, model, use_symmetry).polynomials()


# ---------------------------------------------------------------------------
# Bernstein evaluation and derived quantities
# ---------------------------------------------------------------------------

def _bernstein(coeffs, n: int, eps: float) -> float:
    return math.fsum(
        math.comb(n, k) * eps**k * (1 - eps) ** (n - k) * c for k, c in enumerate(coeffs)
    )


def eval_heralding(poly: RatePolynomial, eps: float) -> float:
    if not 0 <= eps <= 1:
        raise ValueError(f"need 0 <= eps <= 1, got {eps}")
    return _bernstein(poly.h_k, poly.n, eps)


def eval_ebar(poly: RatePolynomial, eps: float) -> float:
    if not 0 <= eps <= 1:
        raise ValueError(f"need 0 <= eps <= 1, got {eps}")
    return _bernstein(poly.ebar_k, poly.n, eps)


def eval_error(poly: RatePolynomial, eps: float) -> float:
    h = eval_heralding(poly, eps)
    if h <= 0:
        raise ZeroDivisionError("heralding rate vanished; error rate undefined")
    return eval_ebar(poly, eps) / h


def first_order_check(poly: RatePolynomial, eps: float = 1e-6) -> dict:
    """Numeric first-order behavior versus e ~ eps/n and h ~ h0 (1 - (n-1) eps)."""
    n = poly.n
    h0 = poly.h_k[0]
    slope_e = eval_error(poly, eps) / eps
    slope_h = (eval_heralding(poly, eps) - h0) / eps
    return {
        "n": n,
        "error_slope": slope_e,
        "error_slope_expected": 1 / n,
        "error_slope_rel_dev": abs(slope_e * n - 1),
        "herald_slope": slope_h,
        "herald_slope_expected": -(n - 1) * h0,
        "herald_slope_rel_dev": abs(slope_h / (-(n - 1) * h0) - 1),
        "h1_over_h0": poly.h_k[1] / h0,
        "ebar1_over_h0": poly.ebar_k[1] / h0,
    }


def distillation_threshold(poly: RatePolynomial) -> float:
    """Smallest eps in (0, 1) with ebar(eps) = eps * h(eps)."""

    def g(eps: float) -> float:
        return eval_ebar(poly, eps) - eps * eval_heralding(poly, eps)

    xs = np.linspace(0.0, 1.0, THRESHOLD_GRID + 1)[1:]
    vals = [g(float(x)) for x in xs]
    for x0, v0, x1, v1 in zip(xs, vals, xs[1:], vals[1:]):
        if v1 == 0.0:
            return float(x1)
        if v0 == 0.0 or (v0 > 0) == (v1 > 0):
            continue
        lo, hi = float(x0), float(x1)
        hi_pos = v1 > 0
        while hi - lo > THRESHOLD_TOL:
            mid = (lo + hi) / 2
            if (g(mid) > 0) == hi_pos:
                hi = mid
            else:
                lo = mid
        return (lo + hi) / 2
    raise NoThresholdError("ebar(eps) - eps h(eps) has no sign change in (0, 1)")


def optimal_n(eps: float, polys: list[RatePolynomial]) -> RatePolynomial:
    """Candidate with the smallest output error at eps; ties go to smaller n."""
    if not polys:
        raise ValueError("need at least one candidate polynomial")
    return min(polys, key=lambda p: (eval_error(p, eps), p.n))


def resource_cost(poly: RatePolynomial, eps: float) -> float:
    """Expected photons consumed per distilled photon: n / h(eps)."""
    return poly.n / eval_heralding(poly, eps)


def conjecture_probe(spec: UnitarySpec, model: ErrorModel, eps_grid: int = 101) -> dict:
    """Numerically probe (never assert) the three heralding conjectures."""
    poly = rate_polynomials(spec, model)
    n = poly.n
    h0 = poly.h_k[0]
    seq = [float(_herald0_mpq(m)) for m in range(5, 10)]
    monotone = all(a > b for a, b in zip(seq, seq[1:]))
    ratios = [poly.h_k[k] / h0 for k in range(1, n + 1)]
    term_bound_ok = all(r >= 1 / n - 1e-12 for r in ratios)
    grid = np.linspace(0.0, 1.0, eps_grid)
    violations = []
    for eps in grid:
        bound = h0 * ((1 - eps) ** n * (1 - 1 / n) + 1 / n)
        if eval_heralding(poly, float(eps)) < bound - 1e-12:
            violations.append(float(eps))
    from .patterns import _is_prime_power

    return {
        "spec": spec.key(),
        "model": model.key(),
        "prime_power": _is_prime_power(n),
        "bounds_conjectured_for_prime_power_only": True,
        "herald0_sequence_n5_to_9": seq,
        "herald0_monotone_decreasing": monotone,
        "term_bound_min_ratio": min(ratios),
        "term_bound_threshold": 1 / n,
        "term_bound_holds": term_bound_ok,
        "lower_bound_violations": violations,
        "lower_bound_holds": not violations,
    }
