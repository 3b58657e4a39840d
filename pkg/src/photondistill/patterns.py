"""Suppression-law predicates and ideal-pattern machinery.

An ideal pattern has exactly one photon in mode 0 and nonzero transition
amplitude from the all-ones input.  For tensor Fourier matrices the nonzero
amplitudes are confined to patterns obeying the (generalized) zero
transmission law, with equality exactly when the photon number is a prime
power; composite photon numbers admit extra suppressed patterns, for which a
constructive counterexample is provided.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .evolve import evolve_modes, permanent
from .unitary import UnitaryMatrix, UnitarySpec, build, digits

SUPPRESSION_TOL = 1e-12  # |amplitude|^2 below this counts as an exact zero
_DOUBT_BAND = (1e-16, 1e-8)  # squared-amplitude band where the integer tie-breaker runs


class RoundingUnsafeError(ArithmeticError):
    """Double precision cannot certify the integer rounding."""


class NotApplicableError(ValueError):
    """The requested construction does not exist for this parameter."""


@dataclass(frozen=True)
class IdealPatternSet:
    spec: UnitarySpec
    amplitudes: dict[tuple[int, ...], complex] = field(repr=False)

    @property
    def patterns(self) -> set[tuple[int, ...]]:
        return set(self.amplitudes)

    def tails(self) -> set[tuple[int, ...]]:
        return {p[1:] for p in self.amplitudes}


def ztl_check(pattern, n: int) -> bool:
    """Fourier zero transmission law: sum_i i*s_i = 0 (mod n)."""
    return sum(i * s for i, s in enumerate(pattern)) % n == 0


def xor_check(pattern, r: int) -> bool:
    """Hadamard law: bitwise XOR over the mode list vanishes."""
    acc = 0
    for g in fock.to_mode_list(pattern):
        acc ^= g
    return acc == 0


def generalized_ztl_check(pattern, factors: tuple[int, ...]) -> bool:
    """Componentwise law: each factor's digit sum over photons is 0 mod n_i."""
    sums = [0] * len(factors)
    for mode, count in enumerate(pattern):
        if count:
            for i, d in enumerate(digits(mode, factors)):
                sums[i] += d * count
    return all(s % f == 0 for s, f in zip(sums, factors))


def complete_pattern(partial_modes, factors: tuple[int, ...]) -> int:
    """The unique mode completing n-1 photons to a law-satisfying pattern."""
    sums = [0] * len(factors)
    for g in partial_modes:
        for i, d in enumerate(digits(g, factors)):
            sums[i] += d
    mode = 0
    stride = 1
    for i, f in enumerate(factors):
        mode += ((-sums[i]) % f) * stride
        stride *= f
    return mode


def amplitude_all_ones(pattern, u: UnitaryMatrix) -> complex:
    """<s| U-hat |1...1> = perm(U_s) / sqrt(prod s_i!), rows repeated per count."""
    rows = fock.to_mode_list(pattern)
    if len(rows) != u.n:
        raise ValueError(f"pattern has {len(rows)} photons, matrix size is {u.n}")
    sub = u.entries[list(rows), :]
    norm = math.sqrt(math.prod(math.factorial(c) for c in pattern))
    return permanent(sub) / norm


def circulant_coefficient(mode_list, n: int) -> int:
    """Exact integer permanent of the root-of-unity matrix with rows w^(g_j * k).

    Equals (up to the known normalization) the coefficient extracted from the
    generic circulant determinant; vanishes iff the corresponding output
    amplitude from the all-ones input is exactly zero.
    """
    g = list(mode_list)
    if len(g) != n or any(not 0 <= v < n for v in g):
        raise ValueError(f"need {n} mode entries in [0, {n}), got {g}")
    w = np.exp(2j * np.pi * np.arange(n) / n)
    mat = w[(np.outer(g, np.arange(n)) % n)]
    val = permanent(mat)
    nearest = round(val.real)
    resid = abs(val - nearest)
    if resid >= 0.25:
        raise RoundingUnsafeError(
            f"residual {resid:.3g} >= 0.25 rounding permanent at n={n}"
        )
    return int(nearest)


def _candidate_patterns(spec: UnitarySpec):
    """Law-satisfying patterns with s_0 = 1, generated via unique completion.

    Place one photon in mode 0, choose the next n-2 photons as an arbitrary
    multiset of modes, and let the law determine the final photon's mode.
    """
    n = spec.n
    seen = set()
    for rest in itertools.combinations_with_replacement(range(n), n - 2):
        last = complete_pattern((0,) + rest, spec.factors)
        pattern = fock.to_pattern((0, last) + rest, n)
        if pattern[0] != 1:
            continue
        if pattern not in seen:
            seen.add(pattern)
            yield pattern


def enumerate_ideal_patterns(
    spec_or_matrix: UnitarySpec | UnitaryMatrix, tol: float = SUPPRESSION_TOL
) -> IdealPatternSet:
    """All patterns with s_0 = 1 and unsuppressed amplitude from |1...1>.

    Candidates are restricted by the symmetry law when one exists; amplitudes
    come from a single truncated evolution of the all-ones input.  For Fourier
    matrices, squared amplitudes falling in the numeric doubt band are settled
    by the exact integer circulant coefficient.
    """
    if isinstance(spec_or_matrix, UnitaryMatrix):
        u, spec = spec_or_matrix, spec_or_matrix.spec
    else:
        spec, u = spec_or_matrix, build(spec_or_matrix)
    n = spec.n
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    amp_map = evolve_modes(u, range(n), truncate_mode0=True)
    if spec.kind in ("fourier", "hadamard", "ftuple"):
        candidates = _candidate_patterns(spec)
    else:
        candidates = (
            (1,) + tail for tail in fock.patterns(n - 1, n - 1)
        )
    amplitudes = {}
    for pattern in candidates:
        amp = amp_map.entries.get(pattern, 0j)
        p = abs(amp) ** 2
        if spec.kind == "fourier" and _DOUBT_BAND[0] < p < _DOUBT_BAND[1]:
            if circulant_coefficient(fock.to_mode_list(pattern), n) == 0:
                continue
            amplitudes[pattern] = amp
        elif p >= tol:
            amplitudes[pattern] = amp
    return IdealPatternSet(spec, dict(sorted(amplitudes.items())))


def _is_prime_power(n: int) -> bool:
    for p in range(2, n + 1):
        if n % p == 0:
            while n % p == 0:
                n //= p
            return n == 1
    return False


def ztl_counterexample(n: int) -> tuple[int, ...]:
    """A law-satisfying pattern with s_0 = 1 and exactly zero amplitude.

    Exists precisely when n is not a prime power.  Writes n = q1 * q2 with q2
    the full power of the smallest prime factor, picks the minimal Bezout pair
    c1*q1 = 1 + c2*q2, assembles the suppressed mode list, and cyclically
    shifts the smallest multiplicity-one mode into mode 0.
    """
    if n < 6 or _is_prime_power(n):
        raise NotApplicableError(f"{n} is a prime power; no counterexample exists")
    p = next(q for q in range(2, n) if n % q == 0)
    q2 = 1
    m = n
    while m % p == 0:
        q2 *= p
        m //= p
    q1 = n // q2
    c1 = next(c for c in range(1, q2 + 1) if (c * q1) % q2 == 1)
    c2 = (c1 * q1 - 1) // q2
    m1 = c2 * q2 - 1
    m0 = n - c2 * q2 - 2
    a1 = c2 * q2 - c1 * c2 + 1
    a2 = n - c2 * q2
    a3 = n - c2 * q2 + c1 * c2
    g = (0,) * m0 + (1,) * m1 + (a1, a2, a3)
    pattern = fock.to_pattern(g, n)
    shift = min(mode for mode, count in enumerate(pattern) if count == 1)
    shifted = tuple(sorted((mode - shift) % n for mode in g))
    return fock.to_pattern(shifted, n)


def verify_prime_power_law(n: int) -> dict:
    """Compare {law and s_0 = 1} against the true ideal set; report exceptions."""
    spec = UnitarySpec("fourier", factors=(n,))
    ideal = enumerate_ideal_patterns(spec)
    law_set = sorted(_candidate_patterns(spec))
    exceptions = [p for p in law_set if p not in ideal.amplitudes]
    return {
        "n": n,
        "prime_power": _is_prime_power(n),
        "total_ztl_s0_1": len(law_set),
        "ideal": len(ideal.amplitudes),
        "exceptions": exceptions,
    }
