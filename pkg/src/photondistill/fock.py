"""Fock-basis bookkeeping.

Dimensions, canonical (lexicographic) ranking of occupation patterns, and
conversions between second quantization (photon counts per mode) and first
quantization (weakly increasing mode lists).
"""
from __future__ import annotations

import math
from typing import Iterator, Sequence

Pattern = tuple[int, ...]
ModeList = tuple[int, ...]


def dimension(n_photons: int, m_modes: int) -> int:
    """Number of n-photon patterns over m modes: C(n+m-1, n), exact."""
    if n_photons < 0 or m_modes < 1:
        raise ValueError(f"need n_photons >= 0 and m_modes >= 1, got {n_photons}, {m_modes}")
    return math.comb(n_photons + m_modes - 1, n_photons)


def validate_pattern(counts: Sequence[int]) -> Pattern:
    s = tuple(int(c) for c in counts)
    if any(c < 0 for c in s):
        raise ValueError(f"negative count in pattern {s}")
    return s


def encode(counts: Sequence[int]) -> bytes:
    """Canonical injective byte encoding (counts fit a byte at desk scale)."""
    return bytes(counts)


def rank(counts: Sequence[int]) -> int:
    """Lexicographic rank of a pattern among all with the same (n, m)."""
    s = validate_pattern(counts)
    m = len(s)
    rem = sum(s)
    r = 0
    for i, c in enumerate(s[:-1]):
        # patterns with a smaller count at position i come first
        for v in range(c):
            r += dimension(rem - v, m - i - 1)
        rem -= c
    return r


def unrank(index: int, n_photons: int, m_modes: int) -> Pattern:
    """Inverse of rank for fixed photon number and mode count."""
    if not 0 <= index < dimension(n_photons, m_modes):
        raise IndexError(f"index {index} out of range for ({n_photons}, {m_modes})")
    counts = []
    rem = n_photons
    r = index
    for i in range(m_modes - 1):
        v = 0
        while True:
            block = dimension(rem - v, m_modes - i - 1)
            if r < block:
                break
            r -= block
            v += 1
        counts.append(v)
        rem -= v
    counts.append(rem)
    return tuple(counts)


def patterns(n_photons: int, m_modes: int) -> Iterator[Pattern]:
    """All patterns in lexicographic order."""
    if m_modes == 1:
        yield (n_photons,)
        return
    for c in range(n_photons + 1):
        for rest in patterns(n_photons - c, m_modes - 1):
            yield (c,) + rest


def to_mode_list(counts: Sequence[int]) -> ModeList:
    """Weakly increasing list of occupied modes, one entry per photon."""
    s = validate_pattern(counts)
    out = []
    for mode, c in enumerate(s):
        out.extend([mode] * c)
    return tuple(out)


def to_pattern(modes: Sequence[int], m_modes: int) -> Pattern:
    """Count multiplicities of a mode list into a length-m pattern."""
    counts = [0] * m_modes
    for g in modes:
        if not 0 <= g < m_modes:
            raise ValueError(f"mode index {g} out of range [0, {m_modes})")
        counts[g] += 1
    return tuple(counts)
