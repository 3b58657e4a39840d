"""Sparse amplitude engine.

Evolves a product of creation operators through a linear-optical unitary one
photon at a time.  With truncation enabled, any intermediate configuration
with two or more photons in mode 0 is discarded (photon additions never
decrease an occupancy, so such configurations can never be post-selected on a
single photon in mode 0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .unitary import UnitaryMatrix

PRUNE_TOL = 1e-14
MAX_PERMANENT_SIZE = 20


class BudgetExceededError(RuntimeError):
    """State space or matrix size exceeds the configured desk limit."""


@dataclass(frozen=True)
class AmplitudeMap:
    """Sparse association pattern -> complex amplitude on a truncated subspace."""

    photon_count: int
    mode_count: int
    entries: dict[tuple[int, ...], complex] = field(repr=False)
    truncated: bool = False

    def norm_sq(self) -> float:
        return sum(abs(a) ** 2 for a in self.entries.values())


def evolve_modes(
    u: UnitaryMatrix | np.ndarray,
    input_modes: Sequence[int],
    truncate_mode0: bool = False,
    prune: float = PRUNE_TOL,
) -> AmplitudeMap:
    """Output amplitudes of prod_j (sum_i U[i, g_j] a_i+) |0> with bosonic factors.

    The result is sub-normalized when truncation is on; entries are stored in
    canonical (lexicographic) pattern order for bit-stable serialization.
    """
    mat = u.entries if isinstance(u, UnitaryMatrix) else np.asarray(u)
    m = mat.shape[0]
    for g in input_modes:
        if not 0 <= g < m:
            raise ValueError(f"input mode {g} out of range [0, {m})")
    keys, amps = _evolve_packed(mat, tuple(input_modes), truncate_mode0, prune)
    bits = _bits_per_mode(len(input_modes))
    entries = {}
    order = np.argsort(keys, kind="stable")
    for idx in order:
        entries[_unpack(int(keys[idx]), m, bits)] = complex(amps[idx])
    return AmplitudeMap(len(input_modes), m, entries, truncate_mode0)


def _bits_per_mode(n_photons: int) -> int:
    bits = max(n_photons, 1).bit_length()
    return bits


def _pack_capacity(m_modes: int, bits: int) -> bool:
    return m_modes * bits <= 63


def _unpack(key: int, m: int, bits: int) -> tuple[int, ...]:
    mask = (1 << bits) - 1
    return tuple((key >> (bits * i)) & mask for i in range(m))


def pack_pattern(counts: Sequence[int], bits: int) -> int:
    key = 0
    for i, c in enumerate(counts):
        key |= int(c) << (bits * i)
    return key


def _evolve_packed(
    mat: np.ndarray,
    input_modes: tuple[int, ...],
    truncate_mode0: bool,
    prune: float,
    bits: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized photon-at-a-time evolution on bit-packed pattern keys."""
    m = mat.shape[0]
    n = len(input_modes)
    if bits is None:
        bits = _bits_per_mode(n)
    if not _pack_capacity(m, bits):
        raise BudgetExceededError(f"{n} photons in {m} modes exceeds the packed-key budget")
    keys = np.zeros(1, dtype=np.int64)
    amps = np.ones(1, dtype=np.complex128)
    mask = (1 << bits) - 1
    sqrt = np.sqrt(np.arange(n + 2, dtype=float))
    for g in input_modes:
        new_keys = []
        new_amps = []
        for i in range(m):
            c = mat[i, g]
            if abs(c) < prune:
                continue
            occ = (keys >> (bits * i)) & mask
            if truncate_mode0 and i == 0:
                keep = occ < 1
                if not keep.any():
                    continue
                k, a, o = keys[keep], amps[keep], occ[keep]
            else:
                k, a, o = keys, amps, occ
            new_keys.append(k + (np.int64(1) << np.int64(bits * i)))
            new_amps.append(a * (c * sqrt[o + 1]))
        keys = np.concatenate(new_keys)
        amps = np.concatenate(new_amps)
        # merge duplicate configurations deterministically by sorted key
        keys, inverse = np.unique(keys, return_inverse=True)
        merged = np.zeros(len(keys), dtype=np.complex128)
        np.add.at(merged, inverse, amps)
        amps = merged
        keep = np.abs(amps) >= prune
        keys, amps = keys[keep], amps[keep]
    return keys, amps


def permanent(mat: np.ndarray) -> complex:
    """Permanent of a square matrix by Ryser's formula with Gray-code updates."""
    mat = np.asarray(mat)
    n = mat.shape[0]
    if mat.ndim != 2 or mat.shape[1] != n:
        raise ValueError(f"permanent needs a square matrix, got shape {mat.shape}")
    if n > MAX_PERMANENT_SIZE:
        raise BudgetExceededError(f"permanent size {n} exceeds limit {MAX_PERMANENT_SIZE}")
    if n == 0:
        return 1.0 + 0j
    rows = [tuple(row) for row in mat]
    sums = [0j] * n
    total = 0j
    prev_gray = 0
    sign = 1
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        j = (prev_gray ^ gray).bit_length() - 1
        if gray & (1 << j):
            for i in range(n):
                sums[i] += rows[i][j]
        else:
            for i in range(n):
                sums[i] -= rows[i][j]
        prev_gray = gray
        sign = -sign
        prod = 1.0 + 0j
        for s in sums:
            prod *= s
        total += sign * prod
    if n % 2:
        total = -total
    return total
