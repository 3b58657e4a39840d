"""Protocol unitaries and their mode symmetries.

Supported matrices: the n-mode discrete Fourier transform F_n, tensor powers
of the 2x2 Hadamard H_n = H^{(x)r}, general tensor products
F_{(n_1,...,n_l)} = F_{n_1} (x) ... (x) F_{n_l}, Haar-random unitaries, and
custom matrices loaded from JSON.

Tensor-product modes are labelled in mixed radix with the least significant
factor first: mode g decomposes as g = m_1 + n_1 m_2 + n_1 n_2 m_3 + ...,
which makes the first row of every tensor Fourier matrix constant (1/sqrt n).
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

UNITARITY_TOL = 1e-12
CUSTOM_UNITARITY_TOL = 1e-9


class SpecError(ValueError):
    """Invalid unitary specification."""


@dataclass(frozen=True)
class UnitarySpec:
    """Symbolic description of a protocol unitary.

    kind is one of "fourier", "hadamard", "ftuple", "haar", "custom".
    factors holds the tensor factor sizes for the first three kinds.
    """

    kind: str
    factors: tuple[int, ...] = ()
    size: int = 0
    seed: int = 0
    label: str = ""

    @property
    def n(self) -> int:
        if self.factors:
            return math.prod(self.factors)
        return self.size

    def key(self) -> str:
        if self.kind == "fourier":
            return f"fourier:{self.factors[0]}"
        if self.kind == "hadamard":
            return f"hadamard:{len(self.factors)}"
        if self.kind == "ftuple":
            return "ftuple:" + ",".join(str(f) for f in self.factors)
        if self.kind == "haar":
            return f"haar:{self.size}:seed={self.seed}"
        return f"custom:{self.label}"

    def __str__(self) -> str:
        return self.key()


def fourier(n: int) -> UnitarySpec:
    if n < 3:
        raise SpecError(f"fourier spec needs n >= 3, got {n}")
    return UnitarySpec("fourier", factors=(n,))


def hadamard(r: int) -> UnitarySpec:
    if r < 2:
        raise SpecError(f"hadamard spec needs r >= 2, got {r}")
    return UnitarySpec("hadamard", factors=(2,) * r)


def ftuple(ns: tuple[int, ...]) -> UnitarySpec:
    ns = tuple(int(v) for v in ns)
    if any(v < 2 for v in ns) or math.prod(ns) <= 2:
        raise SpecError(f"ftuple spec needs every factor >= 2 and product > 2, got {ns}")
    return UnitarySpec("ftuple", factors=ns)


def haar(n: int, seed: int) -> UnitarySpec:
    if n < 2:
        raise SpecError(f"haar spec needs n >= 2, got {n}")
    return UnitarySpec("haar", size=n, seed=int(seed))


@dataclass(frozen=True)
class UnitaryMatrix:
    """A realized n x n complex matrix together with its spec."""

    entries: np.ndarray = field(repr=False)
    spec: UnitarySpec

    def __post_init__(self):
        self.entries.setflags(write=False)
        resid = unitarity_residual(self.entries)
        tol = CUSTOM_UNITARITY_TOL if self.spec.kind == "custom" else UNITARITY_TOL
        if resid >= tol:
            raise SpecError(f"matrix is not unitary (residual {resid:.3g} >= {tol:g})")

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class SymmetryGenerator:
    """Mode permutation P with diagonal phases D satisfying U P = D U.

    perm maps column index j to sigma(j): (U P)[:, j] = U[:, perm[j]].
    """

    perm: tuple[int, ...]
    phases: tuple[complex, ...]


def unitarity_residual(u: np.ndarray) -> float:
    n = u.shape[0]
    return float(np.abs(u @ u.conj().T - np.eye(n)).max())


def digits(g: int, factors: tuple[int, ...]) -> tuple[int, ...]:
    """Mixed-radix digits of a mode label, least significant factor first."""
    out = []
    for f in factors:
        out.append(g % f)
        g //= f
    return tuple(out)


def _fourier_entries(n: int) -> np.ndarray:
    ij = np.outer(np.arange(n), np.arange(n))
    return np.exp(2j * np.pi * ij / n) / math.sqrt(n)


def build(spec: UnitarySpec) -> UnitaryMatrix:
    """Realize a spec as a matrix."""
    if spec.kind in ("fourier", "hadamard", "ftuple"):
        u = np.array([[1.0 + 0j]])
        for f in spec.factors:
            # later factors are more significant: U[g, h] = prod_i F_i[m_i(g), m_i(h)]
            u = np.kron(_fourier_entries(f), u)
        return UnitaryMatrix(u, spec)
    if spec.kind == "haar":
        return UnitaryMatrix(_sample_haar_entries(spec.size, spec.seed), spec)
    raise SpecError(f"cannot build spec of kind {spec.kind!r} without a matrix")


def _sample_haar_entries(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    # fix the phase ambiguity: make the diagonal of R real positive
    d = np.diag(r)
    q = q * (d / np.abs(d))[np.newaxis, :]
    return q


def sample_haar(n: int, seed: int) -> UnitaryMatrix:
    """Haar-random unitary via QR of a complex Ginibre matrix; deterministic per seed."""
    return build(haar(n, seed))


def load_custom(path: str | Path, label: str = "") -> UnitaryMatrix:
    """Load a custom matrix from JSON: row-major list of rows of [re, im] pairs."""
    raw = json.loads(Path(path).read_text())
    u = np.array([[complex(re, im) for re, im in row] for row in raw])
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise SpecError(f"custom matrix must be square, got shape {u.shape}")
    spec = UnitarySpec("custom", size=u.shape[0], label=label or str(path))
    return UnitaryMatrix(u, spec)


def from_matrix(u: np.ndarray, label: str = "matrix") -> UnitaryMatrix:
    """Wrap an in-memory matrix as a custom UnitaryMatrix."""
    u = np.array(u, dtype=complex)
    return UnitaryMatrix(u, UnitarySpec("custom", size=u.shape[0], label=label))


def symmetry_generators(spec: UnitarySpec) -> list[SymmetryGenerator]:
    """Generators of the abelian mode-symmetry group (one cyclic shift per factor).

    For an unknown matrix (haar/custom) there is no known symmetry: empty list.
    """
    if spec.kind not in ("fourier", "hadamard", "ftuple"):
        return []
    n = spec.n
    gens = []
    stride = 1
    for f in spec.factors:
        perm = [0] * n
        phases = [0j] * n
        for g in range(n):
            d = (g // stride) % f
            perm[g] = g + stride * ((d + 1) % f - d)
            phases[g] = cmath.exp(2j * cmath.pi * d / f)
        gens.append(SymmetryGenerator(tuple(perm), tuple(phases)))
        stride *= f
    return gens


def verify_generator(u: UnitaryMatrix, gen: SymmetryGenerator) -> float:
    """Max-norm of U P - D U for a claimed symmetry generator."""
    perm = np.array(gen.perm)
    d = np.array(gen.phases)
    return float(np.abs(u.entries[:, perm] - d[:, np.newaxis] * u.entries).max())


def parse_spec(text: str) -> UnitarySpec:
    """Parse CLI spec strings: fourier:8, hadamard:3, ftuple:4,2, haar:6:seed=7."""
    parts = text.strip().split(":")
    kind = parts[0].lower()
    try:
        if kind == "fourier":
            return fourier(int(parts[1]))
        if kind == "hadamard":
            return hadamard(int(parts[1]))
        if kind == "ftuple":
            return ftuple(tuple(int(v) for v in parts[1].split(",")))
        if kind == "haar":
            seed = 0
            for extra in parts[2:]:
                k, _, v = extra.partition("=")
                if k != "seed":
                    raise SpecError(f"unknown haar option {k!r}")
                seed = int(v)
            return haar(int(parts[1]), seed)
    except (IndexError, ValueError) as exc:
        raise SpecError(f"cannot parse spec {text!r}: {exc}") from exc
    raise SpecError(f"unknown spec kind {kind!r}")
