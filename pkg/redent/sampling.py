"""Seeded generators for every constrained matrix class the checks consume.

Each draw uses its own counter-based Philox stream keyed by ``(seed, stream)``,
so the same :class:`SamplerSpec` always produces the same bits and sibling
streams never correlate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from redent.errors import InvalidSpec
from redent.linalg import (
    Contraction,
    HermitianMatrix,
    PositiveDefiniteMatrix,
    SquareMatrix,
)

DEFAULT_SPECTRUM = (0.2, 5.0)
DEFAULT_SIGMA_MIN = 0.1
FIELDS = ("real", "complex")


@dataclass(frozen=True)
class SamplerSpec:
    dim: int
    spectrum_lo: float = DEFAULT_SPECTRUM[0]
    spectrum_hi: float = DEFAULT_SPECTRUM[1]
    field: str = "complex"
    seed: int = 0
    stream: tuple[int, ...] = ()

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise InvalidSpec(f"dim must be a positive integer, got {self.dim!r}")
        if not 0 < self.spectrum_lo <= self.spectrum_hi:
            raise InvalidSpec(
                f"need 0 < spectrum_lo <= spectrum_hi, got [{self.spectrum_lo}, {self.spectrum_hi}]"
            )
        if self.field not in FIELDS:
            raise InvalidSpec(f"field must be one of {FIELDS}, got {self.field!r}")
        if not 0 <= self.seed < 2**64:
            raise InvalidSpec(f"seed must fit in 64 bits, got {self.seed!r}")
        if any(s < 0 for s in self.stream):
            raise InvalidSpec(f"stream keys must be non-negative, got {self.stream!r}")

    def child(self, *keys: int) -> SamplerSpec:
        return replace(self, stream=self.stream + tuple(int(k) for k in keys))

    def with_spectrum(self, lo: float, hi: float) -> SamplerSpec:
        return replace(self, spectrum_lo=lo, spectrum_hi=hi)

    def rng(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.Philox(sequence))


def _gaussian(spec: SamplerSpec, rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    if spec.field == "real":
        return rng.standard_normal((rows, cols))
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2.0)


def _orthonormal_columns(G: np.ndarray) -> np.ndarray:
    Q, R = np.linalg.qr(G)
    d = np.diagonal(R)
    phases = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1.0), 1.0)
    return Q * phases[np.newaxis, :]


def _unitary(spec: SamplerSpec, rng: np.random.Generator) -> np.ndarray:
    return _orthonormal_columns(_gaussian(spec, rng, spec.dim, spec.dim))


def random_unitary(spec: SamplerSpec) -> SquareMatrix:
    return SquareMatrix(_unitary(spec, spec.rng()))


def random_hermitian(spec: SamplerSpec) -> HermitianMatrix:
    """Eigenvalues uniform on ``[-ln hi, ln hi]`` (``[-1, 1]`` when ``hi <= e``).

    The exponential of a sample then has its spectrum inside ``[1/hi, hi]``.
    """
    rng = spec.rng()
    U = _unitary(spec, rng)
    bound = max(math.log(spec.spectrum_hi), 1.0)
    w = rng.uniform(-bound, bound, spec.dim)
    return HermitianMatrix.from_spectrum(w, U)


def random_positive_definite(spec: SamplerSpec) -> PositiveDefiniteMatrix:
    rng = spec.rng()
    U = _unitary(spec, rng)
    w = rng.uniform(spec.spectrum_lo, spec.spectrum_hi, spec.dim)
    return PositiveDefiniteMatrix.from_spectrum(w, U)


def random_density(spec: SamplerSpec) -> PositiveDefiniteMatrix:
    rng = spec.rng()
    U = _unitary(spec, rng)
    w = rng.uniform(spec.spectrum_lo, spec.spectrum_hi, spec.dim)
    return PositiveDefiniteMatrix.from_spectrum(w / w.sum(), U)


def random_contraction(
    spec: SamplerSpec, invertible: bool = False, sigma_min: float = DEFAULT_SIGMA_MIN
) -> Contraction:
    """Gaussian matrix with singular values clipped to ``[sigma_min, 1]``."""
    if invertible and not 0 < sigma_min <= 1:
        raise InvalidSpec(f"sigma_min must lie in (0, 1], got {sigma_min!r}")
    rng = spec.rng()
    G = _gaussian(spec, rng, spec.dim, spec.dim) / math.sqrt(spec.dim)
    U, s, Vh = np.linalg.svd(G)
    s = np.clip(s, sigma_min if invertible else 0.0, 1.0)
    return Contraction((U * s) @ Vh, require_invertible=invertible)


def random_partition_of_identity(spec: SamplerSpec, k: int) -> list[Contraction]:
    """``k`` row blocks of a random ``(k n) x n`` isometry; ``sum H_j* H_j = I``."""
    if k < 1:
        raise InvalidSpec(f"k must be at least 1, got {k!r}")
    n = spec.dim
    V = _orthonormal_columns(_gaussian(spec, spec.rng(), k * n, n))
    return [Contraction(V[j * n:(j + 1) * n, :]) for j in range(k)]


def random_ordered_triple(spec: SamplerSpec) -> tuple[PositiveDefiniteMatrix, PositiveDefiniteMatrix]:
    """``(X, Y)`` with ``Y = I + P1`` and ``X = Y + P2``, ``P1, P2 > 0``."""
    eye = np.eye(spec.dim)
    P1 = random_positive_definite(spec.child(0))
    P2 = random_positive_definite(spec.child(1))
    Y = PositiveDefiniteMatrix(eye + P1.data)
    X = PositiveDefiniteMatrix(Y.data + P2.data)
    return X, Y


def random_direction(spec: SamplerSpec, *, trace_zero: bool = True) -> HermitianMatrix:
    """Unit Frobenius-norm Hermitian direction, trace-free by default."""
    G = _gaussian(spec, spec.rng(), spec.dim, spec.dim)
    D = (G + G.conj().T) / 2.0
    if trace_zero and spec.dim > 1:
        D = D - np.trace(D) / spec.dim * np.eye(spec.dim)
    return HermitianMatrix(D / np.linalg.norm(D))
