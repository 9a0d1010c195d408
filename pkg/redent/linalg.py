"""Dense complex Hermitian linear algebra on validated, immutable matrix classes.

All matrix functions in redent are spectral: ``f(M) = U f(diag(w)) U*`` with the
eigen decomposition cached on the :class:`HermitianMatrix` instance.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.linalg

from redent.errors import (
    ConvergenceFailure,
    DomainViolation,
    ImaginaryResidue,
    InvalidMatrix,
    NotAContraction,
    NotHermitian,
    NotInvertible,
    NotPositiveDefinite,
    NotUnitary,
    ShapeMismatch,
)

HERMITIAN_TOL = 1e-10
PD_FLOOR = 1e-12
CONTRACTION_TOL = 1e-10
SIGMA_MIN_FLOOR = 1e-8
PSD_CLAMP = 1e-10
IMAGINARY_TOL = 1e-10
UNITARY_TOL = 1e-10
PHASE_TOL = 1e-10

ScalarMap = Callable[[np.ndarray], np.ndarray]
Guard = Callable[[np.ndarray], np.ndarray]


def _frozen(data: np.ndarray) -> np.ndarray:
    data.setflags(write=False)
    return data


class SquareMatrix:
    """A finite, dense, complex ``dim x dim`` matrix."""

    def __init__(self, entries):
        if isinstance(entries, SquareMatrix):
            self._data = entries._data
            return
        data = np.array(entries, dtype=np.complex128)
        if data.ndim == 0:
            data = data.reshape(1, 1)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] == 0:
            raise InvalidMatrix(f"expected a non-empty square matrix, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise InvalidMatrix("matrix has NaN or infinite entries")
        self._data = _frozen(data)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    @property
    def adjoint(self) -> np.ndarray:
        """Conjugate transpose as a plain array."""
        return self._data.conj().T

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._data.copy() if copy else self._data
        return self._data.astype(dtype)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class HermitianMatrix(SquareMatrix):
    """Hermitian matrix stored in exactly symmetrized form."""

    def __init__(self, entries, *, tol: float = HERMITIAN_TOL, eigen: EigenDecomposition | None = None):
        super().__init__(entries)
        if isinstance(entries, HermitianMatrix):
            if "eigen" in entries.__dict__:
                self.__dict__["eigen"] = entries.__dict__["eigen"]
        else:
            data = self._data
            skew = float(np.max(np.abs(data - data.conj().T)))
            if skew > tol * (1.0 + float(np.max(np.abs(data)))):
                raise NotHermitian(skew)
            self._data = _frozen((data + data.conj().T) / 2)
        if eigen is not None:
            self.__dict__["eigen"] = eigen

    @classmethod
    def from_spectrum(cls, eigenvalues, eigenvectors, **kwargs):
        """Build ``U diag(w) U*`` and seed the eigen cache with ``(w, U)``."""
        w = np.asarray(eigenvalues, dtype=float)
        U = np.asarray(eigenvectors, dtype=np.complex128)
        order = np.argsort(w, kind="stable")
        w, U = w[order], U[:, order]
        data = (U * w) @ U.conj().T
        return cls(data, eigen=EigenDecomposition(_frozen(w), _frozen(U)), **kwargs)

    @classmethod
    def identity(cls, dim: int):
        return cls(np.eye(dim))

    @cached_property
    def eigen(self) -> EigenDecomposition:
        return _eigh(self._data)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eigen.eigenvalues

    @property
    def norm(self) -> float:
        """Spectral norm."""
        w = self.eigen.eigenvalues
        return float(max(abs(w[0]), abs(w[-1])))

    def trace(self) -> float:
        return float(np.trace(self._data).real)

    def __add__(self, other):
        if isinstance(other, HermitianMatrix):
            return HermitianMatrix(self._data + other._data)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, HermitianMatrix):
            return HermitianMatrix(self._data - other._data)
        return NotImplemented

    def __mul__(self, factor):
        if isinstance(factor, (int, float, np.floating)):
            return HermitianMatrix(self._data * float(factor))
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return HermitianMatrix(-self._data)


class PositiveDefiniteMatrix(HermitianMatrix):
    """Hermitian matrix whose smallest eigenvalue exceeds ``floor`` times its largest."""

    def __init__(self, entries, *, floor: float = PD_FLOOR, tol: float = HERMITIAN_TOL, eigen=None):
        super().__init__(entries, tol=tol, eigen=eigen)
        if isinstance(entries, PositiveDefiniteMatrix) and eigen is None:
            return
        w = self.eigen.eigenvalues
        threshold = floor * float(w[-1])
        if not w[-1] > 0 or not w[0] > threshold:
            raise NotPositiveDefinite(float(w[0]), threshold)

    def __add__(self, other):
        if isinstance(other, PositiveDefiniteMatrix):
            return PositiveDefiniteMatrix(self._data + other._data)
        return super().__add__(other)

    def __mul__(self, factor):
        if isinstance(factor, (int, float, np.floating)) and factor > 0:
            return PositiveDefiniteMatrix(self._data * float(factor))
        return super().__mul__(factor)

    __rmul__ = __mul__


class Contraction(SquareMatrix):
    """Matrix with largest singular value at most ``1 + tol``.

    The stored matrix is never modified; ``invertible`` records whether the
    smallest singular value clears ``sigma_min_floor``.
    """

    def __init__(
        self,
        entries,
        *,
        require_invertible: bool = False,
        tol: float = CONTRACTION_TOL,
        sigma_min_floor: float = SIGMA_MIN_FLOOR,
    ):
        super().__init__(entries)
        if isinstance(entries, Contraction):
            self.sigma_max = entries.sigma_max
            self.sigma_min = entries.sigma_min
            self.invertible = entries.invertible
        else:
            data = self._data
            gram = data.conj().T @ data
            s2 = _eigh((gram + gram.conj().T) / 2).eigenvalues
            s = np.sqrt(np.clip(s2, 0.0, None))
            self.sigma_max = float(s[-1])
            self.sigma_min = float(s[0])
            if self.sigma_max > 1.0 + tol:
                raise NotAContraction(self.sigma_max)
            self.invertible = self.sigma_min >= sigma_min_floor
        if require_invertible and not self.invertible:
            raise NotInvertible(self.sigma_min)

    @classmethod
    def identity(cls, dim: int) -> Contraction:
        return cls(np.eye(dim))

    def defect(self) -> HermitianMatrix:
        """``I - H H*``, positive semidefinite for a contraction."""
        return HermitianMatrix(np.eye(self.dim) - self._data @ self.adjoint)


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T

    def apply(self, f: ScalarMap) -> np.ndarray:
        U = self.eigenvectors
        return (U * np.asarray(f(self.eigenvalues), dtype=float)) @ U.conj().T


def _fix_phases(U: np.ndarray) -> np.ndarray:
    # first component above PHASE_TOL of every column is made real positive
    first = np.argmax(np.abs(U) > PHASE_TOL, axis=0)
    pivots = U[first, np.arange(U.shape[1])]
    return U * (pivots.conj() / np.abs(pivots))[np.newaxis, :]


def _eigh(data: np.ndarray) -> EigenDecomposition:
    try:
        w, U = scipy.linalg.eigh(data, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"Hermitian eigensolver failed: {exc}") from exc
    return EigenDecomposition(_frozen(np.asarray(w, dtype=float)), _frozen(_fix_phases(U)))


def as_hermitian(M) -> HermitianMatrix:
    return M if isinstance(M, HermitianMatrix) else HermitianMatrix(M)


def as_positive_definite(M) -> PositiveDefiniteMatrix:
    return M if isinstance(M, PositiveDefiniteMatrix) else PositiveDefiniteMatrix(M)


def as_array(M) -> np.ndarray:
    if isinstance(M, SquareMatrix):
        return M.data
    return np.asarray(M, dtype=np.complex128)


def same_dim(*matrices) -> int:
    dims = [as_array(m).shape for m in matrices]
    if len(set(dims)) != 1:
        raise ShapeMismatch(dims)
    return dims[0][0]


def eig_hermitian(M) -> EigenDecomposition:
    """Eigenvalues ascending, eigenvector phases normalized, result cached on ``M``."""
    return as_hermitian(M).eigen


def apply_fn(
    M,
    f: ScalarMap,
    domain_guard: Guard | None = None,
    *,
    guard_name: str | None = None,
    into: type[HermitianMatrix] = HermitianMatrix,
) -> HermitianMatrix:
    """Spectral calculus: ``U f(diag(w)) U*``.

    Every eigenvalue is checked against ``domain_guard`` before ``f`` is
    evaluated; the first failing eigenvalue is reported.
    """
    M = as_hermitian(M)
    eig = M.eigen
    w = eig.eigenvalues
    name = guard_name or getattr(domain_guard, "__name__", "domain guard")
    if domain_guard is not None:
        ok = np.asarray(domain_guard(w), dtype=bool)
        if not np.all(ok):
            raise DomainViolation(float(w[np.argmin(ok)]), name)
    values = np.asarray(f(w), dtype=float)
    if not np.all(np.isfinite(values)):
        raise DomainViolation(float(w[np.argmin(np.isfinite(values))]), f"finite {name}")
    return into.from_spectrum(values, eig.eigenvectors)


def positive(w: np.ndarray) -> np.ndarray:
    return w > 0


def everywhere(w: np.ndarray) -> np.ndarray:
    return np.ones_like(w, dtype=bool)


def expm(M) -> HermitianMatrix:
    return apply_fn(M, np.exp, everywhere)


def logm(A) -> HermitianMatrix:
    return apply_fn(A, np.log, positive, guard_name="x > 0")


def powm(A, exponent: float) -> HermitianMatrix:
    """``A**exponent`` for positive definite ``A``."""
    return apply_fn(A, lambda w: w**exponent, positive, guard_name="x > 0")


def matrix_power_fractional(M, exponent: float, psd_clamp: float = PSD_CLAMP) -> HermitianMatrix:
    """Power of a matrix that is positive semidefinite up to rounding.

    Eigenvalues in ``[-psd_clamp*||M||, 0)`` are lifted to ``psd_clamp*||M||``.
    """
    M = as_hermitian(M)
    eig = M.eigen
    w = eig.eigenvalues
    floor = psd_clamp * float(np.max(np.abs(w)))
    if w[0] < -floor:
        raise DomainViolation(float(w[0]), f"eigenvalue >= -{psd_clamp:g}*||M||")
    w = np.where(w < 0, floor, w)
    if exponent < 0 and np.any(w == 0):
        raise DomainViolation(0.0, "nonzero eigenvalue for a negative exponent")
    with np.errstate(divide="ignore"):
        powered = w**exponent
    return HermitianMatrix.from_spectrum(powered, eig.eigenvectors)


def gram_matrix(C) -> HermitianMatrix:
    """``C C*`` with its eigen cache taken from the SVD of ``C``.

    Eigenvalues are squared singular values, so they are never negative even
    when ``C C*`` is too ill-conditioned for ``eigh`` to keep them so.
    """
    data = as_array(C)
    try:
        U, s, _ = scipy.linalg.svd(data, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"singular value decomposition failed: {exc}") from exc
    w = np.asarray(s[::-1], dtype=float) ** 2
    eigen = EigenDecomposition(_frozen(w), _frozen(_fix_phases(np.ascontiguousarray(U[:, ::-1]))))
    return HermitianMatrix(data @ data.conj().T, eigen=eigen)


def validate_contraction(M, require_invertible: bool = False) -> Contraction:
    return Contraction(M, require_invertible=require_invertible)


def validate_unitary(U, tol: float = UNITARY_TOL) -> SquareMatrix:
    U = U if isinstance(U, SquareMatrix) else SquareMatrix(U)
    deviation = float(np.max(np.abs(U.adjoint @ U.data - np.eye(U.dim))))
    if deviation > tol:
        raise NotUnitary(deviation)
    return U


def congruence(H, M) -> HermitianMatrix:
    """``H* M H``."""
    h = as_array(H)
    return HermitianMatrix(h.conj().T @ as_array(M) @ h)


def co_congruence(H, M) -> HermitianMatrix:
    """``H M H*``."""
    h = as_array(H)
    return HermitianMatrix(h @ as_array(M) @ h.conj().T)


def trace_product(a, b) -> complex:
    """``Tr(ab)`` without forming the product."""
    return complex(np.sum(as_array(a) * as_array(b).T))


def lowest_eigenvalue(M) -> float:
    return float(as_hermitian(M).eigenvalues[0])


def is_psd(M, slack: float = HERMITIAN_TOL) -> bool:
    M = as_hermitian(M)
    return lowest_eigenvalue(M) >= -slack * (1.0 + M.norm)


@dataclass(frozen=True)
class TraceTerms:
    """Signed trace constituents of a functional.

    ``scale`` is ``1 + sum |term|``; every relative tolerance in redent is
    measured against it.
    """

    terms: tuple[complex, ...]

    @property
    def scale(self) -> float:
        return 1.0 + float(sum(abs(t) for t in self.terms))

    @property
    def total(self) -> complex:
        return complex(sum(self.terms))

    def real(self, tol: float = IMAGINARY_TOL) -> float:
        total = self.total
        if abs(total.imag) > tol * self.scale:
            raise ImaginaryResidue(total.imag, self.scale)
        return total.real

    def __add__(self, other: TraceTerms) -> TraceTerms:
        return TraceTerms(self.terms + other.terms)

    def scaled(self, factor: float) -> TraceTerms:
        return TraceTerms(tuple(factor * t for t in self.terms))
