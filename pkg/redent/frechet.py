"""First derivatives of trace functions.

``d/dt Tr f(X + tY) Z`` in general form uses the Daleckii-Krein formula
``U (f^[1](w_i, w_j) o U*YU) U*``; when ``XZ = ZX`` it collapses to
``Tr Y f'(X) Z``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from redent.errors import CommutationViolation, DomainViolation
from redent.linalg import apply_fn, as_array, as_hermitian, same_dim, trace_product

MERGE_TOL = 1e-8
COMMUTE_TOL = 1e-9

RealFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class DividedDifferenceTable:
    values: np.ndarray
    eigenvalues: np.ndarray
    f_name: str


def _evaluate(f: RealFunction, x: np.ndarray, label: str) -> np.ndarray:
    with np.errstate(all="ignore"):
        values = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(values)):
        bad = np.asarray(x)[~np.isfinite(values)]
        raise DomainViolation(float(bad.flat[0]), f"{label} finite")
    return values


def divided_difference(
    f: RealFunction,
    f_prime: RealFunction,
    eigenvalues,
    merge_tol: float = MERGE_TOL,
    f_name: str | None = None,
) -> DividedDifferenceTable:
    w = np.asarray(eigenvalues, dtype=float)
    name = f_name or getattr(f, "__name__", "f")
    fw = _evaluate(f, w, name)
    x, y = w[:, np.newaxis], w[np.newaxis, :]
    gap = x - y
    merged = np.abs(gap) <= merge_tol * (1.0 + np.abs(x) + np.abs(y))
    slopes = (fw[:, np.newaxis] - fw[np.newaxis, :]) / np.where(merged, 1.0, gap)
    midpoint = _evaluate(f_prime, (x + y) / 2.0, f"{name}'")
    values = np.where(merged, midpoint, slopes)
    # exact symmetry regardless of rounding in the slopes
    values = (values + values.T) / 2.0
    return DividedDifferenceTable(values, w, name)


def trace_derivative_i(f_prime: RealFunction, A, B) -> float:
    """``Tr f'(A) B``."""
    A = as_hermitian(A)
    B = as_hermitian(B)
    same_dim(A, B)
    fp = apply_fn(A, lambda w: _evaluate(f_prime, w, "f'"))
    return trace_product(fp, B).real


def commutator_norm(X, Z) -> float:
    x, z = as_array(X), as_array(Z)
    return float(np.linalg.norm(x @ z - z @ x, 2))


def trace_derivative_ii(f: RealFunction, f_prime: RealFunction, X, Y, Z, commute_tol: float = COMMUTE_TOL) -> float:
    """``Tr Y f'(X) Z`` for ``X`` commuting with ``Z``."""
    X, Y, Z = as_hermitian(X), as_hermitian(Y), as_hermitian(Z)
    same_dim(X, Y, Z)
    norm = commutator_norm(X, Z)
    if norm > commute_tol * (1.0 + X.norm * Z.norm):
        raise CommutationViolation(norm)
    _evaluate(f, X.eigenvalues, "f")
    fp = apply_fn(X, lambda w: _evaluate(f_prime, w, "f'"))
    return trace_product(Y.data @ fp.data, Z).real


def full_frechet_trace_derivative(f: RealFunction, X, Y, Z, *, f_prime: RealFunction) -> float:
    """``Tr[U (f^[1] o U*YU) U* Z]``, valid without any commutation hypothesis."""
    X, Y, Z = as_hermitian(X), as_hermitian(Y), as_hermitian(Z)
    same_dim(X, Y, Z)
    U = X.eigen.eigenvectors
    table = divided_difference(f, f_prime, X.eigenvalues)
    derivative = U @ (table.values * (U.conj().T @ Y.data @ U)) @ U.conj().T
    return trace_product(derivative, Z).real


def central_difference(g: Callable[[float], float], h: float) -> float:
    """``(g(h) - g(-h)) / 2h``."""
    return (g(h) - g(-h)) / (2.0 * h)


def trace_function_fd(f: RealFunction, X, Y, Z=None, h: float = 1e-5) -> float:
    """Central difference of ``t -> Tr f(X + tY) Z`` at ``t = 0``."""
    x, y = as_array(as_hermitian(X)), as_array(as_hermitian(Y))
    z = np.eye(x.shape[0]) if Z is None else as_array(Z)

    def g(t: float) -> float:
        return trace_product(apply_fn(x + t * y, f), z).real

    return central_difference(g, h)
