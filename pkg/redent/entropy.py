"""Reduced relative entropies, quasi-entropies and the maximal f-divergence.

Each functional has a ``*_terms`` variant returning its signed trace
constituents as :class:`~redent.linalg.TraceTerms`; the plain variant returns
the real value after the imaginary-residue check.
"""

from __future__ import annotations

import numpy as np

from redent.deformed import QParameter, log_q_values
from redent.errors import DomainViolation, ParameterViolation, QTooCloseToOne
from redent.functions import T_LOG_T, ScalarFunction
from redent.linalg import (
    Contraction,
    HermitianMatrix,
    SquareMatrix,
    TraceTerms,
    apply_fn,
    as_array,
    as_positive_definite,
    powm,
    same_dim,
    trace_product,
    validate_unitary,
)

ALT_FORM_MIN_GAP = 1e-6


class EntropyInstance:
    """Arguments ``(A, B, H[, q])`` of ``S_H(A|B)`` and ``S_{H,q}(A|B)``."""

    def __init__(self, A, B, H=None, q=None):
        self.A = as_positive_definite(A)
        self.B = as_positive_definite(B)
        if H is None:
            H = np.eye(self.A.dim)
        self.H = H if isinstance(H, Contraction) else Contraction(H)
        self.q = QParameter.of(q) if q is not None else None
        same_dim(self.A, self.B, self.H)

    @property
    def dim(self) -> int:
        return self.A.dim

    def with_q(self, q) -> EntropyInstance:
        return EntropyInstance(self.A, self.B, self.H, q)

    def conjugated(self, U) -> EntropyInstance:
        """``(U A U*, U B U*, H)``."""
        u = as_array(U)
        return EntropyInstance(
            u @ self.A.data @ u.conj().T, u @ self.B.data @ u.conj().T, self.H, self.q
        )

    def __repr__(self):
        return f"EntropyInstance(dim={self.dim}, q={self.q})"


def _hah(inst: EntropyInstance, M) -> np.ndarray:
    h = inst.H.data
    return h.conj().T @ as_array(M) @ h


def reduced_relative_entropy_terms(inst: EntropyInstance) -> TraceTerms:
    A, B = inst.A, inst.B
    a_log_a = A.eigen.apply(lambda w: w * np.log(w))
    log_b = B.eigen.apply(np.log)
    return TraceTerms(
        (
            complex(np.trace(a_log_a)),
            -trace_product(_hah(inst, A), log_b),
            -complex(np.trace(A.data)),
            complex(np.trace(B.data)),
        )
    )


def reduced_relative_entropy(inst: EntropyInstance) -> float:
    """``Tr[A log A - H*AH log B - A + B]``."""
    return reduced_relative_entropy_terms(inst).real()


def _require_q(inst: EntropyInstance) -> QParameter:
    if inst.q is None:
        raise ParameterViolation("this functional needs an instance with q set")
    return inst.q


def reduced_tsallis_terms(inst: EntropyInstance) -> TraceTerms:
    q = _require_q(inst)
    if q.is_classical:
        return reduced_relative_entropy_terms(inst)
    A, B = inst.A, inst.B
    first = A.eigen.apply(lambda w: w ** (2.0 - q.q) * log_q_values(w, q))
    a_pow = A.eigen.apply(lambda w: w ** (2.0 - q.q))
    log_q_b = B.eigen.apply(lambda w: log_q_values(w, q))
    return TraceTerms(
        (
            complex(np.trace(first)),
            -trace_product(_hah(inst, a_pow), log_q_b),
            -complex(np.trace(A.data)),
            complex(np.trace(B.data)),
        )
    )


def reduced_tsallis_entropy(inst: EntropyInstance) -> float:
    """``Tr[A^{2-q} log_q A - H* A^{2-q} H log_q B - A + B]``."""
    return reduced_tsallis_terms(inst).real()


def reduced_tsallis_alt_terms(inst: EntropyInstance) -> TraceTerms:
    q = _require_q(inst)
    if abs(q.r) < ALT_FORM_MIN_GAP:
        raise QTooCloseToOne(q.q)
    A, B, H = inst.A, inst.B, inst.H.data
    r = q.r
    a_pow = A.eigen.apply(lambda w: w ** (2.0 - q.q))
    b_pow = B.eigen.apply(lambda w: w**r)
    hh_minus_i = H @ H.conj().T - np.eye(inst.dim)
    return TraceTerms(
        (
            (2.0 - q.q) / r * complex(np.trace(A.data)),
            complex(np.trace(B.data)),
            trace_product(hh_minus_i, a_pow) / r,
            -trace_product(_hah(inst, a_pow), b_pow) / r,
        )
    )


def reduced_tsallis_alt(inst: EntropyInstance) -> float:
    """Expanded form of ``S_{H,q}``; singular at ``q = 1``."""
    return reduced_tsallis_alt_terms(inst).real()


def quasi_entropy_terms(rho, sigma, X, f: ScalarFunction) -> TraceTerms:
    rho = as_positive_definite(rho)
    sigma = as_positive_definite(sigma)
    x = as_array(X if isinstance(X, SquareMatrix) else SquareMatrix(X))
    same_dim(rho, sigma, x)
    lam, U = rho.eigen.eigenvalues, rho.eigen.eigenvectors
    mu, V = sigma.eigen.eigenvalues, sigma.eigen.eigenvectors
    ratios = lam[:, np.newaxis] / mu[np.newaxis, :]
    ok = np.asarray(f.domain(ratios), dtype=bool)
    if not np.all(ok):
        raise DomainViolation(float(ratios[~ok][0]), f.domain_name)
    weights = np.abs(U.conj().T @ x @ V) ** 2
    contributions = mu[np.newaxis, :] * np.asarray(f(ratios), dtype=float) * weights
    return TraceTerms(tuple(complex(c) for c in contributions.ravel()))


def quasi_entropy(rho, sigma, X, f: ScalarFunction = T_LOG_T) -> float:
    """``S_f^X(rho|sigma) = sum_ij mu_j f(lambda_i/mu_j) |<u_i, X v_j>|^2``."""
    return quasi_entropy_terms(rho, sigma, X, f).real()


def maximal_f_divergence_terms(A, B, f: ScalarFunction) -> TraceTerms:
    A = as_positive_definite(A)
    B = as_positive_definite(B)
    same_dim(A, B)
    b_half = powm(B, 0.5).data
    b_inv_half = powm(B, -0.5).data
    inner = HermitianMatrix(b_inv_half @ A.data @ b_inv_half)
    f_inner = apply_fn(inner, f.fn, f.domain, guard_name=f.domain_name)
    return TraceTerms((complex(np.trace(b_half @ f_inner.data @ b_half)),))


def maximal_f_divergence(A, B, f: ScalarFunction = T_LOG_T) -> float:
    """``Tr B f(B^{-1/2} A B^{-1/2})``."""
    return maximal_f_divergence_terms(A, B, f).real()


def decomposition_terms(rho, sigma, H) -> tuple[TraceTerms, TraceTerms]:
    """Both sides of ``S_H = S_{t log t}^H + Tr[(I - HH*) rho log rho] + Tr[sigma - rho]``."""
    inst = EntropyInstance(rho, sigma, H)
    lhs = reduced_relative_entropy_terms(inst)
    rho_log_rho = inst.A.eigen.apply(lambda w: w * np.log(w))
    rhs = quasi_entropy_terms(inst.A, inst.B, inst.H, T_LOG_T) + TraceTerms(
        (
            trace_product(inst.H.defect(), rho_log_rho),
            complex(np.trace(inst.B.data)),
            -complex(np.trace(inst.A.data)),
        )
    )
    return lhs, rhs


def decomposition_identity_residual(rho, sigma, H) -> float:
    lhs, rhs = decomposition_terms(rho, sigma, H)
    return abs(lhs.real() - rhs.real())


def unitary_covariance_terms(inst: EntropyInstance, U) -> tuple[TraceTerms, TraceTerms]:
    """``S_{H,q}(UAU*|UBU*)`` and ``S_{U*HU,q}(A|B)``; ``q`` unset means ``q = 1``."""
    U = validate_unitary(U)
    q = inst.q if inst.q is not None else QParameter(1.0)
    u = U.data
    rotated = inst.conjugated(U).with_q(q)
    pulled_back = EntropyInstance(inst.A, inst.B, u.conj().T @ inst.H.data @ u, q)
    return reduced_tsallis_terms(rotated), reduced_tsallis_terms(pulled_back)


def unitary_covariance_residual(inst: EntropyInstance, U) -> float:
    lhs, rhs = unitary_covariance_terms(inst, U)
    return abs(lhs.real() - rhs.real())
