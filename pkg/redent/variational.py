"""Variational expressions for the reduced (Tsallis) relative entropy.

Closed-form values and maximizers of the four problems, the objective
functionals themselves, and a numerical maximizer over
``{X > 0 : Tr X = gamma}`` used as an independent oracle.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple

import numpy as np
import scipy.optimize
import scipy.special

from redent.deformed import QParameter, exp_q_guard, exp_q_matrix, exp_q_values, log_q_matrix, log_q_scalar
from redent.entropy import EntropyInstance, reduced_relative_entropy, reduced_tsallis_entropy
from redent.errors import (
    DomainViolation,
    NotPositiveDefinite,
    OptimizerDidNotConverge,
    ParameterViolation,
    PreconditionViolation,
    TraceConstraintViolation,
)
from redent.linalg import (
    Contraction,
    HermitianMatrix,
    PositiveDefiniteMatrix,
    as_array,
    as_hermitian,
    as_positive_definite,
    co_congruence,
    expm,
    logm,
    powm,
    trace_product,
)

logger = logging.getLogger(__name__)

TRACE_TOL = 1e-10
SPECTRUM_CLIP = 1e-11
ARMIJO = 1e-4
MIN_STEP = 1e-16


class ProblemKind(Enum):
    CLASSICAL_OVER_X = "classical_over_x"
    CLASSICAL_OVER_A = "classical_over_a"
    DEFORMED_OVER_X = "deformed_over_x"
    DEFORMED_OVER_A = "deformed_over_a"

    @property
    def deformed(self) -> bool:
        return self in (ProblemKind.DEFORMED_OVER_X, ProblemKind.DEFORMED_OVER_A)

    @property
    def over_x(self) -> bool:
        return self in (ProblemKind.CLASSICAL_OVER_X, ProblemKind.DEFORMED_OVER_X)


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 2000
    step_init: float = 1.0
    step_shrink: float = 0.5
    grad_tol: float = 1e-8
    restarts: int = 5
    fd_step: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        for name in ("max_iters", "step_init", "step_shrink", "grad_tol", "fd_step"):
            if not getattr(self, name) > 0:
                raise ParameterViolation(f"OptimizerConfig.{name} must be positive")
        if not self.step_shrink < 1:
            raise ParameterViolation("OptimizerConfig.step_shrink must be below 1")
        if self.restarts < 1:
            raise ParameterViolation("OptimizerConfig.restarts must be at least 1")
        if self.seed < 0:
            raise ParameterViolation("OptimizerConfig.seed must be non-negative")


def _contraction(H, dim: int) -> Contraction:
    if H is None:
        return Contraction.identity(dim)
    return H if isinstance(H, Contraction) else Contraction(H)


def _check_trace(X: PositiveDefiniteMatrix, gamma: float) -> None:
    trace = X.trace()
    if abs(trace - gamma) > TRACE_TOL * (1.0 + gamma):
        raise TraceConstraintViolation(trace, gamma)


def _deformed_q(q) -> QParameter:
    q = QParameter.of(q)
    if not 1.0 < q.q <= 2.0:
        raise ParameterViolation(f"the deformed variational problems need q in (1, 2], got {q.q}")
    return q


def _positive_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not gamma > 0:
        raise ParameterViolation(f"gamma must be positive, got {gamma}")
    return gamma


# classical problems


def _classical_exponent(A, Y, H) -> HermitianMatrix:
    A = as_hermitian(A)
    H = _contraction(H, A.dim)
    return HermitianMatrix(A.data + co_congruence(H, logm(Y)).data)


def objective_classical_over_x(X, A, Y, H=None) -> float:
    """``Tr XA - S_H(X|Y)`` on unit-trace ``X``."""
    X = as_positive_definite(X)
    _check_trace(X, 1.0)
    inst = EntropyInstance(X, Y, _contraction(H, X.dim))
    return trace_product(X, as_hermitian(A)).real - reduced_relative_entropy(inst)


def classical_value_over_x(A, Y, H=None) -> float:
    """``1 - Tr Y + log Tr exp(A + H log(Y) H*)``."""
    Y = as_positive_definite(Y)
    K = _classical_exponent(A, Y, H)
    return 1.0 - Y.trace() + float(scipy.special.logsumexp(K.eigenvalues))


def classical_maximizer_over_x(A, Y, H=None) -> PositiveDefiniteMatrix:
    K = _classical_exponent(A, Y, H)
    weights = scipy.special.softmax(K.eigenvalues)
    return PositiveDefiniteMatrix.from_spectrum(weights, K.eigen.eigenvectors)


def classical_objective_over_a(A, X, B, H=None) -> float:
    """``Tr XA - log Tr exp(A + HBH*) - 1 + Tr exp(B)`` on unit-trace ``X``."""
    A, B = as_hermitian(A), as_hermitian(B)
    X = as_positive_definite(X)
    _check_trace(X, 1.0)
    H = _contraction(H, A.dim)
    K = HermitianMatrix(A.data + co_congruence(H, B).data)
    return (
        trace_product(X, A).real
        - float(scipy.special.logsumexp(K.eigenvalues))
        - 1.0
        + expm(B).trace()
    )


def classical_maximizer_over_a(X, B, H=None) -> HermitianMatrix:
    """``log X - HBH*``."""
    X = as_positive_definite(X)
    H = _contraction(H, X.dim)
    return HermitianMatrix(logm(X).data - co_congruence(H, B).data)


# deformed expressions


def _deformed_exponent(A, Y, H, q: QParameter) -> HermitianMatrix:
    A = as_hermitian(A)
    H = _contraction(H, A.dim)
    K = HermitianMatrix(A.data + co_congruence(H, log_q_matrix(Y, q)).data)
    if not np.all(exp_q_guard(q)(K.eigenvalues)):
        raise DomainViolation(float(K.eigenvalues[0]), f"A + H log_q(Y) H* > -I/({q.q:g}-1)")
    return K


def deformed_value_over_x(A, Y, H, q, gamma: float = 1.0) -> float:
    """``gamma log_q(Tr exp_q(A + H log_q(Y) H*)/gamma) + gamma - Tr Y``."""
    q = _deformed_q(q)
    gamma = _positive_gamma(gamma)
    Y = as_positive_definite(Y)
    K = _deformed_exponent(A, Y, H, q)
    partition = float(np.sum(exp_q_values(K.eigenvalues, q)))
    return gamma * log_q_scalar(partition / gamma, q) + gamma - Y.trace()


def deformed_maximizer_over_x(A, Y, H, q, gamma: float = 1.0) -> PositiveDefiniteMatrix:
    q = _deformed_q(q)
    gamma = _positive_gamma(gamma)
    K = _deformed_exponent(A, Y, H, q)
    weights = exp_q_values(K.eigenvalues, q)
    return PositiveDefiniteMatrix.from_spectrum(gamma * weights / weights.sum(), K.eigen.eigenvectors)


def objective_deformed_over_x(X, A, Y, H, q, gamma: float = 1.0) -> float:
    """``Tr[X^{2-q} A] - S_{H,q}(X|Y)`` on ``Tr X = gamma``."""
    q = _deformed_q(q)
    gamma = _positive_gamma(gamma)
    X = as_positive_definite(X)
    _check_trace(X, gamma)
    inst = EntropyInstance(X, Y, _contraction(H, X.dim), q)
    return trace_product(powm(X, 2.0 - q.q), as_hermitian(A)).real - reduced_tsallis_entropy(inst)


def deformed_objective_over_a(A, X, B, H, q, gamma: float = 1.0) -> float:
    """``Tr[X^{2-q}A] - gamma log_q(Tr exp_q(A + HBH*)/gamma) - gamma + Tr exp_q(B)``."""
    q = _deformed_q(q)
    gamma = _positive_gamma(gamma)
    try:
        A = as_positive_definite(A)
    except NotPositiveDefinite as exc:
        raise PreconditionViolation("A > 0", str(exc)) from exc
    X = as_positive_definite(X)
    _check_trace(X, gamma)
    B = as_hermitian(B)
    H = _contraction(H, A.dim)
    hbh = co_congruence(H, B)
    if not B.eigenvalues[0] > -1.0 / q.r:
        raise PreconditionViolation("B > -I/(q-1)", f"lowest eigenvalue {B.eigenvalues[0]:.6g}")
    gap = HermitianMatrix(log_q_matrix(X, q).data - hbh.data)
    if not gap.eigenvalues[0] > 0:
        raise PreconditionViolation("log_q X > H B H*", f"lowest eigenvalue {gap.eigenvalues[0]:.6g}")
    K = HermitianMatrix(A.data + hbh.data)
    partition = float(np.sum(exp_q_values(K.eigenvalues, q)))
    exp_q_b = float(np.sum(exp_q_values(B.eigenvalues, q)))
    return (
        trace_product(powm(X, 2.0 - q.q), A).real
        - gamma * log_q_scalar(partition / gamma, q)
        - gamma
        + exp_q_b
    )


def deformed_maximizer_over_a(X, B, H, q) -> HermitianMatrix:
    """``log_q X - HBH*``; positive definite exactly when ``log_q X > HBH*``."""
    q = _deformed_q(q)
    X = as_positive_definite(X)
    H = _contraction(H, X.dim)
    return HermitianMatrix(log_q_matrix(X, q).data - co_congruence(H, B).data)


@dataclass(frozen=True, eq=False)
class VariationalProblem:
    """One of the four variational problems with its fixed data.

    Over-X kinds use ``A``, ``Y``, ``H``; over-A kinds use ``X``, ``B``, ``H``.
    """

    kind: ProblemKind
    H: Contraction
    A: HermitianMatrix | None = None
    Y: PositiveDefiniteMatrix | None = None
    X: PositiveDefiniteMatrix | None = None
    B: HermitianMatrix | None = None
    q: QParameter | None = None
    gamma: float = 1.0

    def __post_init__(self):
        _positive_gamma(self.gamma)
        if self.kind.deformed:
            _deformed_q(self.q)
        elif self.gamma != 1.0:
            raise ParameterViolation("classical problems are posed on unit trace")
        needed = ("A", "Y") if self.kind.over_x else ("X", "B")
        missing = [name for name in needed if getattr(self, name) is None]
        if missing:
            raise ParameterViolation(f"{self.kind.value} needs {', '.join(missing)}")

    @property
    def dim(self) -> int:
        return self.H.dim

    def objective(self, point) -> float:
        if self.kind is ProblemKind.CLASSICAL_OVER_X:
            return objective_classical_over_x(point, self.A, self.Y, self.H)
        if self.kind is ProblemKind.CLASSICAL_OVER_A:
            return classical_objective_over_a(point, self.X, self.B, self.H)
        if self.kind is ProblemKind.DEFORMED_OVER_X:
            return objective_deformed_over_x(point, self.A, self.Y, self.H, self.q, self.gamma)
        return deformed_objective_over_a(point, self.X, self.B, self.H, self.q, self.gamma)

    def closed_form_value(self) -> float:
        if self.kind is ProblemKind.CLASSICAL_OVER_X:
            return classical_value_over_x(self.A, self.Y, self.H)
        if self.kind is ProblemKind.CLASSICAL_OVER_A:
            inst = EntropyInstance(self.X, PositiveDefiniteMatrix(expm(self.B)), self.H)
            return reduced_relative_entropy(inst)
        if self.kind is ProblemKind.DEFORMED_OVER_X:
            return deformed_value_over_x(self.A, self.Y, self.H, self.q, self.gamma)
        exp_q_b = exp_q_matrix(self.B, self.q)
        return reduced_tsallis_entropy(EntropyInstance(self.X, exp_q_b, self.H, self.q))

    def maximizer(self) -> HermitianMatrix:
        if self.kind is ProblemKind.CLASSICAL_OVER_X:
            return classical_maximizer_over_x(self.A, self.Y, self.H)
        if self.kind is ProblemKind.CLASSICAL_OVER_A:
            return classical_maximizer_over_a(self.X, self.B, self.H)
        if self.kind is ProblemKind.DEFORMED_OVER_X:
            return deformed_maximizer_over_x(self.A, self.Y, self.H, self.q, self.gamma)
        return deformed_maximizer_over_a(self.X, self.B, self.H, self.q)


# numerical oracle


class OptimizerResult(NamedTuple):
    x_star: PositiveDefiniteMatrix
    value: float
    converged: bool
    message: str

    def raise_if_unconverged(self) -> OptimizerResult:
        if not self.converged:
            raise OptimizerDidNotConverge(self.message)
        return self


def _hermitian_from_vector(theta: np.ndarray, dim: int) -> np.ndarray:
    upper = np.triu_indices(dim, 1)
    m = len(upper[0])
    Z = np.zeros((dim, dim), dtype=np.complex128)
    Z[np.diag_indices(dim)] = theta[:dim]
    off = theta[dim:dim + m] + 1j * theta[dim + m:]
    Z[upper] = off
    Z[(upper[1], upper[0])] = off.conj()
    return Z


def trace_set_point(theta: np.ndarray, dim: int, gamma: float) -> PositiveDefiniteMatrix:
    """``gamma exp(Z)/Tr exp(Z)`` with weights clipped at ``SPECTRUM_CLIP`` relative."""
    w, U = np.linalg.eigh(_hermitian_from_vector(theta, dim))
    weights = np.maximum(np.exp(w - w.max()), SPECTRUM_CLIP)
    return PositiveDefiniteMatrix.from_spectrum(gamma * weights / weights.sum(), U)


def _fd_gradient(fun: Callable[[np.ndarray], float], theta: np.ndarray, h: float) -> np.ndarray:
    grad = np.empty_like(theta)
    for i in range(theta.size):
        step = np.zeros_like(theta)
        step[i] = h
        grad[i] = (fun(theta + step) - fun(theta - step)) / (2.0 * h)
    return grad


def _backtracking_descent(fun, theta, cfg: OptimizerConfig) -> tuple[np.ndarray, float, bool]:
    value = fun(theta)
    for _ in range(cfg.max_iters):
        grad = _fd_gradient(fun, theta, cfg.fd_step)
        slope = float(grad @ grad)
        if np.sqrt(slope) <= cfg.grad_tol:
            return theta, value, True
        step = cfg.step_init
        while step > MIN_STEP:
            candidate = theta - step * grad
            candidate_value = fun(candidate)
            if candidate_value <= value - ARMIJO * step * slope:
                break
            step *= cfg.step_shrink
        else:
            # no admissible step: stationary up to finite-difference noise
            return theta, value, False
        theta, value = candidate, candidate_value
    return theta, value, False


def numeric_max_over_trace_set(
    objective: Callable[[PositiveDefiniteMatrix], float],
    dim: int,
    gamma: float = 1.0,
    cfg: OptimizerConfig | None = None,
) -> OptimizerResult:
    """Maximize ``objective`` over positive definite ``X`` with ``Tr X = gamma``.

    BFGS on the exp-parametrization (central finite-difference gradients),
    polished by backtracking gradient steps. The first start is ``gamma I/n``,
    the others are Gaussian. Non-convergence is logged and flagged on the result.
    """
    cfg = cfg or OptimizerConfig()
    gamma = _positive_gamma(gamma)
    rng = np.random.default_rng(cfg.seed)

    def negated(theta: np.ndarray) -> float:
        return -float(objective(trace_set_point(theta, dim, gamma)))

    def negated_gradient(theta: np.ndarray) -> np.ndarray:
        return _fd_gradient(negated, theta, cfg.fd_step)

    best: tuple[float, np.ndarray, bool, str] | None = None
    for restart in range(cfg.restarts):
        start = np.zeros(dim * dim) if restart == 0 else rng.standard_normal(dim * dim)
        result = scipy.optimize.minimize(
            negated,
            start,
            jac=negated_gradient,
            method="BFGS",
            options={"maxiter": cfg.max_iters, "gtol": cfg.grad_tol},
        )
        theta, value, polished = _backtracking_descent(negated, result.x, cfg)
        converged = bool(result.success) or polished
        logger.debug(
            "restart %d: value %.12g, bfgs %s, polished %s", restart, -value, result.message, polished
        )
        if best is None or value < best[0]:
            best = (value, theta, converged, str(result.message))

    value, theta, converged, message = best
    if not converged:
        logger.warning("numeric maximization over trace %g did not converge: %s", gamma, message)
    return OptimizerResult(trace_set_point(theta, dim, gamma), -value, converged, message)


def directional_derivative(functional: Callable[[HermitianMatrix], float], point, direction, h: float = 1e-5) -> float:
    """Central difference of ``t -> functional(point + t direction)``."""
    p, d = as_array(point), as_array(direction)
    return (functional(HermitianMatrix(p + h * d)) - functional(HermitianMatrix(p - h * d))) / (2.0 * h)
