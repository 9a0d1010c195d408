"""q-deformed logarithm and exponential, scalar and spectral.

``log_q(x) = (x**(q-1) - 1)/(q-1)`` and ``exp_q(x) = (1 + (q-1)x)**(1/(q-1))``
are evaluated through ``expm1``/``log1p`` so that values stay accurate as
``q -> 1``. Below ``Q_SWITCH`` they dispatch to ``log``/``exp``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from redent.errors import DomainViolation, ParameterViolation
from redent.linalg import (
    HermitianMatrix,
    PositiveDefiniteMatrix,
    apply_fn,
    as_hermitian,
    as_positive_definite,
    positive,
)

Q_SWITCH = 1e-12
DOMAIN_MARGIN = 1e-14


class QParameter:
    __slots__ = ("q", "is_classical")

    def __init__(self, q: float):
        q = float(q)
        if not math.isfinite(q):
            raise ParameterViolation(f"q must be finite, got {q!r}")
        self.q = q
        self.is_classical = abs(q - 1.0) < Q_SWITCH

    @classmethod
    def of(cls, q) -> QParameter:
        return q if isinstance(q, QParameter) else cls(q)

    @property
    def r(self) -> float:
        """``q - 1``."""
        return self.q - 1.0

    def __float__(self):
        return self.q

    def __eq__(self, other):
        if isinstance(other, QParameter):
            return self.q == other.q
        return NotImplemented

    def __hash__(self):
        return hash(self.q)

    def __repr__(self):
        return f"QParameter({self.q!r})"


def log_q_values(x: np.ndarray, q: QParameter) -> np.ndarray:
    if q.is_classical:
        return np.log(x)
    return np.expm1(q.r * np.log(x)) / q.r


def exp_q_values(x: np.ndarray, q: QParameter) -> np.ndarray:
    if q.is_classical:
        return np.exp(x)
    return np.exp(np.log1p(q.r * x) / q.r)


def exp_q_guard(q: QParameter):
    def guard(x):
        if q.is_classical:
            return np.ones_like(x, dtype=bool)
        return 1.0 + q.r * x > DOMAIN_MARGIN

    guard.__name__ = f"1 + ({q.q:g}-1)x > 0"
    return guard


def log_q_scalar(x: float, q) -> float:
    q = QParameter.of(q)
    if not x > 0:
        raise DomainViolation(x, "x > 0")
    return float(log_q_values(np.float64(x), q))


def exp_q_scalar(x: float, q) -> float:
    q = QParameter.of(q)
    if not exp_q_guard(q)(np.float64(x)):
        raise DomainViolation(x, f"1 + ({q.q:g}-1)x > 0")
    return float(exp_q_values(np.float64(x), q))


def log_q_matrix(A, q) -> HermitianMatrix:
    q = QParameter.of(q)
    return apply_fn(as_positive_definite(A), lambda w: log_q_values(w, q), positive, guard_name="x > 0")


def exp_q_matrix(A, q, *, into=PositiveDefiniteMatrix) -> HermitianMatrix:
    """Spectral ``exp_q``; pass ``into=HermitianMatrix`` when only traces are needed."""
    q = QParameter.of(q)
    return apply_fn(as_hermitian(A), lambda w: exp_q_values(w, q), exp_q_guard(q), into=into)


def log_q_quotient_identity_check(x: float, y: float, q) -> float:
    """``|log_q(y/x) - (log_q y - (y/x)**(q-1) log_q x)|``."""
    q = QParameter.of(q)
    if not (x > 0 and y > 0):
        raise DomainViolation(min(x, y), "x > 0 and y > 0")
    lhs = log_q_scalar(y / x, q)
    rhs = log_q_scalar(y, q) - (y / x) ** q.r * log_q_scalar(x, q)
    return abs(lhs - rhs)


class DeformedDerivatives(NamedTuple):
    dlog: float | None
    dexp: float | None


def deformed_derivatives(x: float, q) -> DeformedDerivatives:
    """First derivatives of ``log_q`` and ``exp_q`` at ``x``.

    A component is ``None`` when ``x`` lies outside that function's domain;
    if ``x`` is outside both domains a DomainViolation is raised.
    """
    q = QParameter.of(q)
    in_log = x > 0
    in_exp = bool(exp_q_guard(q)(np.float64(x)))
    if not (in_log or in_exp):
        raise DomainViolation(x, f"x > 0 or 1 + ({q.q:g}-1)x > 0")
    dlog = x ** (q.q - 2.0) if in_log else None
    dexp = exp_q_scalar(x, q) ** (2.0 - q.q) if in_exp else None
    return DeformedDerivatives(dlog, dexp)


def deformed_second_derivatives(x: float, q) -> DeformedDerivatives:
    """``(q-2) x**(q-3)`` and ``(2-q) exp_q(x)**(3-2q)``."""
    q = QParameter.of(q)
    in_log = x > 0
    in_exp = bool(exp_q_guard(q)(np.float64(x)))
    if not (in_log or in_exp):
        raise DomainViolation(x, f"x > 0 or 1 + ({q.q:g}-1)x > 0")
    d2log = (q.q - 2.0) * x ** (q.q - 3.0) if in_log else None
    d2exp = (2.0 - q.q) * exp_q_scalar(x, q) ** (3.0 - 2.0 * q.q) if in_exp else None
    return DeformedDerivatives(d2log, d2exp)
