"""Scalar functions with explicit domains, derivatives and operator convexity.

Only ``t log t``, ``t**alpha`` and ``t**2`` ship as built-ins; ``t**2`` carries no
convexity flag for quasi-entropy purposes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from redent.errors import ParameterViolation
from redent.linalg import everywhere, positive

CONVEX = "convex"
CONCAVE = "concave"


@dataclass(frozen=True)
class ScalarFunction:
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray] | None = None
    domain: Callable[[np.ndarray], np.ndarray] = everywhere
    domain_name: str = "any real"
    operator_convexity: str | None = None

    def __call__(self, x):
        return self.fn(x)


def _t_log_t(t):
    return t * np.log(t)


T_LOG_T = ScalarFunction(
    "t_log_t",
    _t_log_t,
    lambda t: np.log(t) + 1.0,
    positive,
    "t > 0",
    CONVEX,
)

SQUARE = ScalarFunction("square", np.square, lambda t: 2.0 * t)


def power(alpha: float) -> ScalarFunction:
    """``t**alpha`` on ``t > 0``; operator convexity follows Loewner's ranges."""
    alpha = float(alpha)
    if -1.0 <= alpha <= 0.0 or 1.0 <= alpha <= 2.0:
        convexity = CONVEX
    elif 0.0 <= alpha <= 1.0:
        convexity = CONCAVE
    else:
        convexity = None
    return ScalarFunction(
        f"power_{alpha:g}",
        lambda t: t**alpha,
        lambda t: alpha * t ** (alpha - 1.0),
        positive,
        "t > 0",
        convexity,
    )


SQRT = power(0.5)


def builtin(name: str) -> ScalarFunction:
    if name == T_LOG_T.name:
        return T_LOG_T
    if name == SQUARE.name:
        return SQUARE
    if name.startswith("power_"):
        try:
            return power(float(name[len("power_"):]))
        except ValueError:
            pass
    raise ParameterViolation(f"unknown scalar function '{name}'")
