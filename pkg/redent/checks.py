"""One predicate per trace inequality, identity and convexity statement.

Every check evaluates both sides on a concrete instance and returns a
:class:`CheckReport`. Hypotheses are validated before anything is evaluated;
a violated hypothesis raises instead of producing a report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from redent.deformed import QParameter, exp_q_matrix, log_q_matrix, log_q_scalar, log_q_values
from redent.entropy import (
    EntropyInstance,
    decomposition_terms,
    maximal_f_divergence_terms,
    quasi_entropy_terms,
    reduced_relative_entropy_terms,
    reduced_tsallis_alt_terms,
    reduced_tsallis_terms,
    unitary_covariance_terms,
)
from redent.errors import (
    DomainViolation,
    HypothesisViolation,
    OrderingViolation,
    ParameterViolation,
    PartitionOfIdentityViolation,
    TraceConstraintViolation,
)
from redent.functions import CONCAVE, CONVEX, T_LOG_T, ScalarFunction
from redent.linalg import (
    Contraction,
    HermitianMatrix,
    PositiveDefiniteMatrix,
    apply_fn,
    as_array,
    as_hermitian,
    as_positive_definite,
    expm,
    gram_matrix,
    logm,
    lowest_eigenvalue,
    matrix_power_fractional,
    positive,
    powm,
    same_dim,
    trace_product,
)
from redent.variational import VariationalProblem

MARGIN_TOL = 1e-8
FORM_TOL = 1e-9
DECOMPOSITION_TOL = 1e-10
QUOTIENT_TOL = 1e-13
PARTITION_TOL = 1e-8
HYPOTHESIS_SLACK = 1e-10
TRACE_TOL = 1e-10
BOUNDARY_Q = 2.0
Q_EDGE = 1e-12


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one trial: ``margin`` is ``rhs - lhs`` for ``lhs <= rhs``."""

    check_id: str
    lhs: float
    rhs: float
    margin: float
    scale: float
    holds: bool
    fingerprint: str = ""
    notes: str | None = None
    sub_reports: tuple[CheckReport, ...] = field(default=())

    @property
    def relative_margin(self) -> float:
        return self.margin / self.scale

    @property
    def all_hold(self) -> bool:
        return self.holds and all(sub.all_hold for sub in self.sub_reports)

    def worst(self) -> CheckReport:
        """The report (this one or a nested one) with the lowest relative margin."""
        candidates = [self] + [sub.worst() for sub in self.sub_reports]
        return min(candidates, key=lambda r: r.relative_margin)

    def with_fingerprint(self, fingerprint: str) -> CheckReport:
        return replace(
            self,
            fingerprint=fingerprint,
            sub_reports=tuple(sub.with_fingerprint(fingerprint) for sub in self.sub_reports),
        )

    def as_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "scale": self.scale,
            "holds": self.holds,
            "fingerprint": self.fingerprint,
            "notes": self.notes,
            "sub_reports": [sub.as_dict() for sub in self.sub_reports],
        }


def compare(
    check_id: str,
    lhs: float,
    rhs: float,
    scale: float,
    *,
    relation: str = "le",
    tol: float = MARGIN_TOL,
    notes: str | None = None,
    sub_reports: Sequence[CheckReport] = (),
) -> CheckReport:
    """Build a report for ``lhs <= rhs`` (``le``), ``lhs >= rhs`` (``ge``) or ``lhs == rhs`` (``eq``)."""
    lhs, rhs, scale = float(lhs), float(rhs), float(scale)
    if relation == "le":
        margin = rhs - lhs
    elif relation == "ge":
        margin = lhs - rhs
    elif relation == "eq":
        margin = -abs(lhs - rhs)
    else:
        raise ParameterViolation(f"unknown relation '{relation}'")
    return CheckReport(
        check_id=check_id,
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        scale=scale,
        holds=margin >= -tol * scale,
        notes=notes,
        sub_reports=tuple(sub_reports),
    )


def _scale(*values: float) -> float:
    return 1.0 + sum(abs(v) for v in values)


def _contraction(H, dim: int, *, require_invertible: bool = False) -> Contraction:
    if H is None:
        return Contraction.identity(dim)
    if isinstance(H, Contraction) and not require_invertible:
        return H
    return Contraction(H, require_invertible=require_invertible)


def _lambda(lam: float) -> float:
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise ParameterViolation(f"lambda must lie in (0, 1), got {lam}")
    return lam


def _mix(lam: float, a, b) -> np.ndarray:
    return lam * as_array(a) + (1.0 - lam) * as_array(b)


def _check_partition(Hs: Sequence) -> int:
    if not Hs:
        raise ParameterViolation("need at least one block")
    n = same_dim(*Hs)
    total = sum(as_array(h).conj().T @ as_array(h) for h in Hs)
    deviation = float(np.max(np.abs(total - np.eye(n))))
    if deviation > PARTITION_TOL:
        raise PartitionOfIdentityViolation(deviation)
    return n


def _require_psd(M: HermitianMatrix, name: str, error=HypothesisViolation) -> None:
    lowest = lowest_eigenvalue(M)
    if lowest < -HYPOTHESIS_SLACK * (1.0 + M.norm):
        if error is DomainViolation:
            raise DomainViolation(lowest, f"{name} >= 0")
        raise error(f"{name} >= 0", f"lowest eigenvalue {lowest:.6g}")


def _q_in(q, lo: float, hi: float, *, lo_open: bool, allow_classical: bool = False) -> QParameter:
    q = QParameter.of(q)
    inside = (lo < q.q if lo_open else lo <= q.q) and q.q <= hi
    if not inside:
        bracket = "(" if lo_open else "["
        raise ParameterViolation(f"q must lie in {bracket}{lo:g}, {hi:g}], got {q.q}")
    if q.is_classical and not allow_classical:
        raise ParameterViolation("q = 1 is excluded here")
    return q


def _direction_reports(
    check_id: str, q: float, combo: float, mixed: float, scale: float, tol: float, notes: str
) -> CheckReport:
    """Concave below the boundary q = 2, convex above it, both at q = 2."""
    concave = compare(check_id, combo, mixed, scale, tol=tol, notes=f"{notes}; concave")
    convex = compare(check_id, mixed, combo, scale, tol=tol, notes=f"{notes}; convex")
    if q < BOUNDARY_Q - Q_EDGE:
        return concave
    if q > BOUNDARY_Q + Q_EDGE:
        return convex
    return replace(concave, sub_reports=(convex,))


# Golden-Thompson family


def check_gt_hp(S, T, p: float, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """``Tr e^{S+T} <= Tr (e^{pT/2} e^{pS} e^{pT/2})^{1/p}``."""
    if not p > 0:
        raise ParameterViolation(f"p must be positive, got {p}")
    S, T = as_hermitian(S), as_hermitian(T)
    same_dim(S, T)
    lhs = expm(S + T).trace()
    half_t = apply_fn(T, lambda w: np.exp(p * w / 2.0)).data
    e_s = apply_fn(S, lambda w: np.exp(p * w)).data
    inner = HermitianMatrix(half_t @ e_s @ half_t)
    rhs = matrix_power_fractional(inner, 1.0 / p).trace()
    return compare("check_gt_hp", lhs, rhs, _scale(lhs, rhs), tol=margin_tol, notes=f"p={p:g}")


def check_interpolation(L, Bs: Sequence, Hs: Sequence, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """``Tr exp(L + sum H_j* B_j H_j) <= Tr[e^L sum H_j* e^{B_j} H_j]`` for ``sum H_j* H_j = I``."""
    if len(Bs) != len(Hs):
        raise ParameterViolation("need one B_j per H_j")
    _check_partition(Hs)
    L = as_hermitian(L)
    exponent = L.data.copy()
    weighted = np.zeros_like(exponent)
    for B, H in zip(Bs, Hs):
        B, h = as_hermitian(B), as_array(H)
        exponent += h.conj().T @ B.data @ h
        weighted += h.conj().T @ expm(B).data @ h
    lhs = expm(exponent).trace()
    rhs = trace_product(expm(L), weighted).real
    return compare("check_interpolation", lhs, rhs, _scale(lhs, rhs), tol=margin_tol, notes=f"k={len(Hs)}")


def check_reduced_jensen(B, H, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """``Tr exp(HBH*) <= Tr[H e^B H*] + Tr[I - HH*]``."""
    B = as_hermitian(B)
    H = _contraction(H, B.dim)
    h = H.data
    lhs = expm(h @ B.data @ h.conj().T).trace()
    transported = trace_product(h.conj().T @ h, expm(B)).real
    defect = H.defect().trace()
    rhs = transported + defect
    return compare("check_reduced_jensen", lhs, rhs, _scale(lhs, transported, defect), tol=margin_tol)


def check_q_golden_thompson(A, B, q, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """``Tr exp_q(A + B) <= Tr[exp_q(A) exp_q(B)]`` for positive semidefinite ``A, B``."""
    q = _q_in(q, 1.0, 2.0, lo_open=True)
    A, B = as_hermitian(A), as_hermitian(B)
    same_dim(A, B)
    _require_psd(A, "A", DomainViolation)
    _require_psd(B, "B", DomainViolation)
    lhs = exp_q_matrix(A + B, q, into=HermitianMatrix).trace()
    rhs = trace_product(exp_q_matrix(A, q, into=HermitianMatrix), exp_q_matrix(B, q, into=HermitianMatrix)).real
    return compare("check_q_golden_thompson", lhs, rhs, _scale(lhs, rhs), tol=margin_tol, notes=f"q={q.q:g}")


def check_q_jensen(Bs: Sequence, Hs: Sequence, q, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """``Tr exp_q(sum H_j* B_j H_j) <= sum Tr[H_j* exp_q(B_j) H_j]``, ``q`` in ``[1, 2]``."""
    q = _q_in(q, 1.0, 2.0, lo_open=False, allow_classical=True)
    if len(Bs) != len(Hs):
        raise ParameterViolation("need one B_j per H_j")
    _check_partition(Hs)
    combined = None
    rhs = 0.0
    for B, H in zip(Bs, Hs):
        B, h = as_positive_definite(B), as_array(H)
        term = h.conj().T @ B.data @ h
        combined = term if combined is None else combined + term
        rhs += trace_product(h @ h.conj().T, exp_q_matrix(B, q, into=HermitianMatrix)).real
    lhs = exp_q_matrix(combined, q, into=HermitianMatrix).trace()
    return compare("check_q_jensen", lhs, rhs, _scale(lhs, rhs), tol=margin_tol, notes=f"q={q.q:g}, k={len(Hs)}")


# bounds on the reduced relative entropies


def _classical_bound_parts(X, Y, H: Contraction, p: float) -> tuple[float, float]:
    """``(1/p) Tr[H*XH log(Y^{-p/2} X^p Y^{-p/2})]`` and ``log(1 + Tr[I - HH*])``."""
    y = powm(Y, -p / 2.0).data
    inner = PositiveDefiniteMatrix(y @ powm(X, p).data @ y)
    hxh = H.adjoint @ X.data @ H.data
    trace_log = trace_product(hxh, logm(inner)).real / p
    return trace_log, math.log1p(H.defect().trace())


def check_lower_bound_classical(X, Y, H, p: float, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """Lower bound on ``S_H(X|Y)`` for unit-trace ``X``.

    Sub-reports: the rearranged form with ``Tr[X log X - H*XH log Y]`` on the
    right, and the bound at ``p = 1``.
    """
    if not p > 0:
        raise ParameterViolation(f"p must be positive, got {p}")
    X = as_positive_definite(X)
    if abs(X.trace() - 1.0) > TRACE_TOL * 2.0:
        raise TraceConstraintViolation(X.trace(), 1.0)
    inst = EntropyInstance(X, Y, _contraction(H, X.dim))
    terms = reduced_relative_entropy_terms(inst)
    entropy = terms.real()
    linear = X.trace() - inst.B.trace()

    def bound_at(power: float) -> tuple[float, float, float]:
        trace_log, log_defect = _classical_bound_parts(inst.A, inst.B, inst.H, power)
        return trace_log - linear - log_defect, trace_log, log_defect

    bound, trace_log, log_defect = bound_at(p)
    scale = terms.scale + abs(trace_log) + abs(log_defect)
    rearranged = compare(
        "check_lower_bound_classical",
        trace_log - log_defect,
        entropy + linear,
        scale,
        tol=margin_tol,
        notes="rearranged form",
    )
    bound_one, trace_log_one, log_defect_one = bound_at(1.0)
    at_one = compare(
        "check_lower_bound_classical",
        bound_one,
        entropy,
        terms.scale + abs(trace_log_one) + abs(log_defect_one),
        tol=margin_tol,
        notes="p=1",
    )
    return compare(
        "check_lower_bound_classical",
        bound,
        entropy,
        scale,
        tol=margin_tol,
        notes=f"p={p:g}",
        sub_reports=(rearranged, at_one),
    )


def check_lower_bound_tsallis(X, Y, H, q, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """Lower bound on ``S_{H,q}(X|Y)`` under ``I <= Y <= X``, with ``gamma = Tr X``."""
    q = _q_in(q, 1.0, 2.0, lo_open=True)
    X, Y = as_positive_definite(X), as_positive_definite(Y)
    n = same_dim(X, Y)
    failed = []
    if lowest_eigenvalue(HermitianMatrix(Y.data - np.eye(n))) < -HYPOTHESIS_SLACK * (1.0 + Y.norm):
        failed.append("I <= Y")
    if lowest_eigenvalue(HermitianMatrix(X.data - Y.data)) < -HYPOTHESIS_SLACK * (1.0 + X.norm):
        failed.append("Y <= X")
    if failed:
        raise OrderingViolation(failed)
    gamma = X.trace()
    inst = EntropyInstance(X, Y, _contraction(H, n), q)
    terms = reduced_tsallis_terms(inst)
    entropy = terms.real()
    y = powm(Y, -0.5).data
    ratio = PositiveDefiniteMatrix(y @ X.data @ y)
    hxh = inst.H.adjoint @ powm(X, 2.0 - q.q).data @ inst.H.data
    first = trace_product(hxh, log_q_matrix(ratio, q)).real
    linear = gamma - Y.trace()
    defect_term = gamma * log_q_scalar(1.0 + inst.H.defect().trace() / gamma, q)
    bound = first - linear - defect_term
    return compare(
        "check_lower_bound_tsallis",
        bound,
        entropy,
        terms.scale + abs(first) + abs(defect_term),
        tol=margin_tol,
        notes=f"q={q.q:g}, gamma={gamma:.6g}",
    )


def check_bpl_fs(A, B, s: float, t: float, variant: str, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """Power-mean trace inequalities.

    ``i``:  ``Tr[A^{1+t} B^t] <= Tr[A (A^{s/2} B^s A^{s/2})^{t/s}]`` for ``s >= t > 0``.
    ``ii``: ``Tr[A (A^{-s/2} B^s A^{-s/2})^{t/s}] <= Tr[A^{1-t} B^t]`` for ``s >= t``, ``0 < t <= 1``.
    """
    if variant not in ("i", "ii"):
        raise ParameterViolation(f"variant must be 'i' or 'ii', got {variant!r}")
    if not s >= t > 0:
        raise ParameterViolation(f"need s >= t > 0, got s={s}, t={t}")
    if variant == "ii" and t > 1:
        raise ParameterViolation(f"variant ii needs t <= 1, got {t}")
    A, B = as_positive_definite(A), as_positive_definite(B)
    same_dim(A, B)
    b_s = powm(B, s).data
    if variant == "i":
        a = powm(A, s / 2.0).data
        lhs = trace_product(powm(A, 1.0 + t), powm(B, t)).real
        rhs = trace_product(A, matrix_power_fractional(HermitianMatrix(a @ b_s @ a), t / s)).real
    else:
        a = powm(A, -s / 2.0).data
        lhs = trace_product(A, matrix_power_fractional(HermitianMatrix(a @ b_s @ a), t / s)).real
        rhs = trace_product(powm(A, 1.0 - t), powm(B, t)).real
    return compare(
        "check_bpl_fs", lhs, rhs, _scale(lhs, rhs), tol=margin_tol, notes=f"variant={variant}, s={s:g}, t={t:g}"
    )


def _log_q_of_root(M: HermitianMatrix, p: float, q: QParameter) -> HermitianMatrix:
    """``log_q(M^{1/p})``."""
    return apply_fn(M, lambda w: log_q_values(w ** (1.0 / p), q), positive, guard_name="x > 0")


def check_upper_bound_tsallis(A, B, H, q, p: float, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """Upper bound for ``S_{H,q}`` with an invertible contraction, ``q`` in ``[0, 2]``, ``p >= |q - 1|``."""
    q = _q_in(q, 0.0, 2.0, lo_open=False)
    if not p >= abs(q.r) - Q_EDGE:
        raise ParameterViolation(f"need p >= |q - 1| = {abs(q.r):g}, got {p}")
    A, B = as_positive_definite(A), as_positive_definite(B)
    H = _contraction(H, A.dim, require_invertible=True)
    inst = EntropyInstance(A, B, H, q)
    terms = reduced_tsallis_terms(inst)
    r = q.r
    hh_minus_i = H.data @ H.adjoint - np.eye(A.dim)
    correction = trace_product(hh_minus_i, powm(A, 2.0 - q.q)).real / r
    linear = A.trace() - B.trace()
    lhs = terms.real() - correction + linear
    transported = HermitianMatrix(H.data @ powm(B, r).data @ H.adjoint)
    root = powm(A, -p / 2.0).data @ matrix_power_fractional(transported, p / (2.0 * r)).data
    inner = gram_matrix(root)
    rhs = -trace_product(A, _log_q_of_root(inner, p, q)).real
    return compare(
        "check_upper_bound_tsallis",
        lhs,
        rhs,
        terms.scale + abs(correction) + abs(linear) + abs(rhs),
        tol=margin_tol,
        notes=f"q={q.q:g}, p={p:g}",
    )


def check_seo_fs_special(A, B, alpha: float, p: float, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """``Tr[(A - A^{1-a} B^a)/a] <= -Tr[A log_{1+a}((A^{-p/2} B^p A^{-p/2})^{1/p})]``.

    The sub-report compares both sides with :func:`check_upper_bound_tsallis`
    at ``H = I``, ``q = 1 + alpha``.
    """
    alpha = float(alpha)
    if not (-1.0 <= alpha <= 1.0) or alpha == 0.0:
        raise ParameterViolation(f"alpha must lie in [-1, 1] without 0, got {alpha}")
    if not p >= abs(alpha) - Q_EDGE:
        raise ParameterViolation(f"need p >= |alpha| = {abs(alpha):g}, got {p}")
    A, B = as_positive_definite(A), as_positive_definite(B)
    same_dim(A, B)
    q = QParameter(1.0 + alpha)
    power_term = trace_product(powm(A, 1.0 - alpha), powm(B, alpha)).real
    lhs = (A.trace() - power_term) / alpha
    inner = gram_matrix(powm(A, -p / 2.0).data @ powm(B, p / 2.0).data)
    rhs = -trace_product(A, _log_q_of_root(inner, p, q)).real
    general = check_upper_bound_tsallis(A, B, None, q, p, margin_tol=margin_tol)
    agreement = compare(
        "check_seo_fs_special",
        abs(lhs - general.lhs) + abs(rhs - general.rhs),
        0.0,
        _scale(lhs, rhs, general.lhs, general.rhs),
        tol=FORM_TOL,
        notes="agreement with the general upper bound at H = I",
    )
    return compare(
        "check_seo_fs_special",
        lhs,
        rhs,
        _scale(A.trace(), power_term / alpha, rhs),
        tol=margin_tol,
        notes=f"alpha={alpha:g}, p={p:g}",
        sub_reports=(agreement,),
    )


# convexity and concavity


def check_convexity_tsallis(instance_pair, H, q, lam: float, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """Joint convexity of ``(A, B) -> S_{H,q}(A|B)`` for ``q`` in ``[0, 2]``, concavity on ``[2, 3]``."""
    q = _q_in(q, 0.0, 3.0, lo_open=False)
    lam = _lambda(lam)
    (A1, B1), (A2, B2) = instance_pair
    dim = as_array(A1).shape[0]
    H = _contraction(H, dim)
    t1 = reduced_tsallis_terms(EntropyInstance(A1, B1, H, q))
    t2 = reduced_tsallis_terms(EntropyInstance(A2, B2, H, q))
    tm = reduced_tsallis_terms(EntropyInstance(_mix(lam, A1, A2), _mix(lam, B1, B2), H, q))
    combo = lam * t1.real() + (1.0 - lam) * t2.real()
    mixed = tm.real()
    scale = t1.scale + t2.scale + tm.scale
    notes = f"q={q.q:g}, lambda={lam:g}"
    convex = compare("check_convexity_tsallis", mixed, combo, scale, tol=margin_tol, notes=f"{notes}; convex")
    concave = compare("check_convexity_tsallis", combo, mixed, scale, tol=margin_tol, notes=f"{notes}; concave")
    if q.q < BOUNDARY_Q - Q_EDGE:
        return convex
    if q.q > BOUNDARY_Q + Q_EDGE:
        return concave
    return replace(convex, sub_reports=(concave,))


def check_convexity_reduced(instance_pair, H, lam: float, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """Joint convexity of ``(A, B) -> S_H(A|B)``."""
    lam = _lambda(lam)
    (A1, B1), (A2, B2) = instance_pair
    H = _contraction(H, as_array(A1).shape[0])
    t1 = reduced_relative_entropy_terms(EntropyInstance(A1, B1, H))
    t2 = reduced_relative_entropy_terms(EntropyInstance(A2, B2, H))
    tm = reduced_relative_entropy_terms(EntropyInstance(_mix(lam, A1, A2), _mix(lam, B1, B2), H))
    combo = lam * t1.real() + (1.0 - lam) * t2.real()
    return compare(
        "check_convexity_reduced",
        tm.real(),
        combo,
        t1.scale + t2.scale + tm.scale,
        tol=margin_tol,
        notes=f"lambda={lam:g}",
    )


def _phi_hypothesis(L: HermitianMatrix, H: Contraction, q: QParameter) -> HermitianMatrix:
    base = HermitianMatrix(np.eye(L.dim) - H.adjoint @ H.data + q.r * L.data)
    _require_psd(base, "I - H*H + (q-1)L")
    return base


def _phi_exp_form(L: HermitianMatrix, H: Contraction, q: QParameter, A) -> float:
    exponent = HermitianMatrix(L.data + H.adjoint @ log_q_matrix(A, q).data @ H.data)
    return exp_q_matrix(exponent, q, into=HermitianMatrix).trace()


def _phi_closed_form(base: HermitianMatrix, H: Contraction, q: QParameter, A) -> float:
    inner = HermitianMatrix(base.data + H.adjoint @ powm(A, q.r).data @ H.data)
    return matrix_power_fractional(inner, 1.0 / q.r).trace()


def check_phi_q_concavity(L, H, q, sample_pair, lam: float, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """``phi_q(A) = Tr exp_q(L + H* log_q(A) H)``: concave on ``(1, 2]``, convex on ``[2, 3]``.

    Sub-report: ``phi_q`` against its closed form
    ``Tr[I - H*H + (q-1)L + H* A^{q-1} H]^{1/(q-1)}`` at the mixed point.
    """
    q = _q_in(q, 1.0, 3.0, lo_open=True)
    lam = _lambda(lam)
    L = as_hermitian(L)
    H = _contraction(H, L.dim)
    base = _phi_hypothesis(L, H, q)
    A1, A2 = (as_positive_definite(a) for a in sample_pair)
    Am = PositiveDefiniteMatrix(_mix(lam, A1, A2))
    v1, v2, vm = (_phi_exp_form(L, H, q, a) for a in (A1, A2, Am))
    closed = _phi_closed_form(base, H, q, Am)
    identity = compare(
        "check_phi_q_concavity", vm, closed, _scale(vm, closed), relation="eq", tol=FORM_TOL, notes="closed form"
    )
    combo = lam * v1 + (1.0 - lam) * v2
    report = _direction_reports(
        "check_phi_q_concavity", q.q, combo, vm, _scale(v1, v2, vm), margin_tol, f"q={q.q:g}, lambda={lam:g}"
    )
    return replace(report, sub_reports=report.sub_reports + (identity,))


def check_hq_and_classical_limits(L, H, q, sample_pair, lam: float, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """``h_q = log_q phi_q`` midpoint check, plus concavity of ``A -> Tr exp(L + H* log(A) H)``.

    A classical ``q`` runs only the second check, for any Hermitian ``L``.
    """
    lam = _lambda(lam)
    L = as_hermitian(L)
    H = _contraction(H, L.dim)
    A1, A2 = (as_positive_definite(a) for a in sample_pair)
    Am = PositiveDefiniteMatrix(_mix(lam, A1, A2))
    classical = QParameter(1.0)
    c1, c2, cm = (_phi_exp_form(L, H, classical, a) for a in (A1, A2, Am))
    classical_report = compare(
        "check_hq_and_classical_limits",
        lam * c1 + (1.0 - lam) * c2,
        cm,
        _scale(c1, c2, cm),
        tol=margin_tol,
        notes=f"classical trace function, lambda={lam:g}",
    )
    q = QParameter.of(q)
    if q.is_classical:
        return classical_report
    q = _q_in(q, 1.0, 3.0, lo_open=True)
    _phi_hypothesis(L, H, q)
    h1, h2, hm = (log_q_scalar(_phi_exp_form(L, H, q, a), q) for a in (A1, A2, Am))
    combo = lam * h1 + (1.0 - lam) * h2
    report = _direction_reports(
        "check_hq_and_classical_limits", q.q, combo, hm, _scale(h1, h2, hm), margin_tol, f"q={q.q:g}, lambda={lam:g}"
    )
    return replace(report, sub_reports=report.sub_reports + (classical_report,))


def _block_diagonal(blocks: Sequence[np.ndarray]) -> np.ndarray:
    n = blocks[0].shape[0]
    out = np.zeros((n * len(blocks), n * len(blocks)), dtype=np.complex128)
    for i, block in enumerate(blocks):
        out[i * n:(i + 1) * n, i * n:(i + 1) * n] = block
    return out


def block_identity_sides(L, As: Sequence, Hs: Sequence, q) -> tuple[float, float]:
    """``Tr exp_q(L^ + H^* log_q(A^) H^)`` and ``Tr exp_q(L + sum H_i* log_q(A_i) H_i) + (k-1)n``."""
    q = QParameter.of(q)
    L = as_hermitian(L)
    n, k = L.dim, len(As)
    hat_l = _block_diagonal([L.data] + [np.zeros((n, n))] * (k - 1))
    hat_a = PositiveDefiniteMatrix(_block_diagonal([as_array(a) for a in As]))
    hat_h = np.zeros((k * n, k * n), dtype=np.complex128)
    for i, H in enumerate(Hs):
        hat_h[i * n:(i + 1) * n, :n] = as_array(H)
    exponent = HermitianMatrix(hat_l + hat_h.conj().T @ log_q_matrix(hat_a, q).data @ hat_h)
    lhs = exp_q_matrix(exponent, q, into=HermitianMatrix).trace()
    return lhs, _multivariate_phi(L, As, Hs, q) + (k - 1) * n


def _multivariate_phi(L: HermitianMatrix, As: Sequence, Hs: Sequence, q: QParameter) -> float:
    exponent = L.data.copy()
    for A, H in zip(As, Hs):
        h = as_array(H)
        exponent = exponent + h.conj().T @ log_q_matrix(A, q).data @ h
    return exp_q_matrix(HermitianMatrix(exponent), q, into=HermitianMatrix).trace()


def check_block_multivariate(
    L, As: Sequence, Hs: Sequence, q, sample_pair: Sequence, lam: float, *, margin_tol: float = MARGIN_TOL
) -> CheckReport:
    """Concavity (``q`` in ``(1, 2]``) or convexity (``[2, 3]``) of
    ``(A_1..A_k) -> Tr exp_q(L + sum H_i* log_q(A_i) H_i)`` between the tuples
    ``As`` and ``sample_pair``, for ``L >= 0`` and ``sum H_i* H_i <= I``.

    Sub-report: the block-matrix identity at ``As``.
    """
    q = _q_in(q, 1.0, 3.0, lo_open=True)
    lam = _lambda(lam)
    L = as_hermitian(L)
    if not (len(As) == len(Hs) == len(sample_pair)) or not As:
        raise ParameterViolation("need matching, non-empty tuples of A_i, H_i and the second sample")
    _require_psd(L, "L")
    n = same_dim(L, *Hs)
    gram = sum(as_array(h).conj().T @ as_array(h) for h in Hs)
    _require_psd(HermitianMatrix(np.eye(n) - gram), "I - sum H_i* H_i")
    first = [as_positive_definite(a) for a in As]
    second = [as_positive_definite(a) for a in sample_pair]
    mixed_point = [PositiveDefiniteMatrix(_mix(lam, a, b)) for a, b in zip(first, second)]
    v1, v2, vm = (_multivariate_phi(L, point, Hs, q) for point in (first, second, mixed_point))
    block_lhs, block_rhs = block_identity_sides(L, first, Hs, q)
    identity = compare(
        "check_block_multivariate",
        block_lhs,
        block_rhs,
        _scale(block_lhs, block_rhs),
        relation="eq",
        tol=FORM_TOL,
        notes="block identity",
    )
    combo = lam * v1 + (1.0 - lam) * v2
    report = _direction_reports(
        "check_block_multivariate",
        q.q,
        combo,
        vm,
        _scale(v1, v2, vm),
        margin_tol,
        f"q={q.q:g}, k={len(As)}, lambda={lam:g}",
    )
    return replace(report, sub_reports=report.sub_reports + (identity,))


def check_quasi_entropy_convexity(sample_pair, X, f: ScalarFunction, lam: float, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """Joint convexity (or concavity) of ``(rho, sigma) -> S_f^X(rho|sigma)`` per ``f``'s flag."""
    if f.operator_convexity not in (CONVEX, CONCAVE):
        raise ParameterViolation(f"{f.name} has no operator convexity flag")
    lam = _lambda(lam)
    (r1, s1), (r2, s2) = sample_pair
    t1 = quasi_entropy_terms(r1, s1, X, f)
    t2 = quasi_entropy_terms(r2, s2, X, f)
    tm = quasi_entropy_terms(_mix(lam, r1, r2), _mix(lam, s1, s2), X, f)
    combo = lam * t1.real() + (1.0 - lam) * t2.real()
    mixed = tm.real()
    scale = t1.scale + t2.scale + tm.scale
    notes = f"f={f.name}, lambda={lam:g}"
    if f.operator_convexity == CONVEX:
        return compare("check_quasi_entropy_convexity", mixed, combo, scale, tol=margin_tol, notes=notes)
    return compare("check_quasi_entropy_convexity", combo, mixed, scale, tol=margin_tol, notes=notes)


def _lieb_ando_kind(alpha: float, beta: float) -> str:
    if alpha >= 0 and beta >= 0 and alpha + beta <= 1:
        return CONCAVE
    if -1 <= alpha <= 0 and -1 <= beta <= 0:
        return CONVEX
    if -1 <= alpha <= 0 and 1 - alpha <= beta <= 2:
        return CONVEX
    if -1 <= beta <= 0 and 1 - beta <= alpha <= 2:
        return CONVEX
    raise ParameterViolation(f"(alpha, beta) = ({alpha:g}, {beta:g}) is outside the Lieb and Ando ranges")


def check_lieb_ando(sample_pair, X, alpha: float, beta: float, lam: float, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """Joint concavity (Lieb) or convexity (Ando) of ``(A, B) -> Tr X* A^alpha X B^beta``."""
    kind = _lieb_ando_kind(alpha, beta)
    lam = _lambda(lam)
    x = as_array(X)

    def value(A, B) -> float:
        return trace_product(x.conj().T @ powm(A, alpha).data @ x, powm(B, beta)).real

    (A1, B1), (A2, B2) = sample_pair
    v1, v2 = value(A1, B1), value(A2, B2)
    vm = value(PositiveDefiniteMatrix(_mix(lam, A1, A2)), PositiveDefiniteMatrix(_mix(lam, B1, B2)))
    combo = lam * v1 + (1.0 - lam) * v2
    notes = f"alpha={alpha:g}, beta={beta:g}, lambda={lam:g}; {kind}"
    if kind == CONVEX:
        return compare("check_lieb_ando", vm, combo, _scale(v1, v2, vm), tol=margin_tol, notes=notes)
    return compare("check_lieb_ando", combo, vm, _scale(v1, v2, vm), tol=margin_tol, notes=notes)


def check_hm_inequality(rho, sigma, f: ScalarFunction = T_LOG_T, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """``S_f^I(rho|sigma) <= Tr sigma f(sigma^{-1/2} rho sigma^{-1/2})`` for operator convex ``f``."""
    if f.operator_convexity != CONVEX:
        raise ParameterViolation(f"{f.name} is not flagged operator convex")
    rho = as_positive_definite(rho)
    quasi = quasi_entropy_terms(rho, sigma, np.eye(rho.dim), f)
    maximal = maximal_f_divergence_terms(rho, sigma, f)
    return compare(
        "check_hm_inequality",
        quasi.real(),
        maximal.real(),
        quasi.scale + maximal.scale,
        tol=margin_tol,
        notes=f"f={f.name}",
    )


# algebraic identities


def check_tsallis_forms(A, B, H, q, *, tol: float = FORM_TOL) -> CheckReport:
    """Defining and expanded forms of ``S_{H,q}`` agree."""
    inst = EntropyInstance(A, B, H, q)
    direct = reduced_tsallis_terms(inst)
    expanded = reduced_tsallis_alt_terms(inst)
    return compare(
        "check_tsallis_forms",
        direct.real(),
        expanded.real(),
        direct.scale + expanded.scale,
        relation="eq",
        tol=tol,
        notes=f"q={inst.q.q:g}",
    )


def check_decomposition(rho, sigma, H, *, tol: float = DECOMPOSITION_TOL) -> CheckReport:
    """``S_H = S_{t log t}^H + Tr[(I - HH*) rho log rho] + Tr[sigma - rho]``."""
    lhs, rhs = decomposition_terms(rho, sigma, H)
    return compare(
        "check_decomposition", lhs.real(), rhs.real(), lhs.scale + rhs.scale, relation="eq", tol=tol
    )


def check_unitary_covariance(inst: EntropyInstance, U, *, tol: float = FORM_TOL) -> CheckReport:
    """``S_{H,q}(UAU*|UBU*) = S_{U*HU,q}(A|B)``."""
    lhs, rhs = unitary_covariance_terms(inst, U)
    q = inst.q.q if inst.q is not None else 1.0
    return compare(
        "check_unitary_covariance",
        lhs.real(),
        rhs.real(),
        lhs.scale + rhs.scale,
        relation="eq",
        tol=tol,
        notes=f"q={q:g}",
    )


def check_log_q_quotient(x: float, y: float, q, *, tol: float = QUOTIENT_TOL) -> CheckReport:
    """``log_q(y/x) = log_q y - (y/x)^{q-1} log_q x``."""
    q = QParameter.of(q)
    lhs = log_q_scalar(y / x, q)
    rhs = log_q_scalar(y, q) - (y / x) ** q.r * log_q_scalar(x, q)
    return compare(
        "check_log_q_quotient", lhs, rhs, _scale(lhs, rhs), relation="eq", tol=tol, notes=f"q={q.q:g}"
    )


def check_variational_bound(problem: VariationalProblem, candidate, *, margin_tol: float = MARGIN_TOL) -> CheckReport:
    """Objective at a feasible ``candidate`` never exceeds the closed-form value.

    Sub-report: the objective at the closed-form maximizer attains it.
    """
    value = problem.closed_form_value()
    at_candidate = problem.objective(candidate)
    at_maximizer = problem.objective(problem.maximizer())
    notes = problem.kind.value if problem.q is None else f"{problem.kind.value}, q={problem.q.q:g}"
    attainment = compare(
        "check_variational_bound",
        at_maximizer,
        value,
        _scale(at_maximizer, value),
        relation="eq",
        tol=FORM_TOL,
        notes="attainment",
    )
    return compare(
        "check_variational_bound",
        at_candidate,
        value,
        _scale(at_candidate, value),
        tol=margin_tol,
        notes=notes,
        sub_reports=(attainment,),
    )
