"""Check registry, grid campaigns and trial regeneration.

Every trial is identified by a fingerprint string

    redent-<version>:<check_id>:seed=<s>:dim=<n>:trial=<t>:field=<f>:spectrum=<lo>,<hi>[:<param>=<value>...]

from which :func:`regenerate` rebuilds the sampled instance bit for bit.
"""

from __future__ import annotations

import logging
import re
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from itertools import product
from typing import Callable

import numpy as np

from redent import __version__
from redent.checks import (
    CheckReport,
    check_block_multivariate,
    check_bpl_fs,
    check_convexity_reduced,
    check_convexity_tsallis,
    check_decomposition,
    check_gt_hp,
    check_hm_inequality,
    check_hq_and_classical_limits,
    check_interpolation,
    check_lieb_ando,
    check_log_q_quotient,
    check_lower_bound_classical,
    check_lower_bound_tsallis,
    check_phi_q_concavity,
    check_q_golden_thompson,
    check_q_jensen,
    check_quasi_entropy_convexity,
    check_reduced_jensen,
    check_seo_fs_special,
    check_tsallis_forms,
    check_unitary_covariance,
    check_upper_bound_tsallis,
    check_variational_bound,
)
from redent.config import SuiteConfig
from redent.deformed import QParameter
from redent.entropy import EntropyInstance
from redent.errors import FingerprintVersionMismatch, RedentError
from redent.functions import builtin
from redent.linalg import HermitianMatrix, PositiveDefiniteMatrix
from redent.sampling import (
    SamplerSpec,
    random_contraction,
    random_density,
    random_hermitian,
    random_ordered_triple,
    random_partition_of_identity,
    random_positive_definite,
    random_unitary,
)
from redent.variational import ProblemKind, VariationalProblem

logger = logging.getLogger(__name__)

FINGERPRINT_PREFIX = "redent-"
MAX_FAILURE_FINGERPRINTS = 20
Q_EDGE = 1e-12

INT_PATTERN = re.compile(r"-?\d+")


@dataclass(frozen=True)
class Trial:
    """A report together with every sampled input, by name."""

    report: CheckReport
    matrices: dict
    entropy_value: float | None = None


@dataclass(frozen=True)
class CheckSpec:
    check_id: str
    description: str
    axes: tuple[str, ...]
    cells: Callable[[SuiteConfig], list[dict]]
    trial: Callable[[SamplerSpec, dict, float], Trial]


REGISTRY: dict[str, CheckSpec] = {}


def register(check_id: str, description: str, axes: tuple[str, ...], cells: Callable[[SuiteConfig], list[dict]]):
    def wrap(trial_fn):
        REGISTRY[check_id] = CheckSpec(check_id, description, axes, cells, trial_fn)
        return trial_fn

    return wrap


# fingerprints


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(text: str):
    if INT_PATTERN.fullmatch(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def _param_key(params: dict) -> str:
    return ":".join(f"{k}={_format_value(params[k])}" for k in sorted(params))


@dataclass(frozen=True)
class TrialKey:
    check_id: str
    seed: int
    dim: int
    trial: int
    field: str
    spectrum: tuple[float, float]
    params: dict = field(default_factory=dict)

    def fingerprint(self) -> str:
        head = (
            f"{FINGERPRINT_PREFIX}{__version__}:{self.check_id}:seed={self.seed}:dim={self.dim}"
            f":trial={self.trial}:field={self.field}"
            f":spectrum={_format_value(self.spectrum[0])},{_format_value(self.spectrum[1])}"
        )
        params = _param_key(self.params)
        return f"{head}:{params}" if params else head

    def sampler_spec(self) -> SamplerSpec:
        stream = (
            zlib.crc32(self.check_id.encode()),
            zlib.crc32(_param_key(self.params).encode()),
            self.trial,
        )
        return SamplerSpec(self.dim, self.spectrum[0], self.spectrum[1], self.field, self.seed, stream)


def parse_fingerprint(fingerprint: str) -> TrialKey:
    parts = fingerprint.strip().split(":")
    if len(parts) < 7:
        raise FingerprintVersionMismatch(fingerprint, "too few fields")
    version = parts[0]
    if not version.startswith(FINGERPRINT_PREFIX):
        raise FingerprintVersionMismatch(fingerprint, "not a redent fingerprint")
    if version != f"{FINGERPRINT_PREFIX}{__version__}":
        raise FingerprintVersionMismatch(
            fingerprint, f"produced by {version}, this is {FINGERPRINT_PREFIX}{__version__}"
        )
    check_id = parts[1]
    if check_id not in REGISTRY:
        raise FingerprintVersionMismatch(fingerprint, f"unknown check '{check_id}'")
    fields = {}
    for part in parts[2:]:
        name, sep, value = part.partition("=")
        if not sep or not name:
            raise FingerprintVersionMismatch(fingerprint, f"malformed field '{part}'")
        fields[name] = value
    try:
        lo, hi = (float(v) for v in fields.pop("spectrum").split(","))
        key = TrialKey(
            check_id=check_id,
            seed=int(fields.pop("seed")),
            dim=int(fields.pop("dim")),
            trial=int(fields.pop("trial")),
            field=fields.pop("field"),
            spectrum=(lo, hi),
            params={name: _parse_value(value) for name, value in fields.items()},
        )
        key.sampler_spec()
    except (KeyError, ValueError) as exc:
        raise FingerprintVersionMismatch(fingerprint, f"cannot decode fields ({exc})") from exc
    if set(key.params) != set(REGISTRY[check_id].axes):
        raise FingerprintVersionMismatch(fingerprint, f"parameters do not match the axes of {check_id}")
    return key


def evaluate(key: TrialKey, margin_tol: float = 1e-8) -> Trial:
    """Run one trial; raises whatever the check raises."""
    entry = REGISTRY[key.check_id]
    trial = entry.trial(key.sampler_spec(), dict(key.params), margin_tol)
    return replace(trial, report=trial.report.with_fingerprint(key.fingerprint()))


def regenerate(fingerprint: str, margin_tol: float = 1e-8) -> Trial:
    """Rebuild the exact trial behind ``fingerprint``."""
    key = parse_fingerprint(fingerprint)
    logger.debug("regenerating %s", fingerprint)
    return evaluate(key, margin_tol)


# grids


def _q_cells(cfg: SuiteConfig, lo: float, hi: float, *, lo_open: bool) -> list[float]:
    return [q for q in cfg.q_grid if (lo < q if lo_open else lo <= q) and q <= hi and abs(q - 1.0) > Q_EDGE]


def _with_lambda(cfg: SuiteConfig, cells: list[dict]) -> list[dict]:
    return [dict(cell, **{"lambda": lam}) for cell in cells for lam in cfg.lambda_grid]


def _no_cells(cfg: SuiteConfig) -> list[dict]:
    return [{}]


def _p_cells(cfg: SuiteConfig) -> list[dict]:
    return [{"p": p} for p in cfg.p_grid]


def _all_q_cells(cfg: SuiteConfig) -> list[dict]:
    return [{"q": q} for q in cfg.q_grid]


def _golden_q_cells(cfg: SuiteConfig) -> list[dict]:
    return [{"q": q} for q in _q_cells(cfg, 1.0, 2.0, lo_open=True)]


BPL_FS_CELLS = (
    ("i", 1.0, 0.5),
    ("i", 2.0, 1.0),
    ("i", 3.0, 2.0),
    ("ii", 1.0, 0.5),
    ("ii", 2.0, 1.0),
    ("ii", 0.5, 0.5),
)

LIEB_ANDO_CELLS = (
    (0.3, 0.5),
    (0.5, 0.5),
    (-0.5, -0.3),
    (-0.5, 1.7),
    (1.6, -0.4),
)


# registered trials


@register("check_gt_hp", "Tr e^{S+T} <= Tr (e^{pT/2} e^{pS} e^{pT/2})^{1/p}", ("p",), _p_cells)
def _trial_gt_hp(spec, params, tol):
    S, T = random_hermitian(spec.child(0)), random_hermitian(spec.child(1))
    return Trial(check_gt_hp(S, T, params["p"], margin_tol=tol), {"S": S, "T": T})


@register(
    "check_interpolation",
    "Tr exp(L + sum H_j* B_j H_j) <= Tr[e^L sum H_j* e^{B_j} H_j] for a partition of the identity",
    ("k",),
    lambda cfg: [{"k": 2}, {"k": 3}],
)
def _trial_interpolation(spec, params, tol):
    k = params["k"]
    L = random_hermitian(spec.child(0))
    Bs = [random_hermitian(spec.child(1, j)) for j in range(k)]
    Hs = random_partition_of_identity(spec.child(2), k)
    matrices = {"L": L, **{f"B{j + 1}": B for j, B in enumerate(Bs)}, **{f"H{j + 1}": H for j, H in enumerate(Hs)}}
    return Trial(check_interpolation(L, Bs, Hs, margin_tol=tol), matrices)


@register("check_reduced_jensen", "Tr exp(HBH*) <= Tr[H e^B H*] + Tr[I - HH*]", (), _no_cells)
def _trial_reduced_jensen(spec, params, tol):
    B, H = random_hermitian(spec.child(0)), random_contraction(spec.child(1))
    return Trial(check_reduced_jensen(B, H, margin_tol=tol), {"B": B, "H": H})


@register("check_lower_bound_classical", "Lower bound on S_H(X|Y) for unit-trace X", ("p",), _p_cells)
def _trial_lower_bound_classical(spec, params, tol):
    X, Y = random_density(spec.child(0)), random_positive_definite(spec.child(1))
    H = random_contraction(spec.child(2))
    return Trial(check_lower_bound_classical(X, Y, H, params["p"], margin_tol=tol), {"X": X, "Y": Y, "H": H})


@register(
    "check_q_jensen",
    "Tr exp_q(sum H_j* B_j H_j) <= sum Tr[H_j* exp_q(B_j) H_j], q in [1, 2]",
    ("k", "q"),
    lambda cfg: [{"q": q, "k": 2} for q in _q_cells(cfg, 1.0, 2.0, lo_open=False)],
)
def _trial_q_jensen(spec, params, tol):
    k = params["k"]
    Bs = [random_positive_definite(spec.child(0, j)) for j in range(k)]
    Hs = random_partition_of_identity(spec.child(1), k)
    matrices = {**{f"B{j + 1}": B for j, B in enumerate(Bs)}, **{f"H{j + 1}": H for j, H in enumerate(Hs)}}
    return Trial(check_q_jensen(Bs, Hs, params["q"], margin_tol=tol), matrices)


@register("check_q_golden_thompson", "Tr exp_q(A + B) <= Tr[exp_q(A) exp_q(B)], q in (1, 2]", ("q",), _golden_q_cells)
def _trial_q_golden_thompson(spec, params, tol):
    A, B = random_positive_definite(spec.child(0)), random_positive_definite(spec.child(1))
    return Trial(check_q_golden_thompson(A, B, params["q"], margin_tol=tol), {"A": A, "B": B})


@register("check_lower_bound_tsallis", "Lower bound on S_{H,q}(X|Y) under I <= Y <= X, q in (1, 2]", ("q",), _golden_q_cells)
def _trial_lower_bound_tsallis(spec, params, tol):
    X, Y = random_ordered_triple(spec.child(0))
    H = random_contraction(spec.child(1))
    report = check_lower_bound_tsallis(X, Y, H, params["q"], margin_tol=tol)
    return Trial(report, {"X": X, "Y": Y, "H": H}, entropy_value=report.rhs)


@register(
    "check_bpl_fs",
    "Power-mean trace inequalities Tr[A^{1+t}B^t] <= ... and Tr[A(A^{-s/2}B^sA^{-s/2})^{t/s}] <= Tr[A^{1-t}B^t]",
    ("s", "t", "variant"),
    lambda cfg: [{"variant": v, "s": s, "t": t} for v, s, t in BPL_FS_CELLS],
)
def _trial_bpl_fs(spec, params, tol):
    A, B = random_positive_definite(spec.child(0)), random_positive_definite(spec.child(1))
    report = check_bpl_fs(A, B, params["s"], params["t"], params["variant"], margin_tol=tol)
    return Trial(report, {"A": A, "B": B})


@register(
    "check_upper_bound_tsallis",
    "Upper bound on S_{H,q}(A|B) for an invertible contraction, q in [0, 2], p >= |q - 1|",
    ("p", "q"),
    lambda cfg: [
        {"q": q, "p": p}
        for q in _q_cells(cfg, 0.0, 2.0, lo_open=False)
        for p in cfg.p_grid
        if p >= abs(q - 1.0)
    ],
)
def _trial_upper_bound_tsallis(spec, params, tol):
    A, B = random_positive_definite(spec.child(0)), random_positive_definite(spec.child(1))
    H = random_contraction(spec.child(2), invertible=True)
    report = check_upper_bound_tsallis(A, B, H, params["q"], params["p"], margin_tol=tol)
    return Trial(report, {"A": A, "B": B, "H": H})


def _pair(spec: SamplerSpec, key: int, sampler=random_positive_definite):
    return (sampler(spec.child(key, 0)), sampler(spec.child(key, 1))), (
        sampler(spec.child(key, 2)),
        sampler(spec.child(key, 3)),
    )


@register(
    "check_convexity_tsallis",
    "Joint convexity of S_{H,q} for q in [0, 2], concavity for q in [2, 3]",
    ("lambda", "q"),
    lambda cfg: _with_lambda(cfg, [{"q": q} for q in _q_cells(cfg, 0.0, 3.0, lo_open=False)]),
)
def _trial_convexity_tsallis(spec, params, tol):
    (A1, B1), (A2, B2) = _pair(spec, 0)
    H = random_contraction(spec.child(1))
    report = check_convexity_tsallis(((A1, B1), (A2, B2)), H, params["q"], params["lambda"], margin_tol=tol)
    return Trial(report, {"A1": A1, "B1": B1, "A2": A2, "B2": B2, "H": H})


@register(
    "check_convexity_reduced",
    "Joint convexity of (A, B) -> S_H(A|B)",
    ("lambda",),
    lambda cfg: _with_lambda(cfg, [{}]),
)
def _trial_convexity_reduced(spec, params, tol):
    (A1, B1), (A2, B2) = _pair(spec, 0)
    H = random_contraction(spec.child(1))
    report = check_convexity_reduced(((A1, B1), (A2, B2)), H, params["lambda"], margin_tol=tol)
    return Trial(report, {"A1": A1, "B1": B1, "A2": A2, "B2": B2, "H": H})


def _phi_cells(cfg: SuiteConfig) -> list[dict]:
    return _with_lambda(cfg, [{"q": q} for q in _q_cells(cfg, 1.0, 3.0, lo_open=True)])


def _phi_inputs(spec: SamplerSpec):
    L = random_positive_definite(spec.child(0))
    H = random_contraction(spec.child(1))
    A1, A2 = random_positive_definite(spec.child(2)), random_positive_definite(spec.child(3))
    return L, H, A1, A2


@register(
    "check_phi_q_concavity",
    "A -> Tr exp_q(L + H* log_q(A) H) is concave for q in (1, 2], convex for q in [2, 3]",
    ("lambda", "q"),
    _phi_cells,
)
def _trial_phi_q(spec, params, tol):
    L, H, A1, A2 = _phi_inputs(spec)
    report = check_phi_q_concavity(L, H, params["q"], (A1, A2), params["lambda"], margin_tol=tol)
    return Trial(report, {"L": L, "H": H, "A1": A1, "A2": A2})


@register(
    "check_hq_and_classical_limits",
    "h_q = log_q phi_q concavity/convexity and concavity of A -> Tr exp(L + H* log(A) H)",
    ("lambda", "q"),
    lambda cfg: _with_lambda(cfg, [{"q": 1.0}] + [{"q": q} for q in _q_cells(cfg, 1.0, 3.0, lo_open=True)]),
)
def _trial_hq(spec, params, tol):
    L, H, A1, A2 = _phi_inputs(spec)
    if params["q"] == 1.0:
        L = random_hermitian(spec.child(0))
    report = check_hq_and_classical_limits(L, H, params["q"], (A1, A2), params["lambda"], margin_tol=tol)
    return Trial(report, {"L": L, "H": H, "A1": A1, "A2": A2})


@register(
    "check_block_multivariate",
    "Multivariate phi_q concavity/convexity with the block-matrix identity",
    ("k", "lambda", "q"),
    lambda cfg: _with_lambda(cfg, [{"q": q, "k": 2} for q in _q_cells(cfg, 1.0, 3.0, lo_open=True)]),
)
def _trial_block(spec, params, tol):
    k = params["k"]
    L = random_positive_definite(spec.child(0))
    Hs = random_partition_of_identity(spec.child(1), k + 1)[:k]
    As = [random_positive_definite(spec.child(2, j)) for j in range(k)]
    others = [random_positive_definite(spec.child(3, j)) for j in range(k)]
    report = check_block_multivariate(L, As, Hs, params["q"], others, params["lambda"], margin_tol=tol)
    matrices = {"L": L}
    for j in range(k):
        matrices.update({f"H{j + 1}": Hs[j], f"A{j + 1}": As[j], f"A{j + 1}'": others[j]})
    return Trial(report, matrices)


QUASI_FUNCTIONS = ("t_log_t", "power_0.5")


@register(
    "check_quasi_entropy_convexity",
    "Joint convexity (t log t) or concavity (t^{1/2}) of the quasi-entropy S_f^X",
    ("f", "lambda"),
    lambda cfg: _with_lambda(cfg, [{"f": name} for name in QUASI_FUNCTIONS]),
)
def _trial_quasi_entropy(spec, params, tol):
    (r1, s1), (r2, s2) = _pair(spec, 0, random_density)
    X = random_contraction(spec.child(1))
    report = check_quasi_entropy_convexity(((r1, s1), (r2, s2)), X, builtin(params["f"]), params["lambda"], margin_tol=tol)
    return Trial(report, {"rho1": r1, "sigma1": s1, "rho2": r2, "sigma2": s2, "X": X})


@register(
    "check_seo_fs_special",
    "Tr[(A - A^{1-a}B^a)/a] <= -Tr[A log_{1+a}((A^{-p/2}B^pA^{-p/2})^{1/p})] with a = q - 1",
    ("alpha", "p"),
    lambda cfg: [
        {"alpha": q - 1.0, "p": p}
        for q in _q_cells(cfg, 0.0, 2.0, lo_open=False)
        for p in cfg.p_grid
        if p >= abs(q - 1.0)
    ],
)
def _trial_seo_fs(spec, params, tol):
    A, B = random_positive_definite(spec.child(0)), random_positive_definite(spec.child(1))
    return Trial(check_seo_fs_special(A, B, params["alpha"], params["p"], margin_tol=tol), {"A": A, "B": B})


@register(
    "check_lieb_ando",
    "Lieb concavity and Ando convexity of (A, B) -> Tr X* A^alpha X B^beta",
    ("alpha", "beta", "lambda"),
    lambda cfg: _with_lambda(cfg, [{"alpha": a, "beta": b} for a, b in LIEB_ANDO_CELLS]),
)
def _trial_lieb_ando(spec, params, tol):
    (A1, B1), (A2, B2) = _pair(spec, 0)
    X = random_contraction(spec.child(1))
    report = check_lieb_ando(((A1, B1), (A2, B2)), X, params["alpha"], params["beta"], params["lambda"], margin_tol=tol)
    return Trial(report, {"A1": A1, "B1": B1, "A2": A2, "B2": B2, "X": X})


@register(
    "check_hm_inequality",
    "Quasi-entropy S_f^I never exceeds the maximal f-divergence for operator convex f",
    ("f",),
    lambda cfg: [{"f": "t_log_t"}],
)
def _trial_hm(spec, params, tol):
    rho, sigma = random_positive_definite(spec.child(0)), random_positive_definite(spec.child(1))
    return Trial(check_hm_inequality(rho, sigma, builtin(params["f"]), margin_tol=tol), {"rho": rho, "sigma": sigma})


@register("check_tsallis_forms", "Defining and expanded forms of S_{H,q} agree", ("q",), _all_q_cells)
def _trial_tsallis_forms(spec, params, tol):
    A, B = random_positive_definite(spec.child(0)), random_positive_definite(spec.child(1))
    H = random_contraction(spec.child(2))
    report = check_tsallis_forms(A, B, H, params["q"])
    return Trial(report, {"A": A, "B": B, "H": H}, entropy_value=report.lhs)


@register(
    "check_decomposition",
    "S_H = S_{t log t}^H + Tr[(I - HH*) rho log rho] + Tr[sigma - rho]",
    (),
    _no_cells,
)
def _trial_decomposition(spec, params, tol):
    rho, sigma = random_density(spec.child(0)), random_density(spec.child(1))
    H = random_contraction(spec.child(2))
    return Trial(check_decomposition(rho, sigma, H), {"rho": rho, "sigma": sigma, "H": H})


@register("check_unitary_covariance", "S_{H,q}(UAU*|UBU*) = S_{U*HU,q}(A|B)", ("q",), _all_q_cells)
def _trial_unitary_covariance(spec, params, tol):
    A, B = random_positive_definite(spec.child(0)), random_positive_definite(spec.child(1))
    H, U = random_contraction(spec.child(2)), random_unitary(spec.child(3))
    report = check_unitary_covariance(EntropyInstance(A, B, H, params["q"]), U)
    return Trial(report, {"A": A, "B": B, "H": H, "U": U})


@register("check_log_q_quotient", "log_q(y/x) = log_q y - (y/x)^{q-1} log_q x", ("q",), _all_q_cells)
def _trial_log_q_quotient(spec, params, tol):
    x, y = spec.rng().uniform(spec.spectrum_lo, spec.spectrum_hi, 2)
    return Trial(check_log_q_quotient(float(x), float(y), params["q"]), {"x": float(x), "y": float(y)})


def _variational_cells(cfg: SuiteConfig) -> list[dict]:
    cells = [{"kind": kind.value, "q": 1.0} for kind in (ProblemKind.CLASSICAL_OVER_X, ProblemKind.CLASSICAL_OVER_A)]
    for kind in (ProblemKind.DEFORMED_OVER_X, ProblemKind.DEFORMED_OVER_A):
        cells.extend({"kind": kind.value, "q": q} for q in _q_cells(cfg, 1.0, 2.0, lo_open=True))
    return cells


def _variational_instance(spec: SamplerSpec, kind: ProblemKind, q: float):
    """A problem with data satisfying its domain conditions, plus a feasible candidate point."""
    H = random_contraction(spec.child(0))
    rng = spec.child(9).rng()
    if kind is ProblemKind.CLASSICAL_OVER_X:
        A, Y = random_hermitian(spec.child(1)), random_positive_definite(spec.child(2))
        problem = VariationalProblem(kind, H, A=A, Y=Y)
        return problem, random_density(spec.child(3)), {"H": H, "A": A, "Y": Y}
    if kind is ProblemKind.CLASSICAL_OVER_A:
        X, B = random_density(spec.child(1)), random_hermitian(spec.child(2))
        problem = VariationalProblem(kind, H, X=X, B=B)
        return problem, random_hermitian(spec.child(3)), {"H": H, "X": X, "B": B}
    if kind is ProblemKind.DEFORMED_OVER_X:
        # A > 0 keeps A + H log_q(Y) H* above -I/(q-1)
        A, Y = random_positive_definite(spec.child(1)), random_positive_definite(spec.child(2))
        gamma = float(rng.uniform(0.5, 3.0))
        problem = VariationalProblem(kind, H, A=A, Y=Y, q=QParameter(q), gamma=gamma)
        candidate = PositiveDefiniteMatrix(gamma * random_density(spec.child(3)).data)
        return problem, candidate, {"H": H, "A": A, "Y": Y}
    # X > I and -I/(2(q-1)) <= B < 0 give log_q X > 0 >= HBH* and B > -I/(q-1)
    X = PositiveDefiniteMatrix(np.eye(spec.dim) + random_positive_definite(spec.child(1)).data)
    P = random_density(spec.child(2))
    B = HermitianMatrix(-(0.5 / (q - 1.0)) * P.data / P.norm)
    problem = VariationalProblem(kind, H, X=X, B=B, q=QParameter(q), gamma=X.trace())
    return problem, random_positive_definite(spec.child(3)), {"H": H, "X": X, "B": B}


@register(
    "check_variational_bound",
    "Objective at a feasible point never exceeds the closed-form value, which the maximizer attains",
    ("kind", "q"),
    _variational_cells,
)
def _trial_variational(spec, params, tol):
    kind = ProblemKind(params["kind"])
    problem, candidate, matrices = _variational_instance(spec, kind, params["q"])
    report = check_variational_bound(problem, candidate, margin_tol=tol)
    return Trial(report, {**matrices, "candidate": candidate})


# campaigns


@dataclass(frozen=True)
class CellTask:
    check_id: str
    dim: int
    params: dict
    trials: int
    seed: int
    field: str
    spectrum: tuple[float, float]
    margin_tol: float
    verbose_trials: bool


@dataclass
class CellResult:
    check_id: str
    dim: int
    params: dict
    trials: int = 0
    passes: int = 0
    failures: int = 0
    errors: int = 0
    min_margin: float | None = None
    min_relative_margin: float | None = None
    min_margin_fingerprint: str | None = None
    negative_values: int = 0
    failing_fingerprints: list[str] = field(default_factory=list)
    records: list[dict] = field(default_factory=list)

    def observe(self, report: CheckReport) -> None:
        worst = report.worst()
        if self.min_relative_margin is None or worst.relative_margin < self.min_relative_margin:
            self.min_relative_margin = worst.relative_margin
            self.min_margin = worst.margin
            self.min_margin_fingerprint = report.fingerprint

    def fail(self, fingerprint: str) -> None:
        self.failures += 1
        if len(self.failing_fingerprints) < MAX_FAILURE_FINGERPRINTS:
            self.failing_fingerprints.append(fingerprint)

    def as_dict(self, *, include_records: bool = False) -> dict:
        data = {
            "check_id": self.check_id,
            "dim": self.dim,
            "params": dict(self.params),
            "trials": self.trials,
            "passes": self.passes,
            "failures": self.failures,
            "errors": self.errors,
            "min_margin": self.min_margin,
            "min_relative_margin": self.min_relative_margin,
            "min_margin_fingerprint": self.min_margin_fingerprint,
            "negative_values": self.negative_values,
            "failing_fingerprints": list(self.failing_fingerprints),
        }
        if include_records:
            data["records"] = list(self.records)
        return data


def run_cell(task: CellTask) -> CellResult:
    result = CellResult(task.check_id, task.dim, dict(task.params))
    for t in range(task.trials):
        key = TrialKey(task.check_id, task.seed, task.dim, t, task.field, task.spectrum, dict(task.params))
        fingerprint = key.fingerprint()
        result.trials += 1
        try:
            trial = evaluate(key, task.margin_tol)
        except RedentError as exc:
            logger.debug("%s raised %s", fingerprint, exc)
            result.errors += 1
            result.fail(fingerprint)
            if task.verbose_trials:
                result.records.append({"fingerprint": fingerprint, "error": f"{type(exc).__name__}: {exc}"})
            continue
        report = trial.report
        result.observe(report)
        if report.all_hold:
            result.passes += 1
        else:
            result.fail(fingerprint)
        if trial.entropy_value is not None and trial.entropy_value < 0:
            result.negative_values += 1
        if task.verbose_trials:
            result.records.append(report.as_dict())
    return result


@dataclass
class SuiteReport:
    library_version: str
    config: dict
    checks: dict
    started_at: str = ""
    wall_clock_seconds: float = 0.0

    @property
    def total_trials(self) -> int:
        return sum(agg["trials"] for agg in self.checks.values())

    @property
    def total_failures(self) -> int:
        return sum(agg["failures"] for agg in self.checks.values())

    @property
    def passed(self) -> bool:
        return self.total_failures == 0

    def cell_rows(self) -> list[dict]:
        return [cell for agg in self.checks.values() for cell in agg["cells"]]

    def as_dict(self, *, include_timing: bool = True) -> dict:
        data = {
            "library_version": self.library_version,
            "config": self.config,
            "summary": {
                "trials": self.total_trials,
                "failures": self.total_failures,
                "passed": self.passed,
            },
            "checks": self.checks,
        }
        if include_timing:
            data["timing"] = {"started_at": self.started_at, "wall_clock_seconds": self.wall_clock_seconds}
        return data


def _aggregate(check_id: str, cells: list[CellResult], include_records: bool) -> dict:
    rows = [cell.as_dict(include_records=include_records) for cell in cells]
    measured = [cell for cell in cells if cell.min_relative_margin is not None]
    worst = min(measured, key=lambda c: c.min_relative_margin) if measured else None
    return {
        "description": REGISTRY[check_id].description,
        "axes": list(REGISTRY[check_id].axes),
        "trials": sum(c.trials for c in cells),
        "passes": sum(c.passes for c in cells),
        "failures": sum(c.failures for c in cells),
        "errors": sum(c.errors for c in cells),
        "min_margin": worst.min_margin if worst else None,
        "min_relative_margin": worst.min_relative_margin if worst else None,
        "min_margin_fingerprint": worst.min_margin_fingerprint if worst else None,
        "negative_values": sum(c.negative_values for c in cells),
        "cells": rows,
    }


class SuiteRunner:

    def __init__(self, config: SuiteConfig):
        self.config = config.validate(known_checks=REGISTRY)
        self.warnings: list[str] = []

    def selected_checks(self) -> list[str]:
        if self.config.checks == "all":
            return list(REGISTRY)
        return list(self.config.checks)

    def tasks(self) -> list[CellTask]:
        cfg = self.config
        tasks = []
        for check_id in self.selected_checks():
            cells = REGISTRY[check_id].cells(cfg)
            if not cells:
                message = f"[redent] {check_id}: no grid cell satisfies its parameter range; skipped"
                self.warnings.append(message)
                logger.info(message)
                continue
            for dim, params in product(cfg.dims, cells):
                tasks.append(
                    CellTask(
                        check_id=check_id,
                        dim=dim,
                        params=params,
                        trials=cfg.trials_per_cell,
                        seed=cfg.seed,
                        field=cfg.field,
                        spectrum=(cfg.spectrum[0], cfg.spectrum[1]),
                        margin_tol=cfg.margin_tol,
                        verbose_trials=cfg.verbose_trials,
                    )
                )
        return tasks

    def run(self, *, progress_factory: Callable[[int], object] | None = None) -> SuiteReport:
        self.warnings.clear()
        started_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
        clock = time.perf_counter()
        tasks = self.tasks()
        progress_cm = progress_factory(len(tasks)) if progress_factory is not None else nullcontext()

        results: list[CellResult] = []
        with progress_cm as progress:
            if self.config.jobs > 1 and len(tasks) > 1:
                with ProcessPoolExecutor(max_workers=self.config.jobs) as pool:
                    for result in pool.map(run_cell, tasks):
                        results.append(result)
                        if progress is not None:
                            progress.update(1)
            else:
                for task in tasks:
                    results.append(run_cell(task))
                    if progress is not None:
                        progress.update(1)

        by_check: dict[str, list[CellResult]] = {}
        for result in results:
            by_check.setdefault(result.check_id, []).append(result)
        checks = {
            check_id: _aggregate(check_id, cells, self.config.verbose_trials) for check_id, cells in by_check.items()
        }
        for check_id, agg in checks.items():
            if agg["failures"]:
                logger.warning("%s: %d of %d trials failed", check_id, agg["failures"], agg["trials"])
        return SuiteReport(
            library_version=__version__,
            config=_config_echo(self.config),
            checks=checks,
            started_at=started_at,
            wall_clock_seconds=round(time.perf_counter() - clock, 3),
        )


def _config_echo(cfg: SuiteConfig) -> dict:
    echo = cfg.as_dict()
    echo["output_path"] = str(echo["output_path"])
    echo["spectrum"] = list(echo["spectrum"])
    return echo


def run_suite(config: SuiteConfig, **kwargs) -> SuiteReport:
    return SuiteRunner(config).run(**kwargs)


def describe_checks() -> list[tuple[str, tuple[str, ...], str]]:
    return [(spec.check_id, spec.axes, spec.description) for spec in REGISTRY.values()]

