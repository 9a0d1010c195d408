from unittest import TestCase

import numpy as np
import pytest

from redent.deformed import QParameter
from redent.errors import ParameterViolation, PreconditionViolation, TraceConstraintViolation
from redent.linalg import HermitianMatrix, PositiveDefiniteMatrix
from redent.sampling import (
    SamplerSpec,
    random_contraction,
    random_density,
    random_direction,
    random_hermitian,
    random_positive_definite,
)
from redent.variational import (
    OptimizerConfig,
    ProblemKind,
    VariationalProblem,
    classical_maximizer_over_x,
    classical_objective_over_a,
    classical_value_over_x,
    deformed_maximizer_over_a,
    deformed_maximizer_over_x,
    deformed_objective_over_a,
    deformed_value_over_x,
    directional_derivative,
    numeric_max_over_trace_set,
    objective_classical_over_x,
    trace_set_point,
)


def _problem(kind, seed, q=None, gamma=1.0, dim=3):
    spec = SamplerSpec(dim, seed=seed)
    H = random_contraction(spec.child(0))
    if kind is ProblemKind.CLASSICAL_OVER_X:
        return VariationalProblem(kind, H, A=random_hermitian(spec.child(1)), Y=random_positive_definite(spec.child(2)))
    if kind is ProblemKind.CLASSICAL_OVER_A:
        return VariationalProblem(kind, H, X=random_density(spec.child(1)), B=random_hermitian(spec.child(2)))
    if kind is ProblemKind.DEFORMED_OVER_X:
        return VariationalProblem(
            kind,
            H,
            A=random_positive_definite(spec.child(1)),
            Y=random_positive_definite(spec.child(2)),
            q=QParameter(q),
            gamma=gamma,
        )
    X = PositiveDefiniteMatrix(np.eye(dim) + random_positive_definite(spec.child(1)).data)
    P = random_density(spec.child(2))
    B = HermitianMatrix(-(0.5 / (q - 1.0)) * P.data / P.norm)
    return VariationalProblem(kind, H, X=X, B=B, q=QParameter(q), gamma=X.trace())


def _feasible_point(problem, seed):
    spec = SamplerSpec(problem.dim, seed=seed)
    if problem.kind is ProblemKind.CLASSICAL_OVER_A:
        return random_hermitian(spec)
    if problem.kind is ProblemKind.DEFORMED_OVER_A:
        return random_positive_definite(spec)
    return PositiveDefiniteMatrix(problem.gamma * random_density(spec).data)


PROBLEMS = (
    (ProblemKind.CLASSICAL_OVER_X, None, 1.0),
    (ProblemKind.CLASSICAL_OVER_A, None, 1.0),
    (ProblemKind.DEFORMED_OVER_X, 1.5, 1.0),
    (ProblemKind.DEFORMED_OVER_X, 2.0, 2.5),
    (ProblemKind.DEFORMED_OVER_A, 1.3, None),
    (ProblemKind.DEFORMED_OVER_A, 2.0, None),
)


def _problems(seed):
    for kind, q, gamma in PROBLEMS:
        yield _problem(kind, seed, q=q, gamma=gamma if gamma is not None else 1.0)


class TestClosedForms(TestCase):

    def test_maximizer_attains_value(self):
        for seed in range(3):
            for problem in _problems(seed):
                with self.subTest(kind=problem.kind.value, q=problem.q, seed=seed):
                    value = problem.closed_form_value()
                    attained = problem.objective(problem.maximizer())
                    self.assertAlmostEqual(attained, value, delta=1e-9 * (1.0 + abs(value)))

    def test_feasible_points_stay_below(self):
        for seed in range(3):
            for problem in _problems(seed):
                value = problem.closed_form_value()
                for point_seed in range(100, 105):
                    with self.subTest(kind=problem.kind.value, q=problem.q, seed=seed, point=point_seed):
                        at_point = problem.objective(_feasible_point(problem, point_seed))
                        self.assertLessEqual(at_point, value + 1e-9 * (1.0 + abs(value)))

    def test_maximizer_on_trace_set(self):
        for kind, q, gamma in PROBLEMS:
            if not kind.over_x:
                continue
            with self.subTest(kind=kind.value, q=q):
                problem = _problem(kind, 4, q=q, gamma=gamma)
                self.assertAlmostEqual(problem.maximizer().trace(), gamma, places=12)

    def test_classical_limit_of_maximizer(self):
        spec = SamplerSpec(3, seed=5)
        A, Y = random_positive_definite(spec.child(1)), random_positive_definite(spec.child(2))
        H = random_contraction(spec.child(0))
        deformed = deformed_maximizer_over_x(A, Y, H, 1.0 + 1e-4)
        classical = classical_maximizer_over_x(A, Y, H)
        self.assertLessEqual(np.linalg.norm(deformed.data - classical.data), 1e-3)


class TestScalarExamples(TestCase):

    def test_classical_value_over_x(self):
        self.assertAlmostEqual(classical_value_over_x([[0.0]], [[2.0]], [[1.0]]), -0.306853, places=6)
        self.assertAlmostEqual(classical_value_over_x([[0.0]], [[2.0]], [[1.0]]), np.log(2.0) - 1.0, places=14)
        self.assertAlmostEqual(classical_value_over_x(np.zeros((3, 3)), np.eye(3)), 1.0 - 3.0 + np.log(3.0), places=13)

    def test_classical_objectives(self):
        self.assertAlmostEqual(objective_classical_over_x([[1.0]], [[0.5]], [[1.0]], [[1.0]]), 0.5, places=14)
        n = 3
        value = classical_objective_over_a(np.zeros((n, n)), np.eye(n) / n, np.zeros((n, n)))
        self.assertAlmostEqual(value, -np.log(n) - 1.0 + n, places=13)

    def test_deformed_value_over_x(self):
        self.assertAlmostEqual(deformed_value_over_x([[0.0]], [[2.0]], [[1.0]], 2.0, gamma=1.0), 0.0, places=14)
        self.assertAlmostEqual(deformed_value_over_x(np.zeros((3, 3)), np.eye(3), None, 1.5, gamma=3.0), 0.0, places=13)

    def test_deformed_objective_over_a_at_maximizer(self):
        # x = 2, b = 0.1, h = 1/2, q = 3/2: exp_q(b) = 1.05**2 and log_q(exp_q(b)) = b
        x, b, h, q = 2.0, 0.1, 0.5, 1.5
        log_q_x = (np.sqrt(x) - 1.0) / 0.5
        expected = np.sqrt(x) * log_q_x - h**2 * np.sqrt(x) * b - x + 1.05**2
        A0 = deformed_maximizer_over_a([[x]], [[b]], [[h]], q)
        self.assertAlmostEqual(A0.data[0, 0].real, log_q_x - h**2 * b, places=14)
        self.assertAlmostEqual(deformed_objective_over_a(A0, [[x]], [[b]], [[h]], q, gamma=x), expected, delta=1e-12)


class TestStationarity(TestCase):

    def test_directional_derivative_vanishes(self):
        for problem in _problems(6):
            point = problem.maximizer()
            for direction_seed in range(3):
                with self.subTest(kind=problem.kind.value, q=problem.q, direction=direction_seed):
                    direction = random_direction(
                        SamplerSpec(problem.dim, seed=direction_seed), trace_zero=problem.kind.over_x
                    )
                    slope = directional_derivative(problem.objective, point, direction, h=1e-5)
                    self.assertLessEqual(abs(slope), 1e-6)


class TestNumericalOracle(TestCase):

    def test_trace_set_point(self):
        X = trace_set_point(np.zeros(9), 3, 2.0)
        np.testing.assert_allclose(X.data, 2.0 * np.eye(3) / 3.0, atol=1e-14)

    def test_oracle_finds_maximal_purity(self):
        def purity(X):
            return float(np.sum(X.eigenvalues**2))

        result = numeric_max_over_trace_set(purity, 2, 1.0, OptimizerConfig(restarts=3, seed=1))
        # gamma I/n is the minimum; the random restarts reach a pure state
        self.assertLessEqual(result.value, 1.0 + 1e-12)
        self.assertGreaterEqual(result.value, 1.0 - 1e-4)
        self.assertGreaterEqual(result.x_star.eigenvalues[-1], 1.0 - 1e-4)
        self.assertAlmostEqual(result.x_star.trace(), 1.0, places=12)

    def test_oracle_finds_maximal_entropy(self):
        def entropy(X):
            w = X.eigenvalues
            return float(-np.sum(w * np.log(w)))

        for dim in (2, 3):
            with self.subTest(dim=dim):
                result = numeric_max_over_trace_set(entropy, dim, 1.0, OptimizerConfig(restarts=3, seed=2))
                self.assertAlmostEqual(result.value, np.log(dim), delta=1e-9)
                np.testing.assert_allclose(result.x_star.data, np.eye(dim) / dim, atol=1e-5)

    @pytest.mark.slow
    def test_oracle_matches_closed_form(self):
        cfg = OptimizerConfig(restarts=2, max_iters=500)
        for kind, q, gamma in PROBLEMS:
            if not kind.over_x:
                continue
            with self.subTest(kind=kind.value, q=q):
                problem = _problem(kind, 7, q=q, gamma=gamma, dim=2)
                result = numeric_max_over_trace_set(problem.objective, 2, problem.gamma, cfg)
                value = problem.closed_form_value()
                self.assertLessEqual(result.value, value + 1e-8 * (1.0 + abs(value)))
                self.assertAlmostEqual(result.value, value, delta=1e-5 * (1.0 + abs(value)))

    def test_optimizer_config(self):
        for kwargs in ({"max_iters": 0}, {"step_shrink": 1.5}, {"restarts": 0}, {"seed": -1}):
            with self.subTest(**kwargs):
                with self.assertRaises(ParameterViolation):
                    OptimizerConfig(**kwargs)


class TestPreconditions(TestCase):

    def test_deformed_over_a_requires_positive_a(self):
        X = PositiveDefiniteMatrix(2.0 * np.eye(2))
        with self.assertRaises(PreconditionViolation):
            deformed_objective_over_a(-np.eye(2), X, -0.1 * np.eye(2), np.eye(2), 1.5, gamma=4.0)

    def test_deformed_over_a_lower_bound_on_b(self):
        X = PositiveDefiniteMatrix(2.0 * np.eye(2))
        with self.assertRaises(PreconditionViolation):
            deformed_objective_over_a(np.eye(2), X, -3.0 * np.eye(2), np.eye(2), 1.5, gamma=4.0)

    def test_deformed_over_a_maximizer_must_be_positive(self):
        X = PositiveDefiniteMatrix(0.5 * np.eye(2))
        with self.assertRaises(PreconditionViolation):
            deformed_objective_over_a(np.eye(2), X, np.eye(2), np.eye(2), 1.5, gamma=1.0)

    def test_q_range(self):
        spec = SamplerSpec(2, seed=8)
        A, Y = random_positive_definite(spec.child(0)), random_positive_definite(spec.child(1))
        for q in (1.0, 0.7, 2.5):
            with self.subTest(q=q):
                with self.assertRaises(ParameterViolation):
                    deformed_value_over_x(A, Y, None, q)

    def test_trace_constraint(self):
        spec = SamplerSpec(2, seed=9)
        X = PositiveDefiniteMatrix(2.0 * random_density(spec.child(0)).data)
        with self.assertRaises(TraceConstraintViolation):
            objective_classical_over_x(X, random_hermitian(spec.child(1)), random_positive_definite(spec.child(2)))

    def test_problem_validation(self):
        H = random_contraction(SamplerSpec(2, seed=10))
        with self.assertRaises(ParameterViolation):
            VariationalProblem(ProblemKind.CLASSICAL_OVER_X, H, A=np.eye(2))
        with self.assertRaises(ParameterViolation):
            VariationalProblem(ProblemKind.CLASSICAL_OVER_X, H, A=np.eye(2), Y=np.eye(2), gamma=2.0)
        with self.assertRaises(ParameterViolation):
            VariationalProblem(ProblemKind.DEFORMED_OVER_X, H, A=np.eye(2), Y=np.eye(2), q=QParameter(0.5))
