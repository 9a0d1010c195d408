from unittest import TestCase

import numpy as np

from redent.deformed import (
    QParameter,
    deformed_derivatives,
    deformed_second_derivatives,
    exp_q_matrix,
    exp_q_scalar,
    exp_q_values,
    log_q_matrix,
    log_q_quotient_identity_check,
    log_q_scalar,
    log_q_values,
)
from redent.errors import DomainViolation, ParameterViolation
from redent.frechet import central_difference
from redent.linalg import HermitianMatrix, expm, logm
from redent.sampling import SamplerSpec, random_hermitian, random_positive_definite
from test_case_data import DEFORMED_CASES


class TestScalarDeformedFunctions(TestCase):

    def test_exact_values(self):
        for case in DEFORMED_CASES:
            with self.subTest(x=case.x, q=case.q):
                if case.log_q is not None:
                    self.assertAlmostEqual(log_q_scalar(case.x, case.q), case.log_q, places=12)
                    self.assertAlmostEqual(deformed_derivatives(case.x, case.q).dlog, case.dlog, places=12)
                if case.exp_q is not None:
                    self.assertAlmostEqual(exp_q_scalar(case.x, case.q), case.exp_q, places=12)
                    self.assertAlmostEqual(deformed_derivatives(case.x, case.q).dexp, case.dexp, places=12)

    def test_inverse_pair(self):
        for q in (0.3, 0.7, 1.5, 2.0, 2.5):
            for x in (0.2, 1.0, 3.7):
                with self.subTest(q=q, x=x):
                    self.assertAlmostEqual(exp_q_scalar(log_q_scalar(x, q), q), x, places=12)

    def test_strictly_increasing(self):
        rng = np.random.default_rng(19)
        for q in (0.3, 0.7, 1.0, 1.5, 2.0, 2.5):
            r = q - 1.0
            with self.subTest(q=q):
                logs = log_q_values(np.unique(rng.uniform(1e-6, 50.0, 500)), QParameter(q))
                self.assertTrue(np.all(np.diff(logs) > 0))
                if r > 0:
                    lo, hi = -1.0 / r + 1e-6, 20.0
                elif r < 0:
                    lo, hi = -20.0, -1.0 / r - 1e-6
                else:
                    lo, hi = -20.0, 20.0
                exps = exp_q_values(np.unique(rng.uniform(lo, hi, 500)), QParameter(q))
                self.assertTrue(np.all(np.diff(exps) > 0))

    def test_round_trip_at_domain_edge(self):
        # 1 + (q - 1) x -> 0+ from inside the domain
        for q in (0.5, 0.7, 1.5, 2.0, 2.5):
            r = q - 1.0
            for gap in (1e-3, 1e-6, 1e-9):
                with self.subTest(q=q, gap=gap):
                    x = -1.0 / r + (gap if r > 0 else -gap)
                    y = exp_q_scalar(x, q)
                    self.assertGreater(y, 0.0)
                    self.assertAlmostEqual(y, (abs(r) * gap) ** (1.0 / r), delta=1e-5 * y)
                    self.assertAlmostEqual(log_q_scalar(y, q), x, delta=1e-9 * (1.0 + abs(x)))
            with self.subTest(q=q, edge="closed"):
                with self.assertRaises(DomainViolation):
                    exp_q_scalar(-1.0 / r, q)
        for q, y in ((1.5, 1e-12), (2.5, 1e-6), (0.5, 1e-12), (0.5, 1e12)):
            with self.subTest(q=q, y=y):
                self.assertAlmostEqual(exp_q_scalar(log_q_scalar(y, q), q), y, delta=1e-6 * y)

    def test_classical_limit(self):
        for x in (0.3, 1.0, 4.0):
            with self.subTest(x=x):
                self.assertAlmostEqual(log_q_scalar(x, 1.0 + 1e-9), np.log(x), places=7)
                self.assertAlmostEqual(exp_q_scalar(np.log(x), 1.0 - 1e-9), x, places=7)

    def test_domain(self):
        with self.assertRaises(DomainViolation):
            log_q_scalar(0.0, 1.5)
        # 1 + (q - 1) x must stay positive
        with self.assertRaises(DomainViolation):
            exp_q_scalar(-2.0, 1.5)
        with self.assertRaises(DomainViolation):
            exp_q_scalar(2.0, 0.5)
        with self.assertRaises(DomainViolation):
            deformed_derivatives(-3.0, 1.5)

    def test_derivative_outside_one_domain(self):
        # x < 0 has no log_q but exp_q is defined for q = 1.5 when x > -2
        derivatives = deformed_derivatives(-1.0, 1.5)
        self.assertIsNone(derivatives.dlog)
        self.assertAlmostEqual(derivatives.dexp, exp_q_scalar(-1.0, 1.5) ** 0.5)

    def test_derivatives_match_finite_differences(self):
        for q in (0.5, 1.5, 2.5):
            for x in (0.5, 1.3):
                with self.subTest(q=q, x=x):
                    first = deformed_derivatives(x, q)
                    second = deformed_second_derivatives(x, q)
                    fd_log = central_difference(lambda h: log_q_scalar(x + h, q), 1e-5)
                    fd_exp = central_difference(lambda h: exp_q_scalar(x + h, q), 1e-5)
                    self.assertAlmostEqual(first.dlog, fd_log, delta=1e-8 * (1 + abs(fd_log)))
                    self.assertAlmostEqual(first.dexp, fd_exp, delta=1e-8 * (1 + abs(fd_exp)))
                    fd2_log = central_difference(lambda h: deformed_derivatives(x + h, q).dlog, 1e-5)
                    self.assertAlmostEqual(second.dlog, fd2_log, delta=1e-7 * (1 + abs(fd2_log)))

    def test_concavity_signs(self):
        for q in (0.3, 1.5):
            with self.subTest(q=q):
                grid = np.linspace(0.2, 5.0, 25)
                self.assertTrue(all(deformed_second_derivatives(x, q).dlog < 0 for x in grid))
                self.assertTrue(all(deformed_second_derivatives(x, q).dexp > 0 for x in (0.0, 0.5)))
        self.assertTrue(deformed_second_derivatives(2.0, 2.5).dlog > 0)

    def test_quotient_identity(self):
        rng = np.random.default_rng(7)
        for q in (0.3, 0.7, 1.5, 2.0, 2.5):
            for _ in range(50):
                x, y = rng.uniform(0.2, 5.0, 2)
                with self.subTest(q=q, x=x, y=y):
                    self.assertLessEqual(log_q_quotient_identity_check(x, y, q), 1e-12)

    def test_q_parameter(self):
        self.assertTrue(QParameter(1.0).is_classical)
        self.assertFalse(QParameter(1.0 + 1e-9).is_classical)
        self.assertEqual(QParameter(1.5), QParameter.of(1.5))
        self.assertAlmostEqual(QParameter(2.5).r, 1.5)
        with self.assertRaises(ParameterViolation):
            QParameter(float("nan"))


class TestMatrixDeformedFunctions(TestCase):

    def test_classical_dispatch(self):
        A = random_positive_definite(SamplerSpec(3, seed=4))
        np.testing.assert_allclose(log_q_matrix(A, 1.0).data, logm(A).data, atol=1e-12)
        H = random_hermitian(SamplerSpec(3, seed=4))
        np.testing.assert_allclose(exp_q_matrix(H, 1.0).data, expm(H).data, atol=1e-12)

    def test_matrix_inverse_pair(self):
        A = random_positive_definite(SamplerSpec(4, seed=6))
        for q in (0.7, 1.5, 2.5):
            with self.subTest(q=q):
                np.testing.assert_allclose(exp_q_matrix(log_q_matrix(A, q), q).data, A.data, atol=1e-10)

    def test_q_two_is_affine(self):
        # log_2 x = x - 1 and exp_2 x = 1 + x
        A = random_positive_definite(SamplerSpec(3, seed=8))
        np.testing.assert_allclose(log_q_matrix(A, 2.0).data, A.data - np.eye(3), atol=1e-12)
        np.testing.assert_allclose(
            exp_q_matrix(HermitianMatrix(A.data - np.eye(3)), 2.0).data, A.data, atol=1e-12
        )

    def test_matrix_domain(self):
        with self.assertRaises(DomainViolation):
            exp_q_matrix(np.diag([-3.0, 0.0]), 1.5)
