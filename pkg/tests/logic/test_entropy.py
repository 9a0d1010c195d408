from unittest import TestCase

import numpy as np

from redent.entropy import (
    EntropyInstance,
    decomposition_identity_residual,
    maximal_f_divergence,
    quasi_entropy,
    reduced_relative_entropy,
    reduced_tsallis_alt,
    reduced_tsallis_entropy,
    unitary_covariance_residual,
)
from redent.errors import ParameterViolation, QTooCloseToOne, ShapeMismatch
from redent.functions import SQRT, T_LOG_T, power
from redent.linalg import logm, trace_product
from redent.sampling import (
    SamplerSpec,
    random_contraction,
    random_density,
    random_positive_definite,
    random_unitary,
)


def _instance(seed, dim=3, q=None, spectrum=(0.2, 5.0)):
    spec = SamplerSpec(dim, *spectrum, seed=seed)
    return EntropyInstance(
        random_positive_definite(spec.child(0)),
        random_positive_definite(spec.child(1)),
        random_contraction(spec.child(2)),
        q,
    )


class TestReducedRelativeEntropy(TestCase):

    def test_equal_arguments(self):
        A = random_positive_definite(SamplerSpec(3, seed=1))
        self.assertAlmostEqual(reduced_relative_entropy(EntropyInstance(A, A)), 0.0, delta=1e-12)

    def test_scalar_values(self):
        self.assertAlmostEqual(reduced_relative_entropy(EntropyInstance([[1.0]], [[np.e]], [[1.0]])), np.e - 2.0, places=12)
        for h in (0.0, 0.3, 1.0):
            with self.subTest(h=h):
                value = reduced_relative_entropy(EntropyInstance([[2.0]], [[1.0]], [[h]]))
                self.assertAlmostEqual(value, 2.0 * np.log(2.0) - 1.0, places=12)

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeMismatch):
            EntropyInstance(np.eye(2), np.eye(3))


class TestReducedTsallisEntropy(TestCase):

    def test_q_two_identity_contraction_vanishes(self):
        base = _instance(2)
        inst = EntropyInstance(base.A, base.B, None, 2.0)
        self.assertAlmostEqual(reduced_tsallis_entropy(inst), 0.0, delta=1e-11)

    def test_scalar_value(self):
        inst = EntropyInstance([[2.0]], [[3.0]], [[0.5]], 2.0)
        self.assertAlmostEqual(reduced_tsallis_entropy(inst), 1.5, places=12)
        self.assertAlmostEqual(reduced_tsallis_alt(inst), 1.5, places=12)

    def test_alt_form_on_identity_inputs(self):
        inst = EntropyInstance(np.eye(3), np.eye(3), np.zeros((3, 3)), 1.5)
        self.assertAlmostEqual(reduced_tsallis_alt(inst), 0.0, delta=1e-12)

    def test_forms_agree(self):
        for q in (0.3, 0.7, 1.5, 2.0, 2.5):
            for seed in range(5):
                with self.subTest(q=q, seed=seed):
                    inst = _instance(seed, q=q)
                    direct = reduced_tsallis_entropy(inst)
                    self.assertAlmostEqual(reduced_tsallis_alt(inst), direct, delta=1e-8 * (1 + abs(direct)))

    def test_classical_dispatch(self):
        inst = _instance(3)
        self.assertEqual(reduced_tsallis_entropy(inst.with_q(1.0)), reduced_relative_entropy(inst))

    def test_classical_limit(self):
        inst = _instance(3, spectrum=(0.5, 2.0))
        classical = reduced_relative_entropy(inst)
        for q in (1.0 - 1e-4, 1.0 + 1e-4):
            with self.subTest(q=q):
                self.assertLessEqual(abs(reduced_tsallis_entropy(inst.with_q(q)) - classical), 1e-3)

    def test_alt_form_refuses_q_near_one(self):
        with self.assertRaises(QTooCloseToOne):
            reduced_tsallis_alt(_instance(0, q=1.0 + 1e-8))

    def test_requires_q(self):
        with self.assertRaises(ParameterViolation):
            reduced_tsallis_entropy(_instance(0))


class TestQuasiEntropy(TestCase):

    def test_zero_weight(self):
        rho, sigma = random_density(SamplerSpec(2, seed=4)), random_density(SamplerSpec(2, seed=5))
        self.assertEqual(quasi_entropy(rho, sigma, np.zeros((2, 2)), T_LOG_T), 0.0)

    def test_linear_function_gives_trace(self):
        rho = random_positive_definite(SamplerSpec(3, seed=4))
        sigma = random_positive_definite(SamplerSpec(3, seed=5))
        self.assertAlmostEqual(quasi_entropy(rho, sigma, np.eye(3), power(1.0)), rho.trace(), places=10)

    def test_t_log_t_trace_formula(self):
        spec = SamplerSpec(2, seed=4)
        rho, sigma = random_density(spec.child(0)), random_density(spec.child(1))
        X = random_contraction(spec.child(2))
        x = X.data
        rho_log_rho = rho.data @ logm(rho).data
        expected = trace_product(x @ x.conj().T, rho_log_rho) - trace_product(x.conj().T @ rho.data @ x, logm(sigma))
        self.assertAlmostEqual(quasi_entropy(rho, sigma, X, T_LOG_T), expected.real, places=12)

    def test_maximal_divergence(self):
        A = random_positive_definite(SamplerSpec(3, seed=5))
        self.assertAlmostEqual(maximal_f_divergence(A, A, T_LOG_T), 0.0, delta=1e-12)
        spec = SamplerSpec(2, seed=5)
        rho, sigma = random_positive_definite(spec.child(0)), random_positive_definite(spec.child(1))
        self.assertGreaterEqual(
            maximal_f_divergence(rho, sigma, T_LOG_T) + 1e-10, quasi_entropy(rho, sigma, np.eye(2), T_LOG_T)
        )

    def test_concave_function_reverses(self):
        spec = SamplerSpec(3, seed=11)
        rho, sigma = random_positive_definite(spec.child(0)), random_positive_definite(spec.child(1))
        self.assertLessEqual(
            maximal_f_divergence(rho, sigma, SQRT), quasi_entropy(rho, sigma, np.eye(3), SQRT) + 1e-10
        )


class TestIdentities(TestCase):

    def test_decomposition(self):
        spec = SamplerSpec(3, seed=6)
        rho, sigma = random_density(spec.child(0)), random_density(spec.child(1))
        for name, H in (
            ("identity", np.eye(3)),
            ("zero", np.zeros((3, 3))),
            ("random", random_contraction(spec.child(2))),
        ):
            with self.subTest(H=name):
                self.assertLessEqual(decomposition_identity_residual(rho, sigma, H), 1e-10)

    def test_unitary_covariance(self):
        inst = _instance(7, q=1.5)
        self.assertLessEqual(unitary_covariance_residual(inst, np.eye(3)), 1e-14)
        U = random_unitary(SamplerSpec(3, seed=7))
        for q in (None, 0.7, 1.5, 2.5):
            with self.subTest(q=q):
                self.assertLessEqual(unitary_covariance_residual(_instance(7, q=q), U), 1e-9)

    def test_unitary_covariance_commuting(self):
        phases = np.diag(np.exp(1j * np.array([0.3, 1.1, -2.0])))
        inst = EntropyInstance(np.diag([1.0, 2.0, 3.0]), np.diag([0.5, 4.0, 1.5]), np.diag([0.2, 0.9, 0.5]), 2.5)
        self.assertLessEqual(unitary_covariance_residual(inst, phases), 1e-12)
