"""
Tests for operator norms, Neumann series, Gelfand traces, resolvent probes
and integral operators.
"""

import time
import unittest

import numpy as np

from errors import (
    DimensionMismatchError,
    DivergenceError,
    GridError,
    InvalidInputError,
    NotInvertibleError,
    PerturbationTooLargeError,
    PreconditionError,
)
from operator_algebra import (
    EXACT,
    IN_RESOLVENT,
    IN_SPECTRUM,
    LOWER_BOUND,
    discretize_integral_kernel,
    finite_rank_truncate,
    fredholm_check,
    gelfand_trace,
    invert,
    neumann_inverse,
    operator_from_json,
    operator_norm,
    operator_to_json,
    perturbed_inverse,
    resolvent_probe,
    sample_kernel,
    trapezoid_weights,
)


class TestOperatorNorms(unittest.TestCase):
    """Tests for exact and estimated operator norms."""

    def setUp(self):
        """Set up test matrices."""
        self.nilpotent = np.array([[0.0, 2.0], [0.0, 0.0]])
        self.mixed = np.array([[1.0, -2.0], [3.0, 4.0]])

    def test_norm_examples(self):
        """Test the identity, a nilpotent matrix and the column and row sums."""
        for pair in ((1, 1), (2, 2), ("inf", "inf")):
            self.assertAlmostEqual(operator_norm(np.eye(3), *pair).value, 1.0, places=10)
        self.assertAlmostEqual(operator_norm(self.nilpotent, 2, 2).value, 2.0, places=10)
        self.assertEqual(operator_norm(self.mixed, 1, 1).value, 6.0)
        self.assertEqual(operator_norm(self.mixed, "inf", "inf").value, 7.0)

    def test_exact_pairs_are_tagged(self):
        """Test the quality tag of exact and estimated pairs."""
        self.assertEqual(operator_norm(self.mixed, 1, 3).quality, EXACT)
        self.assertEqual(operator_norm(self.mixed, 3, "inf").quality, EXACT)
        estimate = operator_norm(self.mixed, 3, 2)
        self.assertEqual(estimate.quality, LOWER_BOUND)
        self.assertFalse(estimate.is_exact)

    def test_lower_bound_is_attained_and_close(self):
        """Test that the ascent never exceeds the true norm and gets close to it."""
        estimate = operator_norm(self.mixed, 2, 1, seed=4)
        # the (2 -> 1) norm is the largest ||A^T s||_2 over sign vectors s
        signs = [np.array(s) for s in ((1, 1), (1, -1), (-1, 1), (-1, -1))]
        exact = max(np.linalg.norm(self.mixed.T @ s) for s in signs)
        self.assertLessEqual(estimate.value, exact * (1 + 1e-12))
        self.assertGreater(estimate.value, 0.98 * exact)

    def test_spectral_norm_matches_svd(self):
        """Test power iteration against the largest singular value."""
        rng = np.random.default_rng(11)
        for _ in range(5):
            a = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
            self.assertAlmostEqual(
                operator_norm(a, 2, 2).value, np.linalg.svd(a, compute_uv=False)[0], delta=1e-8
            )

    def test_submultiplicative(self):
        """Test ||BA|| <= ||A|| ||B|| over exact exponent triples."""
        rng = np.random.default_rng(5)
        triples = [(1, 1, 1), (1, 2, 2), (2, 2, 2), (1, 1, "inf"), ("inf", "inf", "inf"), (2, "inf", "inf")]
        for _ in range(10):
            a, b = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
            for p, q, r in triples:
                first, second = operator_norm(a, p, q), operator_norm(b, q, r)
                composed = operator_norm(b @ a, p, r)
                self.assertTrue(first.is_exact and second.is_exact and composed.is_exact)
                self.assertLessEqual(composed.value, first.value * second.value * (1 + 1e-10))

    def test_empty_matrix(self):
        """Test that zero-dimensional matrices are refused."""
        with self.assertRaises(InvalidInputError):
            operator_norm(np.zeros((0, 2)), 1, 1)

    def test_json_round_trip(self):
        """Test the complex matrix JSON form."""
        a = np.array([[1.0, 2j], [-1j, 0.5]])
        np.testing.assert_array_equal(operator_from_json(operator_to_json(a)), a)
        with self.assertRaises(DimensionMismatchError):
            operator_from_json({"rows": [[1, 2]], "imag_rows": [[1]]})


class TestSpectralTools(unittest.TestCase):
    """Tests for Gelfand traces, Neumann series and resolvent probes."""

    def test_gelfand_examples(self):
        """Test the Gelfand sequence of normal, nilpotent and Jordan matrices."""
        trace = gelfand_trace(np.diag([3.0, -4.0]), 64)
        for entry in trace.entries:
            self.assertAlmostEqual(entry.rho, 4.0, places=9)
        nilpotent = gelfand_trace([[0.0, 2.0], [0.0, 0.0]], 64)
        self.assertEqual([e.n for e in nilpotent.entries][:3], [1, 2, 4])
        self.assertAlmostEqual(nilpotent.entries[0].rho, 2.0)
        self.assertEqual(nilpotent.entries[1].rho, 0.0)
        self.assertEqual(nilpotent.running_inf, 0.0)

    def test_gelfand_jordan_block(self):
        """Test the slow convergence of a Jordan block against exact powers."""
        a = np.array([[0.5, 1.0], [0.0, 0.5]])
        start = time.perf_counter()
        trace = gelfand_trace(a, 64)
        self.assertLess(time.perf_counter() - start, 1.0)
        last = trace.entries[-1]
        self.assertEqual(last.n, 64)
        exact = np.linalg.norm(np.linalg.matrix_power(a, 64), 2) ** (1 / 64)
        self.assertAlmostEqual(last.rho, exact, places=9)
        self.assertTrue(0.5 <= last.rho <= 0.56)
        self.assertTrue(all(e.rho >= 0.5 for e in trace.entries))

    def test_gelfand_survives_overflow(self):
        """Test that huge powers are handled in log scale."""
        trace = gelfand_trace(np.diag([1e100, 2.0]), 1024)
        self.assertAlmostEqual(trace.entries[-1].rho / 1e100, 1.0, places=9)

    def test_neumann_examples(self):
        """Test the Neumann series of 0, 0.5 I and a nilpotent matrix."""
        zero = neumann_inverse(np.zeros((2, 2)))
        np.testing.assert_allclose(zero.inverse, np.eye(2))
        self.assertEqual(zero.terms, 1)

        half = neumann_inverse(0.5 * np.eye(2), tol=1e-12)
        np.testing.assert_allclose(half.inverse, 2.0 * np.eye(2), atol=1e-11)
        self.assertAlmostEqual(half.norm_bound, 2.0)
        self.assertTrue(half.norm_certified)

        shift = np.array([[0.0, 1.0], [0.0, 0.0]])
        result = neumann_inverse(shift)
        np.testing.assert_array_equal(result.inverse, np.eye(2) + shift)
        self.assertEqual(result.terms, 2)
        self.assertIsNone(result.norm_bound)

    def test_neumann_beyond_unit_norm(self):
        """Test that spectral radius below 1 is enough even when the norm is not."""
        a = np.array([[0.5, 1.0], [0.0, 0.5]])
        result = neumann_inverse(a, tol=1e-10)
        np.testing.assert_allclose((np.eye(2) - a) @ result.inverse, np.eye(2), atol=1e-10)

    def test_neumann_divergence(self):
        """Test that spectral radius at least 1 is refused."""
        with self.assertRaises(DivergenceError):
            neumann_inverse(np.eye(2))
        with self.assertRaises(DimensionMismatchError):
            neumann_inverse(np.zeros((2, 3)))

    def test_invert(self):
        """Test the Neumann-based inverse and its failure on singular matrices."""
        x = np.array([[2.0, 1.0], [0.0, 3.0]])
        np.testing.assert_allclose(invert(x) @ x, np.eye(2), atol=1e-10)
        with self.assertRaises(NotInvertibleError):
            invert(np.array([[1.0, 1.0], [1.0, 1.0]]))

    def test_perturbed_inverse_examples(self):
        """Test (x - a)^-1 and its bound."""
        result = perturbed_inverse(np.eye(2), 0.5 * np.eye(2))
        np.testing.assert_allclose(result.inverse, 2.0 * np.eye(2), atol=1e-10)
        self.assertAlmostEqual(result.bound, 2.0)

        x = np.diag([2.0, 3.0])
        unperturbed = perturbed_inverse(x, np.zeros((2, 2)))
        np.testing.assert_allclose(unperturbed.inverse, np.diag([0.5, 1 / 3]), atol=1e-10)

        scaled = perturbed_inverse(2.0 * np.eye(2), 0.5 * np.eye(2))
        np.testing.assert_allclose(scaled.inverse, np.eye(2) / 1.5, atol=1e-10)
        self.assertAlmostEqual(scaled.bound, 2.0 / 3.0)
        self.assertGreaterEqual(scaled.bound + 1e-12, np.linalg.norm(scaled.inverse, 2))

    def test_neumann_certification(self):
        """Test residual <= ||a||^(N+1) / (1 - ||a||) and the norm bound on random matrices with ||a|| in [0.1, 0.9]."""
        rng = np.random.default_rng(21)
        for _ in range(1000):
            d = int(rng.integers(2, 6))
            a = rng.normal(size=(d, d))
            if rng.random() < 0.5:
                a = a + 1j * rng.normal(size=(d, d))
            size = rng.uniform(0.1, 0.9)
            a = a * (size / np.linalg.norm(a, 2))
            result = neumann_inverse(a, tol=1e-12)
            self.assertLessEqual(result.residual, result.error_bound + result.rounding_floor)
            self.assertLessEqual(np.linalg.norm(result.inverse, 2), 1.0 / (1.0 - size) + 1e-10)
            self.assertTrue(result.norm_certified)

    def test_nilpotent_inverts_exactly(self):
        """Test that nilpotent matrices invert exactly in at most dim terms."""
        for a in (np.array([[0.0, 2.0], [0.0, 0.0]]), np.diag([1.0, 1.0], k=1), np.triu(np.ones((5, 5)), k=1)):
            result = neumann_inverse(a)
            self.assertLessEqual(result.terms, a.shape[0])
            self.assertEqual(result.residual, 0.0)
            np.testing.assert_array_equal((np.eye(a.shape[0]) - a) @ result.inverse, np.eye(a.shape[0]))

    def test_neumann_near_unit_spectral_radius(self):
        """Test that the term count grows logarithmically when the spectral radius is close to 1."""
        start = time.perf_counter()
        result = neumann_inverse(np.diag([0.0, 1.0 - 1e-6]), tol=1e-12)
        self.assertLess(time.perf_counter() - start, 1.0)
        np.testing.assert_allclose(np.diag(result.inverse), [1.0, 1e6], rtol=1e-8)
        self.assertLessEqual(result.residual, max(1e-12, result.rounding_floor))

    def test_ill_conditioned_inverse(self):
        """Test inverses with condition numbers 1e3 and 1e4."""
        unperturbed = perturbed_inverse(np.diag([1.0, 1e-3]), np.zeros((2, 2)))
        np.testing.assert_allclose(unperturbed.inverse, np.diag([1.0, 1e3]), rtol=1e-8)
        self.assertAlmostEqual(unperturbed.bound, 1e3, delta=1e-5)

        rng = np.random.default_rng(11)
        for kappa, atol in ((1e3, 1e-7), (1e4, 1e-5)):
            q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
            r, _ = np.linalg.qr(rng.normal(size=(4, 4)))
            x = q @ np.diag([1.0, 0.3, 0.05, 1.0 / kappa]) @ r
            start = time.perf_counter()
            inverse = invert(x)
            self.assertLess(time.perf_counter() - start, 1.0)
            np.testing.assert_allclose(inverse @ x, np.eye(4), atol=atol)

    def test_perturbation_too_large(self):
        """Test that ||x^-1|| ||a|| >= 1 is refused."""
        with self.assertRaises(PerturbationTooLargeError):
            perturbed_inverse(np.eye(2), np.eye(2))

    def test_resolvent_examples(self):
        """Test resolvent decisions and the power criterion."""
        diagonal = np.diag([1.0, 2.0])
        outside = resolvent_probe(diagonal, 3)
        self.assertEqual(outside.verdict, IN_RESOLVENT)
        self.assertEqual(outside.criterion_n, 1)
        self.assertAlmostEqual(outside.resolvent_norm, 1.0)

        self.assertEqual(resolvent_probe(diagonal, 2).verdict, IN_SPECTRUM)

        nilpotent = resolvent_probe([[0.0, 4.0], [0.0, 0.0]], 1)
        self.assertEqual(nilpotent.verdict, IN_RESOLVENT)
        self.assertEqual(nilpotent.criterion_n, 2)

    def test_resolvent_complex_lambda(self):
        """Test a complex probe point given as a pair."""
        rotation = np.array([[0.0, -1.0], [1.0, 0.0]])
        self.assertEqual(resolvent_probe(rotation, [0, 1]).verdict, IN_SPECTRUM)
        self.assertEqual(resolvent_probe(rotation, 1).verdict, IN_RESOLVENT)


class TestIntegralOperators(unittest.TestCase):
    """Tests for discretized integral kernels and Fredholm decisions."""

    def test_trapezoid_weights(self):
        """Test that the weights sum to 1 and need two points."""
        self.assertAlmostEqual(float(np.sum(trapezoid_weights(11))), 1.0)
        with self.assertRaises(GridError):
            trapezoid_weights(1)

    def test_kernel_examples(self):
        """Test the constant, product and zero kernels."""
        ones = discretize_integral_kernel(np.ones((9, 9)))
        np.testing.assert_allclose(ones.sum(axis=1), 1.0)
        self.assertAlmostEqual(operator_norm(ones, "inf", "inf").value, 1.0)

        product = discretize_integral_kernel(sample_kernel(lambda x, y: x * y, 101))
        self.assertEqual(np.linalg.matrix_rank(product), 1)
        self.assertAlmostEqual(operator_norm(product, "inf", "inf").value, 0.5, delta=2 * 0.01)

        zero = discretize_integral_kernel(np.zeros((5, 5)))
        self.assertEqual(operator_norm(zero, 1, 1).value, 0.0)

    def test_kernel_grid_checks(self):
        """Test that steps and grids must be the uniform grid of [0, 1]."""
        values = np.ones((5, 5))
        discretize_integral_kernel(values, h=0.25, grid=np.linspace(0, 1, 5))
        with self.assertRaises(InvalidInputError):
            discretize_integral_kernel(values, h=0.2)
        with self.assertRaises(InvalidInputError):
            discretize_integral_kernel(values, grid=[0, 0.1, 0.5, 0.75, 1])

    def test_finite_rank_examples(self):
        """Test block averaging of constant and Lipschitz kernels."""
        self.assertAlmostEqual(finite_rank_truncate(np.ones((16, 16)), 3).error, 0.0)
        values = sample_kernel(lambda x, y: x + y, 64)
        self.assertAlmostEqual(finite_rank_truncate(values, 64).error, 0.0)
        errors = [finite_rank_truncate(values, r).error for r in (2, 4, 8)]
        for coarse, fine in zip(errors, errors[1:]):
            ratio = coarse / fine
            self.assertTrue(2 / 1.5 <= ratio <= 2 * 1.5, f"error ratio {ratio}")
        with self.assertRaises(InvalidInputError):
            finite_rank_truncate(values, 65)

    def test_fredholm_examples(self):
        """Test invertibility of identity plus finite rank perturbations."""
        e1 = np.zeros((3, 3))
        e1[0, 0] = 1.0
        collapsed = fredholm_check(np.eye(3), -np.eye(3))
        self.assertFalse(collapsed.invertible)
        self.assertAlmostEqual(np.linalg.norm(collapsed.witness), 1.0)

        self.assertTrue(fredholm_check(np.eye(3), e1).invertible)

        killed = fredholm_check(np.eye(3), -e1)
        self.assertFalse(killed.invertible)
        np.testing.assert_allclose(np.abs(killed.witness), [1.0, 0.0, 0.0])
        self.assertEqual(killed.rank, 2)

    def test_fredholm_matches_direct_computation(self):
        """Test Fredholm verdicts against the determinant on random rank-one kernels."""
        rng = np.random.default_rng(8)
        n = 6
        weights = trapezoid_weights(n)
        for case in range(20):
            u, v = rng.normal(size=n), rng.normal(size=n)
            if case % 2:
                # scale so that 1 + <v w, u> = 0 and I + A is singular
                v = -v / float(np.sum(v * weights * u))
            a = np.outer(u, v) * weights[None, :]
            decision = fredholm_check(np.eye(n), a)
            singular = abs(np.linalg.det(np.eye(n) + a)) < 1e-9
            self.assertEqual(decision.invertible, not singular)
            if not decision.invertible:
                self.assertLess(np.linalg.norm((np.eye(n) + a) @ decision.witness), 1e-8)

    def test_fredholm_precondition(self):
        """Test that T must be invertible."""
        with self.assertRaises(PreconditionError):
            fredholm_check(np.zeros((2, 2)), np.eye(2))


def run_unit_tests():
    """Run unit tests."""
    loader = unittest.TestLoader()
    suite = unittest.TestSuite(
        loader.loadTestsFromTestCase(case) for case in (TestOperatorNorms, TestSpectralTools, TestIntegralOperators)
    )
    unittest.TextTestRunner(verbosity=2).run(suite)


if __name__ == '__main__':
    import argparse

    parser = argparse.ArgumentParser(description='Run operator algebra tests')
    parser.add_argument('--unit', action='store_true', help='Run unit tests')
    args = parser.parse_args()

    if args.unit:
        run_unit_tests()
    else:
        print("Please specify --unit to run tests")
