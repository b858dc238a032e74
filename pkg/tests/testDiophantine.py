#!python

import math
import unittest
from fractions import Fraction

import mpmath
import numpy as np

from pairtheta.diophantine import (algebraic_vector, approximation_errors, approximation_trace,
                                   best_approximations, critical_spec, critical_vector,
                                   dirichlet_holds, estimate_type, is_perfect_power, scan)
from pairtheta.errors import DomainError


class TestScan(unittest.TestCase):

    def test_rational_coordinates_are_exact(self):
        errors = approximation_errors((Fraction(1, 2), Fraction(1, 3)), 1, 13)
        expected = [max(abs(q / 2 - round(q / 2)), abs(q / 3 - round(q / 3))) for q in range(1, 13)]
        self.assertTrue(np.allclose(errors, expected, rtol=0, atol=1e-15))
        self.assertEqual(errors[5], 0.0)
        self.assertEqual(errors[11], 0.0)

    def test_fixed_point_distances(self):
        alpha = (0.1234567, 0.7654321)
        errors = scan(alpha, 5000)
        q = np.arange(1, 5001)
        direct = np.max([np.abs(q * a - np.round(q * a)) for a in alpha], axis=0)
        self.assertTrue(np.allclose(errors, direct, rtol=0, atol=1e-12))

    def test_best_approximations(self):
        errors = np.array([0.4, 0.3, 0.35, 0.1, 0.1, 0.05])
        q, e = best_approximations(errors)
        self.assertEqual(q.tolist(), [1, 2, 4, 6])
        self.assertEqual(e.tolist(), [0.4, 0.3, 0.1, 0.05])


class TestEstimateType(unittest.TestCase):

    def test_rational_vector(self):
        report = estimate_type((Fraction(1, 2), Fraction(1, 3)), 10)
        self.assertTrue(report.rational_flag)
        self.assertEqual(report.worst_q, 6)
        self.assertEqual(report.worst_error, 0.0)
        self.assertEqual(report.kappa_hat, math.inf)

    def test_algebraic_vector(self):
        report = estimate_type(algebraic_vector(2, precise=True), 100_000)
        self.assertFalse(report.rational_flag)
        self.assertGreaterEqual(report.kappa_hat, 1.5)
        self.assertLessEqual(report.kappa_hat, 1.65)
        self.assertTrue(report.dirichlet_ok)
        self.assertGreater(report.C_hat, 0.0)
        self.assertGreater(report.kappa_sup, 1.0)

    def test_transcendental_pair(self):
        report = estimate_type((math.pi - 3.0, math.e - 2.0), 10_000)
        self.assertGreaterEqual(report.kappa_hat, 1.5)
        self.assertLessEqual(report.kappa_hat, 2.0)

    def test_critical_vectors(self):
        report = estimate_type(critical_vector(3, precise=True), 100_000)
        self.assertAlmostEqual(report.kappa_hat, 2.0, delta=0.2)
        report = estimate_type(critical_vector(4, (Fraction(1, 4), Fraction(3, 4)), precise=True),
                               100_000)
        self.assertAlmostEqual(report.kappa_hat, 1.5, delta=0.2)

    def test_dirichlet_bound(self):
        rng = np.random.default_rng(17)
        for k in (2, 3):
            for _ in range(5):
                errors = scan(tuple(rng.random(k)), 20_000)
                self.assertTrue(dirichlet_holds(errors, k))
        self.assertFalse(dirichlet_holds(np.full(64, 0.49), 2))

    def test_permutation_and_shift_invariance(self):
        alpha = algebraic_vector(3, 3, precise=True)
        base = estimate_type(alpha, 20_000)
        permuted = estimate_type((alpha[2], alpha[0], alpha[1]), 20_000)
        self.assertEqual(base.kappa_hat, permuted.kappa_hat)
        self.assertEqual(base.worst_q, permuted.worst_q)
        with mpmath.workdps(80):
            shifted = tuple(a + n for a, n in zip(alpha, (1, -3, 7)))
        self.assertEqual(estimate_type(shifted, 20_000).kappa_hat, base.kappa_hat)

    def test_raw_type_grows_with_scan(self):
        alpha = (math.pi - 3.0, math.e - 2.0)
        previous = 0.0
        for q_max in (100, 1000, 10_000):
            report = estimate_type(alpha, q_max)
            self.assertGreaterEqual(report.kappa_sup, previous)
            previous = report.kappa_sup

    def test_trace(self):
        report = estimate_type(algebraic_vector(2), 5000)
        trace = approximation_trace(report)
        q = [row[0] for row in trace]
        e = [row[1] for row in trace]
        self.assertEqual(q[0], 1)
        self.assertTrue(all(b > a for a, b in zip(q[:-1], q[1:])))
        self.assertTrue(all(b < a for a, b in zip(e[:-1], e[1:])))

    def test_scan_limits(self):
        with self.assertRaises(DomainError):
            estimate_type((0.3, 0.4), 1)
        with self.assertRaises(DomainError):
            estimate_type((0.3, 0.4), 2000, scan_limit=1000)


class TestConstructors(unittest.TestCase):

    def test_algebraic_vector(self):
        alpha = algebraic_vector(2)
        self.assertAlmostEqual(alpha[0], 0.259921, places=6)
        self.assertAlmostEqual(alpha[1], 0.587401, places=6)
        precise = algebraic_vector(3, precise=True)
        with mpmath.workdps(80):
            theta = mpmath.root(2, 4)
            self.assertLess(abs(precise[1] - mpmath.frac(theta ** 2)), mpmath.mpf(10) ** -70)

    def test_perfect_powers(self):
        for n in (4, 8, 9, 27, 32, 1024):
            self.assertTrue(is_perfect_power(n))
        for n in (2, 3, 6, 12, 1000001):
            self.assertFalse(is_perfect_power(n))
        with self.assertRaises(DomainError):
            algebraic_vector(2, 4)
        with self.assertRaises(DomainError):
            algebraic_vector(2, 1)
        with self.assertRaises(DomainError):
            algebraic_vector(0)

    def test_critical(self):
        vector = critical_vector(4)
        self.assertEqual(vector[2:], (Fraction(0), Fraction(1, 2)))
        self.assertAlmostEqual(vector[0], 2.0 ** (1.0 / 3.0) - 1.0, places=14)
        with self.assertRaises(DomainError):
            critical_vector(2)
        spec = critical_spec(3, (Fraction(1, 3), Fraction(5, 3)))
        self.assertEqual(spec.exact_indices, (1, 2))
        self.assertEqual(spec.denominator, 3)
        self.assertAlmostEqual(spec.alpha[0], math.sqrt(2.0) - 1.0, places=14)
        self.assertFalse(spec.is_rational)


if __name__ == '__main__':
    unittest.main()
