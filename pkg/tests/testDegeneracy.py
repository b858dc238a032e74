#!python

import itertools
import math
import unittest
from collections import Counter
from fractions import Fraction

import numpy as np

from pairtheta.degeneracy import (count_equal_pairs, count_equal_pairs_in, degeneracy_curve,
                                  degeneracy_samples, equal_value_buckets, growth_fit, key_bound,
                                  log_growth_fit)
from pairtheta.diophantine import critical_spec
from pairtheta.errors import DomainError, InsufficientDataError
from pairtheta.paircorr import r2_windowed
from pairtheta.spectrum import enumerate_spectrum
from pairtheta.torus import TorusSpec, Window


def representations(k, n_max):
    """r_k(n) for n <= n_max by brute force."""
    reach = int(math.isqrt(n_max)) + 1
    counts = Counter()
    for m in itertools.product(range(-reach, reach + 1), repeat=k):
        n = sum(x * x for x in m)
        if n <= n_max:
            counts[n] += 1
    return counts


class TestEqualPairs(unittest.TestCase):

    def test_small_shells(self):
        self.assertEqual(count_equal_pairs(TorusSpec(3, (0, 0, 0)), 3 ** 1.5), 218)
        self.assertEqual(count_equal_pairs(TorusSpec(2, (0, 0)), 5.0), 92)
        half = Fraction(1, 2)
        self.assertEqual(count_equal_pairs(TorusSpec(2, (half, half)), 0.5), 12)

    def test_key_snapping(self):
        self.assertEqual(key_bound(27.0 ** (2.0 / 3.0), 1), 9)
        self.assertEqual(key_bound(2.5, 2), 10)
        self.assertEqual(key_bound(2.4, 1), 2)

    def test_bucket_sizes_are_representation_numbers(self):
        for k, n_max in ((2, 100), (3, 50)):
            buckets = equal_value_buckets(TorusSpec(k, (0,) * k), float(n_max))
            expected = representations(k, n_max)
            self.assertEqual(dict(zip(buckets.keys.tolist(), buckets.sizes.tolist())),
                             dict(expected))

    def test_counts_even_and_monotone(self):
        for spec in (TorusSpec(3, (0, 0, 0)), TorusSpec.rational(["1/3", "1/2"]), critical_spec(3)):
            samples = degeneracy_samples(spec, [2.0, 5.0, 20.0, 80.0, 300.0])
            counts = [s[1] for s in samples]
            self.assertTrue(all(c % 2 == 0 for c in counts))
            self.assertTrue(all(b >= a for a, b in zip(counts[:-1], counts[1:])))
            for X, count, normalized in samples:
                self.assertEqual(count, count_equal_pairs(spec, X))
                self.assertAlmostEqual(normalized, count / X, places=14)

    def test_windowed_consistency(self):
        spec = TorusSpec(2, (0, 0))
        X = 40.5
        slice = enumerate_spectrum(spec, 2.0 * X)
        estimate = r2_windowed(slice, X, Window(0.0, 0.0))
        self.assertEqual(estimate.pair_count, count_equal_pairs_in(spec, X, 2.0 * X))
        self.assertEqual(count_equal_pairs_in(spec, 0.0, 5.0), 92)

    def test_critical_buckets(self):
        spec = critical_spec(3)
        counts = [count_equal_pairs(spec, X) for X in (10.0, 100.0, 1000.0)]
        self.assertGreater(counts[-1], 0)
        # at most every ordered pair of the slice
        slice = enumerate_spectrum(spec, 1000.0 ** (2.0 / 3.0) * (1 + 1e-9))
        self.assertLessEqual(counts[-1], len(slice) * (len(slice) - 1))

    def test_errors(self):
        with self.assertRaises(DomainError):
            equal_value_buckets(TorusSpec(2, (0.3, 0.4)), 10.0)
        with self.assertRaises(DomainError):
            degeneracy_samples(TorusSpec(2, (0, 0)), [10.0, 5.0])
        with self.assertRaises(DomainError):
            count_equal_pairs_in(TorusSpec(2, (0, 0)), 5.0, 2.0)
        with self.assertRaises(DomainError):
            count_equal_pairs(TorusSpec(2, (0, 0)), 0.0)


class TestGrowth(unittest.TestCase):

    def test_three_dimensions(self):
        curve = degeneracy_curve(TorusSpec(3, (0, 0, 0)), np.geomspace(1e2, 1e5, 8))
        self.assertGreaterEqual(curve.fitted_exponent, 0.20)
        self.assertLessEqual(curve.fitted_exponent, 0.45)
        slope, r_squared = growth_fit(curve)
        self.assertEqual(slope, curve.fitted_exponent)
        self.assertGreater(r_squared, 0.9)

    def test_four_dimensions(self):
        curve = degeneracy_curve(TorusSpec(4, (0, 0, 0, 0)), np.geomspace(1e2, 1e5, 8))
        self.assertGreaterEqual(curve.fitted_exponent, 0.35)
        self.assertLessEqual(curve.fitted_exponent, 0.62)

    def test_two_dimensions_grow_slowly(self):
        curve = degeneracy_curve(TorusSpec(2, (0, 0)), np.geomspace(1e2, 1e6, 9))
        self.assertLess(curve.fitted_exponent, 0.25)
        self.assertGreater(curve.normalized[-1], curve.normalized[0])
        log_curve = degeneracy_curve(TorusSpec(2, (0, 0)), np.geomspace(1e2, 1e6, 9), model="log")
        self.assertGreater(log_curve.fitted_exponent, 0.5)
        self.assertLess(log_curve.fitted_exponent, 1.5)
        self.assertEqual(log_curve.diagnostics["power_slope"], curve.fitted_exponent)

    def test_critical_grows_logarithmically(self):
        curve = degeneracy_curve(critical_spec(3), np.geomspace(1e2, 1e5, 8), model="log")
        self.assertGreater(curve.normalized[-1], curve.normalized[0])
        self.assertGreater(curve.fitted_exponent, 0.3)
        self.assertLess(curve.fitted_exponent, 4.0)
        self.assertGreater(curve.diagnostics["power_slope"], 0.0)
        slope, _ = log_growth_fit(curve)
        self.assertEqual(slope, curve.fitted_exponent)

    def test_undersampled(self):
        with self.assertRaises(InsufficientDataError):
            degeneracy_curve(TorusSpec(3, (0, 0, 0)), [1e2, 1e3, 1e4, 1e5])
        with self.assertRaises(InsufficientDataError):
            degeneracy_curve(TorusSpec(3, (0, 0, 0)), np.geomspace(1e2, 5e3, 6))
        with self.assertRaises(DomainError):
            degeneracy_curve(TorusSpec(3, (0, 0, 0)), np.geomspace(1e2, 1e5, 8), model="cubic")


if __name__ == '__main__':
    unittest.main()
