#!python
"""
Seeded randomized comparisons against naive enumerations.

Spectra, windowed pair counts and equal-value pair counts are each checked
on random instances against box enumerations and O(N^2) double loops.
"""

import itertools
import math
import unittest
from fractions import Fraction

import numpy as np

from pairtheta.degeneracy import count_equal_pairs, equal_value_buckets
from pairtheta.paircorr import pair_count
from pairtheta.spectrum import enumerate_spectrum, key_bound
from pairtheta.torus import TorusSpec

SEED = 20240611


def random_rational(rng, k):
    q = int(rng.integers(1, 10))
    numerators = tuple(int(p) for p in rng.integers(0, q, size=k))
    return TorusSpec.rational(Fraction(p, q) for p in numerators), q, numerators


def box_keys(q, numerators, K):
    """Integer keys sum (q m_j - p_j)^2 <= K over a box holding the ball."""
    reach = math.isqrt(K) // q + 2
    keys = []
    for m in itertools.product(range(-reach, reach + 1), repeat=len(numerators)):
        key = sum((q * mj - p) ** 2 for mj, p in zip(m, numerators))
        if key <= K:
            keys.append(key)
    return np.sort(np.array(keys, dtype=np.int64))


def double_loop_pairs(values, a, b):
    count = 0
    for i, x in enumerate(values):
        for j, y in enumerate(values):
            if i != j and a <= x - y <= b:
                count += 1
    return count


class TestRandomSpectra(unittest.TestCase):

    def test_rational_cutoff_on_an_eigenvalue(self):
        rng = np.random.default_rng(SEED)
        for case in range(30):
            k = int(rng.integers(2, 4))
            spec, q, numerators = random_rational(rng, k)
            # the cutoff is the value of a random lattice point
            m = rng.integers(-3, 4, size=k)
            K = int(sum((q * int(mj) - p) ** 2 for mj, p in zip(m, numerators)))
            if K == 0:
                K = q * q
            slice = enumerate_spectrum(spec, float(Fraction(K, q * q)))
            expected = box_keys(q, numerators, K)
            self.assertEqual(slice.exact_keys.tolist(), expected.tolist(), msg=f"case {case}")
            self.assertTrue(np.array_equal(slice.lambdas, expected / float(q * q)))

    def test_irrational_counts(self):
        rng = np.random.default_rng(SEED + 1)
        for case in range(20):
            k = int(rng.integers(2, 4))
            alpha = tuple(rng.random(k))
            cutoff = float(rng.uniform(2.0, 15.0))
            slice = enumerate_spectrum(TorusSpec(k, alpha), cutoff)
            reach = int(math.ceil(math.sqrt(cutoff))) + 2
            points = np.array(list(itertools.product(range(-reach, reach + 1), repeat=k)))
            values = np.sum((points - np.array(alpha)) ** 2, axis=1)
            expected = np.sort(values[values <= cutoff])
            self.assertEqual(len(slice), expected.size, msg=f"case {case}")
            self.assertTrue(np.allclose(slice.lambdas, expected, rtol=1e-13, atol=0))


class TestRandomPairCounts(unittest.TestCase):

    def test_rescaled_spectra(self):
        rng = np.random.default_rng(SEED + 2)
        for case in range(40):
            k = int(rng.integers(2, 4))
            if case % 2:
                spec = random_rational(rng, k)[0]
            else:
                spec = TorusSpec(k, tuple(rng.random(k)))
            slice = enumerate_spectrum(spec, float(rng.uniform(4.0, 9.0)))
            values = slice.rescaled
            if case % 3 == 0:
                # a window edge on an actual difference
                i, j = rng.integers(0, values.size, size=2)
                a = float(values[i] - values[j])
            else:
                a = float(rng.uniform(-2.0, 1.0))
            b = a + float(rng.choice([0.0, rng.exponential(1.0)]))
            self.assertEqual(pair_count(values, a, b), double_loop_pairs(values, a, b),
                             msg=f"case {case}")
            self.assertEqual(pair_count(values, a, b, workers=3), double_loop_pairs(values, a, b))


class TestRandomEqualPairs(unittest.TestCase):

    def test_rational_buckets(self):
        rng = np.random.default_rng(SEED + 3)
        for case in range(30):
            k = int(rng.integers(2, 4))
            spec, q, numerators = random_rational(rng, k)
            X = float(rng.uniform(5.0, 40.0))
            K = key_bound(X ** (2.0 / k), q)
            keys = box_keys(q, numerators, K)
            same = keys[:, None] == keys[None, :]
            expected = int(same.sum()) - keys.size
            self.assertEqual(count_equal_pairs(spec, X), expected, msg=f"case {case}")
            buckets = equal_value_buckets(spec, X ** (2.0 / k))
            self.assertEqual(int(buckets.sizes.sum()), keys.size)


if __name__ == '__main__':
    unittest.main()
