#!python

import cmath
import math
import unittest

import numpy as np

from pairtheta.IwasawaCoordinates import GroupPoint, generators
from pairtheta.errors import DomainError
from pairtheta.paircorr import r2_smoothed_direct
from pairtheta.spectrum import enumerate_spectrum
from pairtheta.theta import (cusp_asymptotic, e, l2_norm_squared, maslov_index, mean_square_haar,
                             r2_theta_integral, spectral_theta, theta_sum, theta_sum_report,
                             torus_average_theta_pair, truncation_radius, u_phi_closed_form,
                             u_phi_transform)
from pairtheta.torus import TestPsi, TorusSpec, WeightH

ALGEBRAIC_2 = (0.2599210498948732, 0.5874010519681994)
ALGEBRAIC_3 = (0.18920711500272103, 0.41421356237309515, 0.6817928305074290)


class TestMetaplectic(unittest.TestCase):

    def setUp(self):
        self.gaussian = TestPsi.gaussian(1.0)
        self.mixed = TestPsi(((1.0, 2.0, 0), (0.5, 1.0, 1), (-0.25, 3.0, 2)))

    def test_identity_at_zero(self):
        w = np.linspace(0.0, 3.0, 7)
        self.assertTrue(np.array_equal(u_phi_closed_form(self.mixed, 0.0, w, 3),
                                       self.mixed(w * w).astype(complex)))

    def test_quarter_turn_is_fourier(self):
        for k in (2, 3):
            for s in (1.0, 2.5):
                psi = TestPsi.gaussian(s)
                w = np.linspace(0.0, 2.0, 9)
                expected = cmath.exp(-2j * math.pi * k / 8.0) * s ** (-0.5 * k) * np.exp(-math.pi * w * w / s)
                self.assertTrue(np.allclose(u_phi_closed_form(psi, 0.5 * math.pi, w, k), expected,
                                            rtol=1e-13, atol=1e-15))

    def test_gaussian_is_fixed(self):
        # exp(-pi |w|^2) is an eigenfunction of every U^phi
        for phi in (0.3, 1.0, 2.0):
            w = np.linspace(0.0, 2.0, 5)
            values = u_phi_closed_form(self.gaussian, phi, w, 2)
            self.assertTrue(np.allclose(np.abs(values), np.exp(-math.pi * w * w), rtol=1e-12))

    def test_closed_form_against_bessel(self):
        for k in (2, 3):
            for psi in (self.gaussian, self.mixed):
                for w in (0.0, 0.5, 1.3):
                    closed = complex(u_phi_closed_form(psi, 1.0, w, k))
                    numeric = u_phi_transform(psi, 1.0, w, k)
                    self.assertAlmostEqual(abs(closed - numeric), 0.0, delta=1e-8,
                                           msg=f"k={k} w={w}")

    def test_unitarity(self):
        for k in (2, 3):
            for psi in (self.gaussian, self.mixed):
                before = l2_norm_squared(lambda r: psi(r * r), k, 10.0)
                after = l2_norm_squared(lambda r: u_phi_closed_form(psi, 1.0, r, k), k, 10.0)
                self.assertAlmostEqual(after / before, 1.0, delta=1e-8)
        self.assertAlmostEqual(l2_norm_squared(lambda r: self.gaussian(r * r), 2, 10.0), 0.5,
                               places=10)

    def test_singular_angles(self):
        with self.assertRaises(DomainError):
            u_phi_closed_form(self.gaussian, math.pi, 1.0, 2)
        with self.assertRaises(DomainError):
            u_phi_transform(self.gaussian, 2.0 * math.pi - 1e-9, 1.0, 2)

    def test_maslov_index(self):
        self.assertEqual(maslov_index(0.5), 1)
        self.assertEqual(maslov_index(4.0), 3)

    def test_two_quarter_turns(self):
        # U^(pi/2) twice is e(-k/4) on even functions; the Fourier image of
        # exp(-pi s r) is s^(-k/2) exp(-pi r / s)
        psi = TestPsi(((1.0, 2.0, 0), (0.5, 0.7, 0)))
        w = np.linspace(0.0, 2.5, 11)
        for k in (2, 3, 4):
            image = TestPsi(tuple((c * s ** (-0.5 * k), 1.0 / s, 0) for c, s, _ in psi.terms))
            once = u_phi_closed_form(psi, 0.5 * math.pi, w, k)
            self.assertTrue(np.allclose(once, e(-k / 8.0) * image(w * w), rtol=1e-13, atol=1e-15))
            twice = e(-k / 8.0) * u_phi_closed_form(image, 0.5 * math.pi, w, k)
            self.assertTrue(np.allclose(twice, e(-k / 4.0) * psi(w * w), rtol=1e-12, atol=1e-15),
                            msg=f"k={k}")

    def test_truncation_radius(self):
        for phi in (0.0, 0.4, 1.2):
            W = truncation_radius(self.mixed, phi, 3, 1e-12)
            r = np.linspace(W, 3.0 * W, 200)
            self.assertTrue(np.all(np.abs(u_phi_closed_form(self.mixed, phi, r, 3)) <= 1e-12))


class TestThetaSums(unittest.TestCase):

    def setUp(self):
        self.psi = TestPsi.gaussian(1.0)
        self.g = GroupPoint.at(0.3 + 0.8j, 0.7, x=[0.13, -0.41], y=[0.27, 0.05])

    def test_lattice_invariance(self):
        value = abs(theta_sum(self.psi, self.g))
        for m in ((1, 0, 0, 0), (0, -2, 0, 0), (0, 0, 1, 0), (3, 1, -1, 2)):
            moved = generators.apply(("L", m), self.g)
            self.assertAlmostEqual(abs(theta_sum(self.psi, moved)), value, delta=1e-10)

    def test_translation_invariance(self):
        value = abs(theta_sum(self.psi, self.g))
        for n in (1, -1, 2):
            moved = generators.apply(("T", n), self.g)
            self.assertAlmostEqual(abs(theta_sum(self.psi, moved)), value, delta=1e-10)

    def test_s_invariance(self):
        value = abs(theta_sum(self.psi, self.g))
        for power in (1, 2, 3):
            moved = generators.apply(("S", power), self.g)
            self.assertAlmostEqual(abs(theta_sum(self.psi, moved)), value, delta=1e-10,
                                   msg=f"S^{power}")
        # a point on the quarter turn itself
        g = GroupPoint.at(0.21 + 1.3j, 0.5 * math.pi, x=[0.31, 0.07], y=[-0.12, 0.44])
        moved = generators.apply(("S", 1), g)
        self.assertAlmostEqual(abs(theta_sum(self.psi, moved)), abs(theta_sum(self.psi, g)),
                               delta=1e-10)

    def test_square_lattice_at_i(self):
        # (sum_m exp(-pi m^2))^2 = pi^(1/2) / Gamma(3/4)^2
        value = theta_sum(self.psi, GroupPoint.at(1j, 0.0, k=2))
        expected = math.sqrt(math.pi) / math.gamma(0.75) ** 2
        self.assertAlmostEqual(expected, 1.18034, places=5)
        self.assertAlmostEqual(value.real, expected, delta=1e-12)
        self.assertAlmostEqual(value.imag, 0.0, delta=1e-12)
        m = np.arange(-12, 13)
        self.assertAlmostEqual(value.real, float(np.sum(np.exp(-math.pi * m * m))) ** 2,
                               delta=1e-12)

    def test_report(self):
        report = theta_sum_report(self.psi, self.g)
        self.assertGreater(report.terms, 0)
        self.assertGreater(report.radius, 0.0)
        self.assertEqual(report.value, theta_sum(self.psi, self.g))
        with self.assertRaises(DomainError):
            theta_sum_report(self.psi, self.g, k=3)

    def test_cusp_asymptotic(self):
        psi1, psi2 = TestPsi.gaussian(2.0), TestPsi.gaussian(2.5)
        g = GroupPoint.at(0.37 + 16.0j, 0.3, x=[0.1, -0.2], y=[0.1, 0.2])
        pair = theta_sum(psi1, g) * np.conj(theta_sum(psi2, g))
        self.assertLess(abs(pair - cusp_asymptotic(psi1, psi2, g)), 1e-6)
        self.assertLess(abs(pair - cusp_asymptotic(psi1, psi2, g, nearest=True)), 1e-6)

    def test_cusp_decay(self):
        psi1, psi2 = TestPsi.gaussian(2.0), TestPsi.gaussian(2.5)
        residuals = []
        for v in (4.0, 8.0, 16.0):
            g = GroupPoint.at(complex(0.37, v), 0.3, x=[0.1, -0.2], y=[0.1, 0.2])
            pair = theta_sum(psi1, g) * np.conj(theta_sum(psi2, g))
            residuals.append(abs(pair - cusp_asymptotic(psi1, psi2, g, nearest=True)))
        self.assertLess(residuals[0], 2e-2)
        self.assertLess(residuals[1], 2e-5)
        self.assertLess(residuals[2], 1e-9)
        self.assertTrue(residuals[0] > residuals[1] > residuals[2])

    def test_spectral_form(self):
        lam, u = 10.0, 0.37
        spec = TorusSpec(2, ALGEBRAIC_2)
        slice = enumerate_spectrum(spec, 120.0)
        g = GroupPoint.at(complex(u, 1.0 / lam), 0.0, x=[0.0, 0.0], y=list(spec.alpha))
        expected = lam ** -0.5 * spectral_theta(slice, self.psi, lam, u)
        self.assertAlmostEqual(abs(theta_sum(self.psi, g) - expected), 0.0, delta=1e-10)

    def test_torus_average(self):
        psi1, psi2 = TestPsi.gaussian(1.0), TestPsi.gaussian(2.0)
        average = torus_average_theta_pair(psi1, psi2, 0.3 + 0.9j, 0.4, 2)
        expected = mean_square_haar(psi1, psi2, 2)
        self.assertAlmostEqual(expected, 1.0 / 3.0, places=14)
        self.assertAlmostEqual(average.real, expected, delta=1e-8)
        self.assertAlmostEqual(average.imag, 0.0, delta=1e-8)


class TestThetaIntegral(unittest.TestCase):

    def setUp(self):
        self.psi1 = TestPsi.gaussian(1.0)
        self.psi2 = TestPsi.gaussian(1.5)

    def check(self, spec, lam, h):
        slice = enumerate_spectrum(spec, 12.0 * lam)
        direct = r2_smoothed_direct(slice, self.psi1, self.psi2, h, lam)
        theta = r2_theta_integral(self.psi1, self.psi2, h, lam, spec, slice=slice)
        self.assertAlmostEqual(theta.value, direct.value, delta=1e-6)
        self.assertLess(theta.error_estimate, 1e-8)
        self.assertGreater(theta.panels, 0)
        return theta

    def test_agrees_with_direct_sum_k2(self):
        self.check(TorusSpec(2, ALGEBRAIC_2), 20.0, WeightH(1.0, "triangle"))
        self.check(TorusSpec(2, ALGEBRAIC_2), 20.0, WeightH(0.5, "raised-cosine", 2.0))

    def test_agrees_with_direct_sum_k3(self):
        self.check(TorusSpec(3, ALGEBRAIC_3), 8.0, WeightH(1.0, "triangle"))

    def test_panel_halving(self):
        spec = TorusSpec(2, ALGEBRAIC_2)
        slice = enumerate_spectrum(spec, 240.0)
        h = WeightH(1.0, "triangle")
        coarse = r2_theta_integral(self.psi1, self.psi2, h, 20.0, spec, slice=slice,
                                   max_width=2e-3)
        fine = r2_theta_integral(self.psi1, self.psi2, h, 20.0, spec, slice=slice,
                                 max_width=1e-3)
        self.assertLess(abs(coarse.value - fine.value), 1e-8)
        self.assertGreater(fine.panels, coarse.panels)

    def test_builds_its_own_slice(self):
        spec = TorusSpec(2, (0.1, 0.35))
        h = WeightH(1.0)
        own = r2_theta_integral(self.psi1, self.psi2, h, 6.0, spec)
        given = r2_theta_integral(self.psi1, self.psi2, h, 6.0, spec,
                                  slice=enumerate_spectrum(spec, 100.0))
        self.assertAlmostEqual(own.value, given.value, places=12)
        with self.assertRaises(DomainError):
            r2_theta_integral(self.psi1, self.psi2, h, 0.0, spec)


if __name__ == '__main__':
    unittest.main()
