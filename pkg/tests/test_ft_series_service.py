"""
Tests for Fourier-Taylor series: the difference operator, its inverse, the
second-order product and the numerical helpers.
"""
import random
import unittest
import sys
from fractions import Fraction
from pathlib import Path

import mpmath

# Add src to path for testing
project_root = Path(__file__).parent.parent
src_path = project_root / 'src'
sys.path.insert(0, str(src_path))

from app.exceptions import DomainError, InputError
from app.services.forms_service import delta_qexp, eisenstein_qexp
from app.services.ft_series_service import (
    FTSeries, GroupPoint, delta, dzero_at_cusp, evaluate, from_qexpansion, growth_exponent,
    interpolation_check, psi_equivariance_residual, random_series, second_order_product, solve_delta,
    to_function,
)
from config.mpmath_config import MpmathConfig
from config.settings import get_settings
from utils.exact_linalg import ExactScalar


class TestDifferenceOperator(unittest.TestCase):

    def test_order_zero_maps_to_zero(self):
        f = FTSeries.build(0, 1, 3, {(1, 0): 1, (2, 0): "1/2"})
        self.assertTrue(delta(f).is_zero())

    def test_delta_of_linear_term(self):
        # z e(nz) -> (z+1) e(nz) - z e(nz) = e(nz)
        f = FTSeries.build(1, 1, 2, {(1, 1): 1, (2, 1): 3, (2, 0): 5})
        d = delta(f)
        self.assertEqual(d.order, 0)
        self.assertEqual(d.coefficient(1, 0), ExactScalar(1))
        self.assertEqual(d.coefficient(2, 0), ExactScalar(3))

    def test_solve_delta_round_trip(self):
        rng = random.Random(7)
        for trial in range(100):
            order = rng.randint(0, 4)
            n_min = rng.randint(0, 1)
            h = random_series(rng, order, n_min, rng.randint(n_min, 50))
            with self.subTest(trial=trial, order=order, n_max=h.n_max):
                g = solve_delta(h)
                self.assertEqual(g.order, order + 1)
                self.assertEqual(delta(g).coeffs, h.coeffs)

    def test_solution_is_unique_up_to_periodic_part(self):
        rng = random.Random(11)
        for trial in range(100):
            order = rng.randint(1, 4)
            g = random_series(rng, order, 1, rng.randint(1, 50))
            periodic = FTSeries.build(0, g.n_min, g.n_max, {(n, 0): g.coefficient(n, 0)
                                                            for n in range(g.n_min, g.n_max + 1)})
            with self.subTest(trial=trial, order=order):
                self.assertEqual(solve_delta(delta(g), periodic).coeffs, g.coeffs)

    def test_solve_delta_keeps_periodic_part(self):
        h = FTSeries.build(0, 1, 2, {(1, 0): 2})
        v0 = FTSeries.build(0, 1, 2, {(2, 0): "1/3"})
        g = solve_delta(h, v0)
        self.assertEqual(g.coefficient(1, 1), ExactScalar(2))
        self.assertEqual(g.coefficient(2, 0), ExactScalar(Fraction(1, 3)))

    def test_periodic_part_must_have_order_zero(self):
        h = FTSeries.build(0, 1, 2, {(1, 0): 2})
        with self.assertRaises(InputError):
            solve_delta(h, FTSeries.build(1, 1, 2))


class TestSecondOrderProduct(unittest.TestCase):

    def test_exact_coefficients(self):
        f = FTSeries.build(0, 1, 3, {(1, 0): 1, (2, 0): 2, (3, 0): 3})
        product = second_order_product(f, f)
        self.assertEqual(product.n_max, 4)
        self.assertEqual(product.coefficient(1, 0), ExactScalar(0))
        self.assertEqual(product.coefficient(2, 0), ExactScalar(1))
        self.assertEqual(product.coefficient(3, 0), ExactScalar(3))
        self.assertEqual(product.coefficient(4, 0), ExactScalar(6))

    def test_rejects_higher_order_input(self):
        f = FTSeries.build(1, 1, 2)
        with self.assertRaises(InputError):
            second_order_product(f, f)


class TestNumerics(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        MpmathConfig.init_app(get_settings('testing'))

    def setUp(self):
        self.settings = get_settings('testing')
        self.delta_series = from_qexpansion(delta_qexp(20))

    def test_evaluate_needs_upper_half_plane(self):
        with self.assertRaises(DomainError):
            evaluate(self.delta_series, mpmath.mpc(0.1, -0.5), self.settings)

    def test_delta_at_i(self):
        # Delta(i) = Gamma(1/4)^24 / (2^24 pi^18)
        expected = mpmath.gamma(0.25) ** 24 / (2 ** 24 * mpmath.pi ** 18)
        result = evaluate(self.delta_series, 1j, self.settings)
        self.assertAlmostEqual(float(result.value.real), float(expected), delta=1e-12)
        self.assertLess(result.tail_bound, 1e-20)

    def test_growth_exponent_of_tau(self):
        _, alpha = growth_exponent(self.delta_series, 0, self.settings)
        self.assertGreater(alpha, 4.0)
        self.assertLess(alpha, 7.0)

    def test_psi_lift_is_equivariant(self):
        rng = random.Random(self.settings.SEED)
        f = to_function(self.delta_series)
        s = GroupPoint(0.0, -1.0, 1.0, 0.0)
        t = GroupPoint(1.0, 1.0, 0.0, 1.0)
        words = [s, t, t.inverse(), s @ t, t @ s, s @ t.inverse()]
        for trial in range(100):
            gamma = words[trial % len(words)]
            x = GroupPoint.random(rng, 0.5)
            with self.subTest(trial=trial):
                self.assertLess(psi_equivariance_residual(f, 12, gamma, x), 1e-10)

    def test_zeroth_coefficient(self):
        e4 = from_qexpansion(eisenstein_qexp(4, 20))
        for y in (1.0, 0.5):
            with self.subTest(y=y):
                cusp = dzero_at_cusp(to_function(self.delta_series), GroupPoint.identity(), 1.0, y, 12,
                                     settings=self.settings)
                self.assertLess(abs(complex(cusp.value)), 1e-20)
                constant = dzero_at_cusp(to_function(e4), GroupPoint.identity(), 1.0, y, 4,
                                         settings=self.settings)
                self.assertAlmostEqual(complex(constant.value).real, 1.0, places=12)
                self.assertEqual(constant.status, "ok")

    def test_interpolation_recovers_coefficients(self):
        f = random_series(random.Random(3), 1, 1, 3)
        outcome = interpolation_check(f, settings=self.settings)
        self.assertEqual(outcome['unknowns'], 6)
        self.assertLess(outcome['max_coefficient_error'], 1e-8)

    def test_group_point_needs_determinant_one(self):
        with self.assertRaises(InputError):
            GroupPoint(2.0, 0.0, 0.0, 1.0)


if __name__ == '__main__':
    unittest.main()
