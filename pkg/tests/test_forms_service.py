"""
Tests for the generated q-expansions and the inner products on forms.
"""
import unittest
import sys
from fractions import Fraction
from pathlib import Path

import mpmath

# Add src to path for testing
project_root = Path(__file__).parent.parent
src_path = project_root / 'src'
sys.path.insert(0, str(src_path))

from app.exceptions import InputError, UnsupportedError
from app.services.forms_service import (
    QExpansion, canonical_inner, cusp_inner, cusp_projection, delta_qexp, eisenstein_qexp, eta_product_qexp,
    fricke_dual, level11_qexp, petersson_numeric, ramanujan_bound_check,
)
from config.mpmath_config import MpmathConfig
from config.settings import get_settings
from utils.exact_linalg import ExactScalar

TAU = [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920, 534612, -370944]
LEVEL11 = [1, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1, -2, 4, 4, -1, -4, -2, 4, 0, 2]
DELTA_NORM = mpmath.mpf('1.035362056804320922e-6')


class TestGeneratedForms(unittest.TestCase):

    def test_ramanujan_tau(self):
        delta = delta_qexp(12)
        self.assertEqual([delta.coefficient(n) for n in range(1, 13)], TAU)
        self.assertEqual(delta.a0, 0)
        self.assertTrue(delta.cusp)

    def test_eta_product_matches_eisenstein_construction(self):
        self.assertEqual(eta_product_qexp({1: 24}, 30, 12, 1).coeffs, delta_qexp(30).coeffs)

    def test_eisenstein_normalization(self):
        e4 = eisenstein_qexp(4, 3)
        self.assertEqual(e4.a0, 1)
        self.assertEqual(e4.coefficient(1), 240)
        self.assertEqual(e4.coefficient(2), 2160)
        self.assertEqual(eisenstein_qexp(6, 1).coefficient(1), -504)

    def test_eisenstein_weight_must_be_even(self):
        with self.assertRaises(InputError):
            eisenstein_qexp(5, 3)
        with self.assertRaises(InputError):
            eisenstein_qexp(2, 3)

    def test_level11_newform(self):
        form = level11_qexp(20)
        self.assertEqual([form.coefficient(n) for n in range(1, 21)], LEVEL11)
        self.assertEqual((form.weight, form.level), (2, 11))
        self.assertEqual(form.metadata['fricke_eigenvalue'], -1)

    def test_eta_product_needs_integral_expansion(self):
        with self.assertRaises(InputError):
            eta_product_qexp({1: 1}, 10)

    def test_ramanujan_bound(self):
        self.assertTrue(ramanujan_bound_check(delta_qexp(50))['holds'])
        self.assertTrue(ramanujan_bound_check(level11_qexp(50))['holds'])


class TestDuals(unittest.TestCase):

    def test_level_one_is_self_dual(self):
        delta = delta_qexp(5)
        self.assertEqual(fricke_dual(delta), delta)

    def test_higher_level_needs_eigenvalue(self):
        form = level11_qexp(5)
        with self.assertRaises(InputError):
            fricke_dual(form)
        self.assertEqual(fricke_dual(form, -1).coefficient(1), -1)

    def test_supplied_dual_is_used(self):
        form = level11_qexp(5)
        dual = fricke_dual(form, form.scaled(3))
        self.assertEqual(dual.coefficient(2), -6)
        self.assertEqual(dual.metadata['provenance'], 'supplied')


class TestInnerProducts(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.settings = get_settings('testing')
        MpmathConfig.init_app(cls.settings)

    def test_cusp_inner_is_exact(self):
        value = cusp_inner([Fraction(1, 2), ExactScalar(0, 1)], [1, ExactScalar(0, 1)])
        # (1/2 * 1 + i * conj(i)) / 2
        self.assertEqual(value, ExactScalar(Fraction(3, 4)))

    def test_cusp_inner_needs_matching_lists(self):
        with self.assertRaises(InputError):
            cusp_inner([1], [1, 2])
        with self.assertRaises(InputError):
            cusp_inner([], [])

    def test_petersson_norm_of_delta(self):
        delta = delta_qexp(12)
        result = petersson_numeric(delta, delta, 12, 6, self.settings)
        expected = DELTA_NORM / (mpmath.pi / 3)
        self.assertLess(abs(result.value - expected), 1e-4 * expected)
        self.assertEqual(result.terms, 6)

    def test_petersson_quadrature_methods_agree(self):
        delta = delta_qexp(12)
        result = petersson_numeric(delta, delta, 12, 6, self.settings)
        self.assertLess(result.method_delta, 1e-6 * abs(result.value))
        self.assertEqual(result.to_dict()['method_delta'], result.method_delta)

    def test_petersson_is_level_one_only(self):
        form = level11_qexp(5)
        with self.assertRaises(UnsupportedError):
            petersson_numeric(form, form, settings=self.settings)

    def test_cusp_projection_removes_eisenstein_part(self):
        scaled = eisenstein_qexp(4, 10).scaled(7)
        projected = cusp_projection(scaled)
        self.assertEqual(projected.a0, 0)
        self.assertTrue(all(c == 0 for c in projected.coeffs.values()))

    def test_cusp_projection_needs_weight_four(self):
        with self.assertRaises(UnsupportedError):
            cusp_projection(level11_qexp(5))

    def test_canonical_inner_of_eisenstein(self):
        e4 = eisenstein_qexp(4, 10)
        outcome = canonical_inner(e4, e4, self.settings)
        self.assertEqual(outcome['cusp'], '1')
        self.assertEqual(outcome['petersson'], [0.0, 0.0])

    def test_cusp_form_with_constant_is_rejected(self):
        with self.assertRaises(InputError):
            QExpansion(12, 1, {1: Fraction(1)}, Fraction(1), "bad", True)


if __name__ == '__main__':
    unittest.main()
