"""
Tests for coset enumeration, Hecke operators on higher invariants and the
Hecke-algebra convolution.
"""
import random
import unittest
import sys
from pathlib import Path

# Add src to path for testing
project_root = Path(__file__).parent.parent
src_path = project_root / 'src'
sys.path.insert(0, str(src_path))

from app.exceptions import InputError, UnsupportedError
from app.groups.affine_universe import affine
from app.groups.matrix_universe import diag
from app.groups.permutation_universe import from_cycles
from app.services.hecke_service import (
    LEFT, RIGHT, HeckeAlgebraElement, congruence_check, enumerate_cosets, finite_pair, gamma_g_contains,
    hecke_algebra_action, hecke_apply, hecke_class, hecke_convolve, nonunimodular_example, permutation_action,
    restriction_diagram, sl2z_pair, translation_pair, unimodular_counts, unipotent_affine_action,
    unitary_model_checks, welldefinedness_check,
)
from config.settings import get_settings
from utils.exact_linalg import is_zero_vector, vector


def dihedral_pair():
    """D4 acting on the square's corners with the Klein four-group as Sigma."""
    rotation = from_cycles(4, (0, 1, 2, 3))
    reflection = from_cycles(4, (0, 2))
    klein = [from_cycles(4, (0, 1), (2, 3)), from_cycles(4, (0, 2), (1, 3))]
    return finite_pair(4, [rotation, reflection], klein, "D4", "V4")


def gelfand_pair():
    """(S4, S3) with S3 the stabilizer of the last point."""
    s3 = [from_cycles(4, (0, 1, 2)), from_cycles(4, (0, 1))]
    return finite_pair(4, s3, None, "S3")


class TestCosetEnumeration(unittest.TestCase):

    def setUp(self):
        self.settings = get_settings('testing')

    def test_sl2z_prime_diagonal_has_p_plus_one_cosets(self):
        pair = sl2z_pair()
        for p in (2, 3, 5):
            with self.subTest(p=p):
                self.assertEqual(unimodular_counts(pair, diag(1, p), self.settings), (p + 1, p + 1))

    def test_nonunimodular_affine_example(self):
        for p in (2, 3, 5):
            with self.subTest(p=p):
                self.assertEqual(nonunimodular_example(p, settings=self.settings), (p, 1))

    def test_sigma_cosets_of_finite_pair(self):
        pair = dihedral_pair()
        g = from_cycles(4, (0, 1))
        left = enumerate_cosets(pair, g, LEFT, "sigma", self.settings)
        right = enumerate_cosets(pair, g, RIGHT, "sigma", self.settings)
        gamma_left = enumerate_cosets(pair, g, LEFT, "gamma", self.settings)
        self.assertEqual(len(left), len(right))
        # [D4 : V4] = 2
        self.assertEqual(len(left), 2 * len(gamma_left))

    def test_bad_side_is_rejected(self):
        with self.assertRaises(InputError):
            enumerate_cosets(dihedral_pair(), from_cycles(4, (0, 1)), "middle")

    def test_gamma_g_membership_needs_gamma_element(self):
        pair = gelfand_pair()
        with self.assertRaises(InputError):
            gamma_g_contains(pair, from_cycles(4, (2, 3)), from_cycles(4, (2, 3)))


class TestHeckeAlgebra(unittest.TestCase):

    def setUp(self):
        self.settings = get_settings('testing')

    def test_t2_squared(self):
        pair = sl2z_pair()
        t2 = HeckeAlgebraElement.basis(pair, diag(1, 2))
        expected = HeckeAlgebraElement.basis(pair, diag(1, 4)) + HeckeAlgebraElement.basis(pair, diag(2, 2), 3)
        self.assertEqual(hecke_convolve(t2, t2, pair, self.settings), expected)

    def test_identity_is_neutral(self):
        pair = gelfand_pair()
        one = HeckeAlgebraElement.basis(pair, pair.universe.identity())
        t = HeckeAlgebraElement.basis(pair, from_cycles(4, (2, 3)))
        self.assertEqual(hecke_convolve(one, t, pair, self.settings), t)


class TestHeckeOperators(unittest.TestCase):

    def setUp(self):
        self.settings = get_settings('testing')

    def test_translation_pair_acts_by_p(self):
        p = 3
        pair = translation_pair(p)
        action = unipotent_affine_action()
        cls = hecke_class(pair, action, vector([0, 1]), 1, self.settings)
        image = hecke_apply(pair, action, cls, affine(0, p), [affine(p, 1)], None, self.settings)
        self.assertEqual(image.canonical(), vector([0, p]))

    def test_infinite_pair_needs_target_subgroup(self):
        pair = translation_pair(2)
        action = unipotent_affine_action()
        cls = hecke_class(pair, action, vector([0, 1]), 1, self.settings)
        with self.assertRaises(UnsupportedError):
            hecke_apply(pair, action, cls, affine(0, 2), None, None, self.settings)

    def test_class_membership_is_checked(self):
        pair = dihedral_pair()
        with self.assertRaises(InputError):
            hecke_class(pair, permutation_action(4), vector([1, 0, 0, 0]), 0, self.settings)

    def test_welldefinedness_on_finite_pair(self):
        pair = dihedral_pair()
        cls = hecke_class(pair, permutation_action(4), vector([1, 1, 1, 1]), 1, self.settings)
        result = welldefinedness_check(pair, permutation_action(4), cls, from_cycles(4, (0, 1)), 100,
                                       random.Random(self.settings.SEED), None, self.settings)
        self.assertEqual(result['failures'], 0)
        self.assertEqual(result['trials'], 100)

    def test_unitary_model_on_gelfand_pair(self):
        report = unitary_model_checks(gelfand_pair(), permutation_action(4), from_cycles(4, (2, 3)), 0,
                                      self.settings)
        self.assertEqual(report['quotient_dim'], 2)
        self.assertEqual(report['bound'], 3)
        self.assertLessEqual(report['norm'], report['bound'] + 1e-9)
        self.assertLess(report['adjoint_residual'], 1e-12)
        self.assertTrue(report['symmetric_double_coset'])
        self.assertTrue(report['self_adjoint'])

    def test_unitary_model_flags_zero_quotient(self):
        # D4 > V4 acts through a finite group, so H_1 = H_0 and the order-1 quotient vanishes
        report = unitary_model_checks(dihedral_pair(), permutation_action(4), from_cycles(4, (0, 1)), 1,
                                      self.settings)
        self.assertEqual(report['quotient_dim'], 0)
        self.assertTrue(report['degenerate'])

    def test_unitary_model_at_order_zero_is_not_degenerate(self):
        report = unitary_model_checks(dihedral_pair(), permutation_action(4), from_cycles(4, (0, 1)), 0,
                                      self.settings)
        self.assertGreater(report['quotient_dim'], 0)
        self.assertFalse(report['degenerate'])
        self.assertLessEqual(report['norm'], report['bound'] + 1e-9)

    def test_congruence_check(self):
        result = congruence_check(gelfand_pair(), from_cycles(4, (2, 3)), from_cycles(4, (1, 3)), self.settings)
        self.assertTrue(result['contained_in_intersection'])

    def test_restriction_commutes_with_hecke_operator(self):
        coarse = dihedral_pair()
        fine = finite_pair(4, [from_cycles(4, (0, 1, 2, 3)), from_cycles(4, (0, 2))],
                           [from_cycles(4, (0, 2), (1, 3))], "D4", "C2")
        action = permutation_action(4)
        cls = hecke_class(coarse, action, vector([1, 1, 1, 1]), 1, self.settings)
        commutes, difference = restriction_diagram(coarse, fine, action, cls, from_cycles(4, (0, 1)), None,
                                                   self.settings)
        self.assertTrue(commutes)
        self.assertTrue(is_zero_vector(difference))

    def test_hecke_algebra_acts_by_double_coset_operators(self):
        pair = gelfand_pair()
        action = permutation_action(4)
        cls = hecke_class(pair, action, vector([0, 0, 0, 1]), 0, self.settings)
        element = HeckeAlgebraElement.basis(pair, from_cycles(4, (2, 3)))
        image = hecke_algebra_action(element, pair, action, cls, settings=self.settings)
        # the three cosets outside S3 move the fixed point to 0, 1 and 2
        self.assertEqual(image.canonical(), vector([1, 1, 1, 0]))


if __name__ == '__main__':
    unittest.main()
