"""
Tests for exact Q(i) arithmetic and canonical subspaces.
"""
import unittest
import sys
from fractions import Fraction
from pathlib import Path

# Add src to path for testing
project_root = Path(__file__).parent.parent
src_path = project_root / 'src'
sys.path.insert(0, str(src_path))

from utils.exact_linalg import (
    I_UNIT, ONE, EchelonBuilder, ExactScalar, Subspace, identity, inverse,
    mat_mul, matrix, nullspace, rank, vector,
)


class TestExactScalar(unittest.TestCase):

    def test_arithmetic_is_exact(self):
        third = ExactScalar(Fraction(1, 3))
        self.assertEqual(third * 3, ONE)
        self.assertEqual(I_UNIT * I_UNIT, -1)
        z = ExactScalar(1, 2)
        self.assertEqual(z * z.conjugate(), 5)
        self.assertEqual((z / z), ONE)
        self.assertEqual(z ** 2, ExactScalar(-3, 4))
        self.assertEqual(z ** -1 * z, ONE)

    def test_parse_accepts_fraction_strings_and_pairs(self):
        self.assertEqual(ExactScalar.parse("1/3"), ExactScalar(Fraction(1, 3)))
        self.assertEqual(ExactScalar.parse(["1/2", "-3"]), ExactScalar(Fraction(1, 2), -3))
        self.assertEqual(ExactScalar.parse("0.25"), ExactScalar(Fraction(1, 4)))

    def test_parse_rejects_garbage(self):
        with self.assertRaises(ValueError):
            ExactScalar.parse("abc")
        with self.assertRaises(ValueError):
            ExactScalar.parse(["1", "2", "3"])

    def test_json_form(self):
        self.assertEqual(ExactScalar(Fraction(-2, 5), 1).to_json(), ["-2/5", "1"])
        self.assertEqual(str(ExactScalar(1, -1)), "1-1i")

    def test_immutable(self):
        with self.assertRaises(AttributeError):
            ONE.re = Fraction(2)


class TestMatrices(unittest.TestCase):

    def test_inverse_and_rank(self):
        m = matrix([[2, 1], [1, 1]])
        self.assertEqual(mat_mul(m, inverse(m)), identity(2))
        self.assertEqual(rank(matrix([[1, 2], [2, 4]])), 1)

    def test_nullspace(self):
        rows = matrix([[1, 1, 0], [0, 1, 1]])
        basis = nullspace(rows, 3)
        self.assertEqual(len(basis), 1)
        self.assertEqual(Subspace(3, basis), Subspace(3, [vector([1, -1, 1])]))


class TestSubspace(unittest.TestCase):

    def test_equality_is_basis_independent(self):
        a = Subspace(3, [vector([1, 0, 0]), vector([0, 1, 0])])
        b = Subspace(3, [vector([1, 1, 0]), vector([1, -1, 0])])
        self.assertEqual(a, b)
        self.assertEqual(hash(a), hash(b))
        self.assertEqual(a.dimension, 2)

    def test_containment_and_intersection(self):
        plane = Subspace(3, [vector([1, 0, 0]), vector([0, 1, 0])])
        other = Subspace(3, [vector([0, 1, 0]), vector([0, 0, 1])])
        line = plane.intersection(other)
        self.assertEqual(line, Subspace(3, [vector([0, 1, 0])]))
        self.assertTrue(line.is_subspace_of(plane))
        self.assertFalse(plane.contains(vector([0, 0, 1])))
        self.assertEqual((plane + other), Subspace.full(3))

    def test_echelon_builder_stops_growing(self):
        builder = EchelonBuilder(2)
        self.assertTrue(builder.add(vector([1, 1])))
        self.assertFalse(builder.add(vector([2, 2])))
        self.assertTrue(builder.add(vector([0, 1])))
        self.assertEqual(builder.subspace(), Subspace.full(2))


if __name__ == '__main__':
    unittest.main()
