"""
Tests for the higher-invariant solvers, the brute-force oracle and the
order-lowering map.
"""
import random
import unittest
import sys
from fractions import Fraction
from pathlib import Path

# Add src to path for testing
project_root = Path(__file__).parent.parent
src_path = project_root / 'src'
sys.path.insert(0, str(src_path))

from app.exceptions import InputError, PreconditionError, UnsupportedError
from app.groups.permutation_universe import alternating_generators, from_cycles, symmetric_generators
from app.services.invariants_service import (
    FG_INFINITE, FINITE, MatrixModule, higher_invariants, ideal_power_annihilator,
    invariant_filtration, is_perfect, lowering_homomorphism_defect, no_higher_invariants_unitary_check,
    order_lowering, permutation_matrix, permutation_module, regular_module, stabilization_index,
)
from config.settings import get_settings
from utils.exact_linalg import ExactScalar, Subspace, inverse, is_zero_vector, mat_mul, matrix, vector


def jordan_module(n: int) -> MatrixModule:
    """Z acting on Q^n through a single unipotent Jordan block."""
    block = matrix([[1 if j in (i, i + 1) else 0 for j in range(n)] for i in range(n)])
    return MatrixModule(n, {'t': block}, FG_INFINITE, None, f"jordan{n}")


def block_diagonal(blocks) -> tuple:
    size = sum(len(b) for b in blocks)
    rows, offset = [], 0
    for b in blocks:
        for row in b:
            rows.append([0] * offset + list(row) + [0] * (size - offset - len(b)))
        offset += len(b)
    return matrix(rows)


def unit_triangular(rng: random.Random, n: int) -> tuple:
    return matrix([[1 if i == j else (rng.randint(-2, 2) if j > i else 0) for j in range(n)] for i in range(n)])


def random_finite_module(rng: random.Random, index: int) -> MatrixModule:
    """
    A small finite group in a rational or Gaussian basis: random permutations
    of 3 or 4 points (one or two diagonal copies) or diagonal powers of i,
    conjugated by a random unit-triangular matrix.
    """
    if rng.random() < 0.7:
        n = rng.choice((3, 4))
        copies = rng.choice((1, 2))
        perms = [tuple(rng.sample(range(n), n)) for _ in range(rng.randint(1, 2))]
        blocks = [block_diagonal([permutation_matrix(p)] * copies) for p in perms]
    else:
        i = ExactScalar(0, 1)
        n = rng.randint(1, 4)
        blocks = [matrix([[i ** rng.randint(0, 3) if r == c else 0 for c in range(n)] for r in range(n)])
                  for _ in range(rng.randint(1, 2))]
    dim = len(blocks[0])
    p = unit_triangular(rng, dim)
    p_inv = inverse(p)
    gens = {f"g{j}": mat_mul(mat_mul(p, b), p_inv) for j, b in enumerate(blocks)}
    return MatrixModule(dim, gens, FINITE, None, f"random{index}")


class TestFiniteGroups(unittest.TestCase):
    """Finite groups in characteristic zero have no higher invariants"""

    def setUp(self):
        self.settings = get_settings('testing')
        gens = alternating_generators(5)
        self.a5 = permutation_module(5, {f"c{i}": g for i, g in enumerate(gens)}, "a5")

    def test_a5_permutation_module_degenerates(self):
        chain = invariant_filtration(self.a5, 2, self.settings)
        self.assertEqual(chain[0], Subspace(5, [vector([1] * 5)]))
        self.assertEqual(chain[1], chain[0])
        self.assertEqual(chain[2], chain[0])

    def test_oracle_matches_solver(self):
        for q in range(3):
            with self.subTest(q=q):
                self.assertEqual(ideal_power_annihilator(self.a5, q, self.settings),
                                 higher_invariants(self.a5, q, self.settings))

    def test_dihedral_oracle_matches_solver(self):
        d4 = permutation_module(4, {'r': from_cycles(4, (0, 1, 2, 3)), 's': from_cycles(4, (0, 2))}, "d4")
        self.assertEqual(len(d4.elements), 8)
        self.assertEqual(ideal_power_annihilator(d4, 1, self.settings), higher_invariants(d4, 1, self.settings))

    def test_unitary_check(self):
        self.assertTrue(no_higher_invariants_unitary_check(self.a5, self.settings))

    def test_unitary_check_rejects_non_unitary_generator(self):
        skew = matrix([[0, 2], [Fraction(1, 2), 0]])
        module = MatrixModule(2, {'g': skew}, FINITE, None, "skew")
        with self.assertRaises(PreconditionError) as ctx:
            no_higher_invariants_unitary_check(module, self.settings)
        self.assertEqual(ctx.exception.diagnostics['generator'], 'g')

    def test_a5_is_perfect(self):
        self.assertTrue(is_perfect(self.a5))
        d4 = permutation_module(4, {'r': from_cycles(4, (0, 1, 2, 3)), 's': from_cycles(4, (0, 2))})
        self.assertFalse(is_perfect(d4))


class TestRandomFiniteModules(unittest.TestCase):
    """The generator solver agrees with the ideal-power oracle on random finite modules"""

    def setUp(self):
        self.settings = get_settings('testing')

    def test_oracle_matches_solver_on_random_modules(self):
        rng = random.Random(self.settings.SEED)
        for index in range(24):
            module = random_finite_module(rng, index)
            q = rng.randint(0, 3)
            with self.subTest(module=module.label, q=q):
                self.assertLessEqual(module.dim, 8)
                self.assertLessEqual(module.group_order, 60)
                solved = higher_invariants(module, q, self.settings)
                self.assertEqual(ideal_power_annihilator(module, q, self.settings), solved)
                self.assertEqual(solved, higher_invariants(module, 0, self.settings))


class TestUnitaryModels(unittest.TestCase):
    """Unitary finite models have H_q = H_0"""

    def setUp(self):
        self.settings = get_settings('testing')
        a5 = {'c5': from_cycles(5, (0, 1, 2, 3, 4)), 'c3': from_cycles(5, (0, 1, 2))}
        self.a5_regular = regular_module(a5, "a5-regular")

    def test_a5_regular_module_has_no_higher_invariants(self):
        self.assertEqual(self.a5_regular.dim, 60)
        self.assertEqual(self.a5_regular.group_order, 60)
        chain = invariant_filtration(self.a5_regular, 3, self.settings)
        self.assertEqual(chain[0], Subspace(60, [vector([1] * 60)]))
        for q in (1, 2, 3):
            self.assertEqual(chain[q], chain[0])
        self.assertTrue(is_perfect(self.a5_regular))

    def test_unitary_check_on_several_modules(self):
        i = ExactScalar(0, 1)
        s4 = symmetric_generators(4)
        modules = [
            permutation_module(5, {f"c{k}": g for k, g in enumerate(alternating_generators(5))}, "a5"),
            permutation_module(4, {'r': s4[0], 't': s4[1]}, "s4"),
            permutation_module(4, {'r': from_cycles(4, (0, 1, 2, 3)), 's': from_cycles(4, (0, 2))}, "d4"),
            MatrixModule(3, {'g': matrix([[i, 0, 0], [0, -1, 0], [0, 0, 1]])}, FINITE, None, "gaussian"),
            self.a5_regular,
        ]
        for module in modules:
            with self.subTest(module=module.label):
                self.assertTrue(no_higher_invariants_unitary_check(module, self.settings))

    def test_group_order_of_permutation_modules(self):
        s4 = symmetric_generators(4)
        self.assertEqual(permutation_module(4, {'r': s4[0], 't': s4[1]}).group_order, 24)
        self.assertIsNone(jordan_module(2).group_order)


class TestInfiniteGroups(unittest.TestCase):
    """A unipotent Jordan block grows one dimension per order"""

    def setUp(self):
        self.settings = get_settings('testing')

    def test_jordan_block_chain(self):
        chain = invariant_filtration(jordan_module(3), 3, self.settings)
        self.assertEqual([h.dimension for h in chain], [1, 2, 3, 3])
        self.assertEqual(stabilization_index(jordan_module(3), 3, self.settings), 2)

    def test_oracle_needs_finite_group(self):
        with self.assertRaises(UnsupportedError):
            ideal_power_annihilator(jordan_module(2), 1, self.settings)

    def test_order_above_cap_is_rejected(self):
        with self.assertRaises(InputError):
            higher_invariants(jordan_module(2), self.settings.Q_MAX + 1, self.settings)
        with self.assertRaises(InputError):
            higher_invariants(jordan_module(2), -1, self.settings)

    def test_order_lowering(self):
        module = jordan_module(2)
        lowering = order_lowering(vector([0, 1]), module, 1, self.settings)
        self.assertEqual(lowering.image('t'), vector([1, 0]))
        self.assertFalse(lowering.is_zero())
        t = module.generators['t']
        defect = lowering_homomorphism_defect(vector([0, 1]), module, 1, t, t, self.settings)
        self.assertTrue(is_zero_vector(defect))

    def test_order_lowering_rejects_non_invariant(self):
        with self.assertRaises(InputError):
            order_lowering(vector([0, 0, 1]), jordan_module(3), 1, self.settings)

    def test_singular_generator_is_rejected(self):
        with self.assertRaises(InputError):
            MatrixModule(2, {'z': matrix([[1, 1], [1, 1]])})


if __name__ == '__main__':
    unittest.main()
