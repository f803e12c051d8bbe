"""
GL2(Q) universe.

Elements are 4-tuples (a, b, c, d) of Fractions standing for the matrix
[[a, b], [c, d]] with nonzero determinant. Besides the group law this module
carries the integral normal forms used as fast paths by the Hecke engine:
a Hermite label for cosets h SL2(Z) and the elementary-divisor label for
double cosets SL2(Z) g SL2(Z).
"""
from fractions import Fraction
from math import gcd
from typing import Any, Hashable, List, Sequence, Tuple

from app.exceptions import InputError
from app.groups.base_universe import GroupUniverse

Mat2 = Tuple[Fraction, Fraction, Fraction, Fraction]


def mat2(a, b, c, d) -> Mat2:
    """Build a 2x2 element from anything Fraction accepts (ints, 'p/q' strings)."""
    return (Fraction(a), Fraction(b), Fraction(c), Fraction(d))


def diag(x, y) -> Mat2:
    return mat2(x, 0, 0, y)


def det(m: Mat2) -> Fraction:
    a, b, c, d = m
    return a * d - b * c


def is_integral(m: Mat2) -> bool:
    return all(x.denominator == 1 for x in m)


def _ext_gcd(a: int, b: int) -> Tuple[int, int, int]:
    """Return (g, u, v) with u*a + v*b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_u, u = 1, 0
    old_v, v = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_u, u = u, old_u - q * u
        old_v, v = v, old_v - q * v
    if old_r < 0:
        old_r, old_u, old_v = -old_r, -old_u, -old_v
    return old_r, old_u, old_v


def hermite_label(m: Mat2) -> Hashable:
    """
    Canonical label of the left coset m SL2(Z) for an integral matrix.

    Column operations by SL2(Z) bring m to [[g, 0], [c, e]] with g > 0 and
    0 <= c < |e|; the triple (g, c, e) determines the coset.
    """
    a, b, c, d = (int(x) for x in m)
    g, u, v = _ext_gcd(a, b)
    c1 = c * u + d * v
    e = (a * d - b * c) // g
    return (g, c1 % abs(e), e)


def hermite_label_right(m: Mat2) -> Hashable:
    """Label of the right coset SL2(Z) m (the left label of the transpose)."""
    a, b, c, d = m
    return hermite_label((a, c, b, d))


def elementary_divisor_key(m: Mat2) -> Hashable:
    """
    Canonical label of SL2(Z) m SL2(Z) for m in GL2(Q).

    After clearing denominators by L the double coset of the integral matrix
    L*m is fixed by the gcd of its entries and its determinant.
    """
    lcm = 1
    for x in m:
        lcm = lcm * x.denominator // gcd(lcm, x.denominator)
    entries = [int(x * lcm) for x in m]
    g = 0
    for x in entries:
        g = gcd(g, abs(x))
    determinant = entries[0] * entries[3] - entries[1] * entries[2]
    return (Fraction(g, lcm), Fraction(determinant, lcm * lcm))


class MatrixUniverse(GroupUniverse):
    """
    The group GL2(Q) with exact rational entries.
    """

    name = "GL2(Q)"

    def multiply(self, x: Mat2, y: Mat2) -> Mat2:
        a, b, c, d = x
        e, f, g, h = y
        return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def invert(self, x: Mat2) -> Mat2:
        a, b, c, d = x
        dt = a * d - b * c
        if dt == 0:
            raise InputError("singular matrix has no inverse", {'matrix': self.to_json(x)})
        return (d / dt, -b / dt, -c / dt, a / dt)

    def identity(self) -> Mat2:
        return diag(1, 1)

    def key(self, x: Mat2) -> Hashable:
        return tuple(x)

    def to_json(self, x: Mat2) -> List[List[str]]:
        a, b, c, d = x
        return [[str(a), str(b)], [str(c), str(d)]]

    def from_json(self, data: Any) -> Mat2:
        try:
            (a, b), (c, d) = data
            m = mat2(str(a), str(b), str(c), str(d))
        except (TypeError, ValueError) as exc:
            raise InputError(f"not a 2x2 rational matrix: {data!r}") from exc
        if det(m) == 0:
            raise InputError("matrix must have nonzero determinant", {'matrix': data})
        return m


def in_sl2z(m: Mat2) -> bool:
    return is_integral(m) and det(m) == 1


def congruent_to_identity(m: Mat2, level: int) -> bool:
    """True for integral matrices congruent to I modulo `level`."""
    if not is_integral(m):
        return False
    a, b, c, d = (int(x) for x in m)
    return (a - 1) % level == 0 and b % level == 0 and c % level == 0 and (d - 1) % level == 0


def sl2z_generators() -> List[Mat2]:
    """S and T."""
    return [mat2(0, -1, 1, 0), mat2(1, 1, 0, 1)]


def reduce_mod(m: Mat2, level: int) -> Tuple[int, int, int, int]:
    return tuple(int(x) % level for x in m)


def congruence_transversal(level: int, generators: Sequence[Mat2]) -> List[Mat2]:
    """
    Integral lifts of every element of SL2(Z/level), found as words in the
    generators (breadth first, so lifts stay short).
    """
    universe = MatrixUniverse()
    gens = list(generators) + [universe.invert(s) for s in generators]
    start = universe.identity()
    seen = {reduce_mod(start, level): start}
    frontier = [start]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = universe.multiply(x, s)
                r = reduce_mod(y, level)
                if r not in seen:
                    seen[r] = y
                    nxt.append(y)
        frontier = nxt
    return list(seen.values())
