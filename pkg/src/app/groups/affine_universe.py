"""
Affine universe: pairs (x, y) of rationals with y != 0 and the law
(x, y)(x', y') = (x + y x', y y'), i.e. the matrices [[y, x], [0, 1]].

Used for the p-adic example (Q_p semidirect Q_p^x modelled by rationals and
p-adic valuations) and for the translation Hecke pair with a unipotent action.
"""
from fractions import Fraction
from typing import Any, Hashable, List, Tuple

from app.exceptions import InputError
from app.groups.base_universe import GroupUniverse

Affine = Tuple[Fraction, Fraction]


def affine(x, y) -> Affine:
    return (Fraction(x), Fraction(y))


def valuation(value: Fraction, p: int) -> float:
    """
    p-adic valuation of a rational: powers of p in the numerator minus
    powers of p in the denominator. v(0) is +infinity.
    """
    value = Fraction(value)
    if value == 0:
        return float('inf')
    v = 0
    num, den = value.numerator, value.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


class AffineUniverse(GroupUniverse):
    """
    The group of affine pairs over Q.
    """

    name = "Q x| Q^x"

    def multiply(self, a: Affine, b: Affine) -> Affine:
        x, y = a
        x2, y2 = b
        return (x + y * x2, y * y2)

    def invert(self, a: Affine) -> Affine:
        x, y = a
        if y == 0:
            raise InputError("affine pair with y = 0 is not invertible")
        return (-x / y, 1 / y)

    def identity(self) -> Affine:
        return affine(0, 1)

    def key(self, a: Affine) -> Hashable:
        return tuple(a)

    def to_json(self, a: Affine) -> List[str]:
        return [str(a[0]), str(a[1])]

    def from_json(self, data: Any) -> Affine:
        try:
            x, y = data
            a = affine(str(x), str(y))
        except (TypeError, ValueError) as exc:
            raise InputError(f"not an affine pair: {data!r}") from exc
        if a[1] == 0:
            raise InputError("affine pair needs y != 0", {'pair': data})
        return a
