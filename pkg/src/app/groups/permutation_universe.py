"""
Finite permutation universe S_n.

Permutations are tuples p of images (p[i] is the image of i) composed as
functions: (p*q)(i) = p[q[i]]. sympy's combinatorics package is used for the
group-theoretic queries (orders, perfectness) so the toolkit does not
re-implement Schreier-Sims.
"""
from typing import Any, Hashable, Iterable, List, Sequence, Tuple

from sympy.combinatorics import Permutation, PermutationGroup

from app.exceptions import InputError
from app.groups.base_universe import GroupUniverse

Perm = Tuple[int, ...]


def from_cycles(n: int, *cycles: Sequence[int]) -> Perm:
    """Permutation of n points from disjoint cycles, e.g. from_cycles(4, (0, 1, 2, 3))."""
    images = list(range(n))
    for cycle in cycles:
        for i, point in enumerate(cycle):
            images[point] = cycle[(i + 1) % len(cycle)]
    return tuple(images)


def to_sympy(p: Perm) -> Permutation:
    return Permutation(list(p))


class PermutationUniverse(GroupUniverse):
    """
    The symmetric group on n points.
    """

    def __init__(self, n: int) -> None:
        if n < 1:
            raise InputError("permutation universe needs n >= 1")
        self.n = n
        self.name = f"S{n}"

    def multiply(self, p: Perm, q: Perm) -> Perm:
        return tuple(p[i] for i in q)

    def invert(self, p: Perm) -> Perm:
        inv = [0] * self.n
        for i, image in enumerate(p):
            inv[image] = i
        return tuple(inv)

    def identity(self) -> Perm:
        return tuple(range(self.n))

    def key(self, p: Perm) -> Hashable:
        return tuple(p)

    def to_json(self, p: Perm) -> List[int]:
        return list(p)

    def from_json(self, data: Any) -> Perm:
        try:
            p = tuple(int(x) for x in data)
        except (TypeError, ValueError) as exc:
            raise InputError(f"not a permutation of {self.n} points: {data!r}") from exc
        if sorted(p) != list(range(self.n)):
            raise InputError(f"not a permutation of {self.n} points: {data!r}")
        return p

    def all_elements(self) -> List[Perm]:
        return self.close([from_cycles(self.n, tuple(range(self.n))), from_cycles(self.n, (0, 1))]
                          if self.n > 1 else [])

    def group_order(self, generators: Iterable[Perm]) -> int:
        gens = [to_sympy(p) for p in generators]
        if not gens:
            return 1
        return int(PermutationGroup(gens).order())


def is_perfect_permutation_group(generators: Iterable[Perm]) -> bool:
    """A group is perfect when it equals its commutator subgroup."""
    gens = [to_sympy(p) for p in generators]
    if not gens:
        return True
    return bool(PermutationGroup(gens).is_perfect)


def alternating_generators(n: int) -> List[Perm]:
    """3-cycles (0 1 k) generate A_n."""
    return [from_cycles(n, (0, 1, k)) for k in range(2, n)]


def symmetric_generators(n: int) -> List[Perm]:
    if n == 1:
        return []
    return [from_cycles(n, tuple(range(n))), from_cycles(n, (0, 1))]
