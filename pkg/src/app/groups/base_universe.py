"""
Base Group Universe Interface for hoforms.

This module defines the abstract base class for the ambient groups G in which
Hecke pairs live. A universe provides exact element arithmetic and a hashable
canonical key per element; everything the Hecke engine does (coset search,
membership tests, convolution) is written against this interface so that
matrix groups, affine groups and finite permutation groups share one engine.

The base class handles:
- Word evaluation and conjugation built from the primitive operations
- Finite subgroup closure for enumerable universes
- Abstract methods every concrete universe must implement
"""
from abc import ABC, abstractmethod
from collections import deque
from typing import Any, Hashable, Iterable, List, Sequence

from app.exceptions import InputError


class GroupUniverse(ABC):
    """
    Abstract base class for exact group universes.

    Elements are plain immutable Python values (tuples of Fractions or of
    ints); the universe object carries the group law. Element equality is
    decided by `key`, which must be canonical.
    """

    name: str = "group"

    # ---------------------------
    # Abstract methods - must be implemented by concrete universes
    # ---------------------------

    @abstractmethod
    def multiply(self, a: Any, b: Any) -> Any:
        """Return the product a*b."""

    @abstractmethod
    def invert(self, a: Any) -> Any:
        """Return the inverse of a."""

    @abstractmethod
    def identity(self) -> Any:
        """Return the neutral element."""

    @abstractmethod
    def key(self, a: Any) -> Hashable:
        """Canonical hashable label; equal elements have equal keys."""

    @abstractmethod
    def to_json(self, a: Any) -> Any:
        """JSON-compatible representation of an element (exact strings)."""

    @abstractmethod
    def from_json(self, data: Any) -> Any:
        """Inverse of to_json."""

    # ---------------------------
    # derived operations
    # ---------------------------

    def equal(self, a: Any, b: Any) -> bool:
        return self.key(a) == self.key(b)

    def conjugate(self, g: Any, x: Any) -> Any:
        """g x g^-1"""
        return self.multiply(self.multiply(g, x), self.invert(g))

    def commutator(self, a: Any, b: Any) -> Any:
        """a b a^-1 b^-1"""
        return self.multiply(self.multiply(a, b), self.multiply(self.invert(a), self.invert(b)))

    def product(self, elements: Iterable[Any]) -> Any:
        result = self.identity()
        for e in elements:
            result = self.multiply(result, e)
        return result

    def power(self, a: Any, n: int) -> Any:
        if n < 0:
            return self.power(self.invert(a), -n)
        result = self.identity()
        for _ in range(n):
            result = self.multiply(result, a)
        return result

    def close(self, generators: Sequence[Any], cap: int = 100000) -> List[Any]:
        """
        Enumerate the subgroup generated by `generators` by breadth-first closure.

        The identity comes first; the remaining order is fixed by generator order,
        so the enumeration is deterministic.

        Raises:
            InputError: If the closure exceeds `cap` elements
        """
        start = self.identity()
        seen = {self.key(start): start}
        order = [start]
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for s in generators:
                y = self.multiply(x, s)
                k = self.key(y)
                if k not in seen:
                    seen[k] = y
                    order.append(y)
                    queue.append(y)
                    if len(order) > cap:
                        raise InputError("subgroup closure exceeded cap; group is not finite at desk scale",
                                         {'cap': cap})
        return order
