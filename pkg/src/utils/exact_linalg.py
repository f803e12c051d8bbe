"""
Exact linear algebra over the Gaussian rationals Q(i).

Scalars are pairs of Python Fractions; vectors are tuples of scalars and
matrices are tuples of row tuples. Subspaces are stored in canonical reduced
row echelon form, so two equal subspaces always carry identical bases and
subspace equality is plain tuple equality.

The elimination follows the classic rational row-echelon routine (pivot
search per column, row swap, eliminate below) and then normalises pivots and
clears above them to reach the reduced form.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import mpmath

Number = Union[int, Fraction, "ExactScalar"]


class ExactScalar:
    """
    Element of Q(i) stored as an exact (real, imaginary) pair of Fractions.

    Instances are immutable; arithmetic never rounds. Plain ints and
    Fractions are accepted on either side of every operator.
    """

    __slots__ = ('re', 'im')

    def __init__(self, re: Union[int, Fraction, str] = 0, im: Union[int, Fraction, str] = 0) -> None:
        object.__setattr__(self, 're', Fraction(re))
        object.__setattr__(self, 'im', Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("ExactScalar is immutable")

    # ---------------------------
    # construction helpers
    # ---------------------------

    @classmethod
    def coerce(cls, value: Number) -> 'ExactScalar':
        if isinstance(value, ExactScalar):
            return value
        if isinstance(value, (int, Fraction)):
            return cls(value, 0)
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        if isinstance(value, float):
            return cls(Fraction(value), 0)
        raise TypeError(f"cannot convert {type(value).__name__} to ExactScalar")

    @classmethod
    def parse(cls, text: Union[str, Sequence[str]]) -> 'ExactScalar':
        """
        Parse "p/q", a decimal string, or a [re, im] pair of such strings.

        Raises:
            ValueError: If any part is not an exact rational literal
        """
        if isinstance(text, (list, tuple)):
            if len(text) != 2:
                raise ValueError(f"expected [re, im], got {text!r}")
            return cls(Fraction(str(text[0]).strip()), Fraction(str(text[1]).strip()))
        return cls(Fraction(str(text).strip()), 0)

    def to_json(self) -> List[str]:
        return [str(self.re), str(self.im)]

    # ---------------------------
    # arithmetic
    # ---------------------------

    def __add__(self, other: Number) -> 'ExactScalar':
        o = ExactScalar.coerce(other)
        return ExactScalar(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other: Number) -> 'ExactScalar':
        o = ExactScalar.coerce(other)
        return ExactScalar(self.re - o.re, self.im - o.im)

    def __rsub__(self, other: Number) -> 'ExactScalar':
        return ExactScalar.coerce(other) - self

    def __mul__(self, other: Number) -> 'ExactScalar':
        o = ExactScalar.coerce(other)
        if not self.im and not o.im:
            return ExactScalar(self.re * o.re, 0)
        return ExactScalar(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> 'ExactScalar':
        o = ExactScalar.coerce(other)
        if not o.re and not o.im:
            raise ZeroDivisionError("division by zero in Q(i)")
        if not o.im:
            return ExactScalar(self.re / o.re, self.im / o.re)
        norm = o.re * o.re + o.im * o.im
        return ExactScalar((self.re * o.re + self.im * o.im) / norm, (self.im * o.re - self.re * o.im) / norm)

    def __rtruediv__(self, other: Number) -> 'ExactScalar':
        return ExactScalar.coerce(other) / self

    def __neg__(self) -> 'ExactScalar':
        return ExactScalar(-self.re, -self.im)

    def __pos__(self) -> 'ExactScalar':
        return self

    def __pow__(self, exponent: int) -> 'ExactScalar':
        if exponent < 0:
            return ONE / (self ** (-exponent))
        result, base = ONE, self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def conjugate(self) -> 'ExactScalar':
        return ExactScalar(self.re, -self.im)

    def norm2(self) -> Fraction:
        """Squared absolute value, exact."""
        return self.re * self.re + self.im * self.im

    # ---------------------------
    # comparison and conversion
    # ---------------------------

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ExactScalar):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return not self.im and self.re == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def to_mpc(self) -> mpmath.mpc:
        return mpmath.mpc(mpmath.mpf(self.re.numerator) / self.re.denominator,
                          mpmath.mpf(self.im.numerator) / self.im.denominator)

    def __repr__(self) -> str:
        if not self.im:
            return f"ExactScalar({self.re})"
        return f"ExactScalar({self.re}, {self.im})"

    def __str__(self) -> str:
        if not self.im:
            return str(self.re)
        return f"{self.re}+{self.im}i" if self.im > 0 else f"{self.re}{self.im}i"


ZERO = ExactScalar(0)
ONE = ExactScalar(1)
I_UNIT = ExactScalar(0, 1)

Vector = Tuple[ExactScalar, ...]
Matrix = Tuple[Vector, ...]


# ---------------------------
# vectors and matrices
# ---------------------------

def vector(values: Iterable[Number]) -> Vector:
    return tuple(ExactScalar.coerce(x) for x in values)


def matrix(rows: Iterable[Iterable[Number]]) -> Matrix:
    return tuple(vector(row) for row in rows)


def zero_vector(n: int) -> Vector:
    return (ZERO,) * n


def unit_vector(n: int, i: int) -> Vector:
    return tuple(ONE if j == i else ZERO for j in range(n))


def identity(n: int) -> Matrix:
    return tuple(unit_vector(n, i) for i in range(n))


def is_zero_vector(v: Sequence[ExactScalar]) -> bool:
    return all(x.is_zero() for x in v)


def add_vectors(u: Sequence[ExactScalar], v: Sequence[ExactScalar]) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def sub_vectors(u: Sequence[ExactScalar], v: Sequence[ExactScalar]) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def scale_vector(c: Number, v: Sequence[ExactScalar]) -> Vector:
    c = ExactScalar.coerce(c)
    return tuple(c * x for x in v)


def mat_vec(m: Matrix, v: Sequence[ExactScalar]) -> Vector:
    out = []
    for row in m:
        acc = ZERO
        for a, b in zip(row, v):
            if a and b:
                acc = acc + a * b
        out.append(acc)
    return tuple(out)


def vec_mat(v: Sequence[ExactScalar], m: Matrix) -> Vector:
    """Row vector times matrix."""
    n = len(m[0]) if m else 0
    out = [ZERO] * n
    for a, row in zip(v, m):
        if not a:
            continue
        for j, b in enumerate(row):
            if b:
                out[j] = out[j] + a * b
    return tuple(out)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    return tuple(vec_mat(row, b) for row in a)


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(sub_vectors(r, s) for r, s in zip(a, b))


def minus_identity(m: Matrix) -> Matrix:
    """The augmentation element m - 1 acting on the same space."""
    return mat_sub(m, identity(len(m)))


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m)) if m else ()


def conjugate_transpose(m: Matrix) -> Matrix:
    return tuple(tuple(x.conjugate() for x in col) for col in zip(*m))


def hermitian_product(u: Sequence[ExactScalar], v: Sequence[ExactScalar]) -> ExactScalar:
    """<u, v> = sum u_i conj(v_i), linear in the first argument."""
    acc = ZERO
    for a, b in zip(u, v):
        if a and b:
            acc = acc + a * b.conjugate()
    return acc


# ---------------------------
# elimination
# ---------------------------

def rref(rows: Sequence[Sequence[ExactScalar]], n_cols: Optional[int] = None) -> Tuple[List[List[ExactScalar]], List[int]]:
    """
    Canonical reduced row echelon form.

    Returns:
        (nonzero rows of the reduced form, pivot column of each row)
    """
    m = [list(r) for r in rows]
    if not m:
        return [], []
    n_rows = len(m)
    n_cols = len(m[0]) if n_cols is None else n_cols
    pivots: List[int] = []
    piv_r = 0
    for piv_c in range(n_cols):
        if piv_r == n_rows:
            break
        for i_row in range(piv_r, n_rows):
            if m[i_row][piv_c]:
                break
        else:
            continue
        if i_row != piv_r:
            m[piv_r], m[i_row] = m[i_row], m[piv_r]
        fp = m[piv_r][piv_c]
        if fp != ONE:
            m[piv_r] = [x / fp if x else x for x in m[piv_r]]
        pivot_row = m[piv_r]
        for r in range(n_rows):
            if r == piv_r:
                continue
            fr = m[r][piv_c]
            if not fr:
                continue
            row = m[r]
            for c in range(piv_c, n_cols):
                if pivot_row[c]:
                    row[c] = row[c] - pivot_row[c] * fr
        pivots.append(piv_c)
        piv_r += 1
    return m[:piv_r], pivots


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def is_invertible(m: Matrix) -> bool:
    return len(m) > 0 and len(m) == len(m[0]) and rank(m) == len(m)


def inverse(m: Matrix) -> Matrix:
    """
    Gauss-Jordan inverse.

    Raises:
        ValueError: If the matrix is singular
    """
    n = len(m)
    augmented = [list(row) + list(unit_vector(n, i)) for i, row in enumerate(m)]
    reduced, pivots = rref(augmented, n_cols=n)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return tuple(tuple(row[n:]) for row in reduced)


def nullspace(m: Sequence[Sequence[ExactScalar]], n_cols: int) -> List[Vector]:
    """
    Basis of {v : m v = 0} from the reduced form (free variables set to 1 in turn).
    """
    reduced, pivots = rref(m, n_cols=n_cols) if m else ([], [])
    pivot_set = set(pivots)
    basis = []
    for free in range(n_cols):
        if free in pivot_set:
            continue
        v = [ZERO] * n_cols
        v[free] = ONE
        for row, p in zip(reduced, pivots):
            if row[free]:
                v[p] = -row[free]
        basis.append(tuple(v))
    return basis


# ---------------------------
# subspaces
# ---------------------------

class Subspace:
    """
    Subspace of Q(i)^n with a canonical reduced echelon basis.

    Two Subspace objects compare equal exactly when their bases coincide,
    which by canonicity is exactly when they are the same subspace.
    """

    __slots__ = ('ambient_dim', 'basis', 'pivots')

    def __init__(self, ambient_dim: int, vectors: Iterable[Sequence[ExactScalar]] = ()) -> None:
        reduced, pivots = rref([tuple(v) for v in vectors], n_cols=ambient_dim)
        self.ambient_dim = ambient_dim
        self.basis: Tuple[Vector, ...] = tuple(tuple(r) for r in reduced)
        self.pivots: Tuple[int, ...] = tuple(pivots)

    @classmethod
    def zero(cls, n: int) -> 'Subspace':
        return cls(n)

    @classmethod
    def full(cls, n: int) -> 'Subspace':
        return cls(n, identity(n))

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def reduce(self, v: Sequence[ExactScalar]) -> Vector:
        """Canonical representative of v modulo this subspace."""
        w = list(v)
        for row, p in zip(self.basis, self.pivots):
            c = w[p]
            if c:
                for j in range(p, self.ambient_dim):
                    if row[j]:
                        w[j] = w[j] - c * row[j]
        return tuple(w)

    def contains(self, v: Sequence[ExactScalar]) -> bool:
        return is_zero_vector(self.reduce(v))

    def is_subspace_of(self, other: 'Subspace') -> bool:
        return all(other.contains(b) for b in self.basis)

    def annihilator(self) -> List[Vector]:
        """Functionals phi with sum(phi_i w_i) = 0 for every w in the subspace."""
        return nullspace(self.basis, self.ambient_dim)

    def __add__(self, other: 'Subspace') -> 'Subspace':
        return Subspace(self.ambient_dim, list(self.basis) + list(other.basis))

    def intersection(self, other: 'Subspace') -> 'Subspace':
        # v in both <=> both annihilators vanish on v
        rows = self.annihilator() + other.annihilator()
        return Subspace(self.ambient_dim, nullspace(rows, self.ambient_dim))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.basis))

    def to_json(self) -> List[List[List[str]]]:
        return [[x.to_json() for x in v] for v in self.basis]

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dimension} in {self.ambient_dim})"


class EchelonBuilder:
    """
    Incrementally grown span in reduced echelon form.

    Used by brute-force routines that insert many vectors and stop as soon as
    the span stops growing.
    """

    def __init__(self, n: int) -> None:
        self.n = n
        self._rows: Dict[int, List[ExactScalar]] = {}

    def add(self, v: Sequence[ExactScalar]) -> bool:
        """Insert v; return True if the span grew."""
        w = list(v)
        for p in sorted(self._rows):
            c = w[p]
            if c:
                row = self._rows[p]
                for j in range(p, self.n):
                    if row[j]:
                        w[j] = w[j] - c * row[j]
        pivot = next((j for j, x in enumerate(w) if x), None)
        if pivot is None:
            return False
        lead = w[pivot]
        w = [x / lead if x else x for x in w]
        for p, row in self._rows.items():
            c = row[pivot]
            if c:
                for j in range(pivot, self.n):
                    if w[j]:
                        row[j] = row[j] - c * w[j]
        self._rows[pivot] = w
        return True

    @property
    def dimension(self) -> int:
        return len(self._rows)

    def vectors(self) -> List[Vector]:
        return [tuple(self._rows[p]) for p in sorted(self._rows)]

    def subspace(self) -> Subspace:
        return Subspace(self.n, self.vectors())
