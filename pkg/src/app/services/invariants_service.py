"""
Invariants Service for hoforms.

This service computes higher invariants of matrix group actions: the spaces
H_q(Gamma, V) of vectors killed by the (q+1)-st power of the augmentation
ideal. The main solver iterates "v lies in H_q iff (g - 1)v lies in H_{q-1}
for every generator g", which only needs the generator list because the
augmentation ideal is two-sided. An independent brute-force oracle builds the
ideal power from the full element list of a finite group.

The service also provides the order-lowering map H_q -> Hom(Gamma, H_{q-1}/H_{q-2})
and the unitary check that finite groups have no higher invariants.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.exceptions import InputError, PreconditionError, UnsupportedError
from app.groups.permutation_universe import Perm, PermutationUniverse, is_perfect_permutation_group
from config.settings import Config
from utils import console
from utils.exact_linalg import (
    EchelonBuilder, Matrix, Subspace, Vector, conjugate_transpose, identity, is_invertible,
    is_zero_vector, mat_mul, mat_vec, matrix, minus_identity, nullspace, sub_vectors, vec_mat,
)

FINITE = "finite"
FG_INFINITE = "fg-infinite"


@dataclass(frozen=True)
class MatrixModule:
    """
    A group acting on Q(i)^dim through named generator matrices.

    For finite groups `elements` holds the full element list (the identity
    included); it is filled by closure when not supplied. Modules built from
    permutations keep them in `permutations` for the group-theoretic queries.
    """
    dim: int
    generators: Dict[str, Matrix]
    group_kind: str = FG_INFINITE
    elements: Optional[Tuple[Matrix, ...]] = None
    label: str = "module"
    permutations: Optional[Dict[str, Perm]] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise InputError("module dimension must be positive")
        if self.group_kind not in (FINITE, FG_INFINITE):
            raise InputError(f"unknown group_kind {self.group_kind!r}")
        for name, m in self.generators.items():
            if len(m) != self.dim or any(len(row) != self.dim for row in m):
                raise InputError(f"generator {name} is not {self.dim}x{self.dim}")
            if not is_invertible(m):
                raise InputError(f"generator {name} is not invertible", {'generator': name})
        if self.group_kind == FINITE and self.elements is None:
            object.__setattr__(self, 'elements', tuple(enumerate_matrix_group(list(self.generators.values()))))

    @property
    def is_finite(self) -> bool:
        return self.group_kind == FINITE

    @property
    def group_order(self) -> Optional[int]:
        """Order of the acting group; None for finitely generated infinite groups."""
        if self.permutations:
            n = len(next(iter(self.permutations.values())))
            return PermutationUniverse(n).group_order(self.permutations.values())
        return len(self.elements) if self.is_finite else None

    def restricted(self, generators: Dict[str, Matrix], label: Optional[str] = None) -> 'MatrixModule':
        """Same space, acted on by a subgroup given through its own generators."""
        return MatrixModule(self.dim, dict(generators), self.group_kind, None, label or self.label)


@dataclass(frozen=True)
class LoweringMap:
    """
    Image of v under the order-lowering map: generator name -> (g - 1)v,
    read modulo `modulus` = H_{q-2}.
    """
    source_order: int
    vector: Vector
    images: Dict[str, Vector]
    modulus: Subspace
    generator_matrices: Dict[str, Matrix] = field(repr=False, default_factory=dict)

    def apply(self, element: Matrix) -> Vector:
        """Canonical representative of (element - 1)v modulo H_{q-2}."""
        return self.modulus.reduce(mat_vec(minus_identity(element), self.vector))

    def image(self, name: str) -> Vector:
        return self.modulus.reduce(self.images[name])

    def is_zero(self) -> bool:
        return all(is_zero_vector(self.image(name)) for name in self.images)


# ---------------------------
# group enumeration helpers
# ---------------------------

def _matrix_key(m: Matrix) -> Tuple:
    return tuple(tuple((x.re, x.im) for x in row) for row in m)


def enumerate_matrix_group(generators: Sequence[Matrix], cap: int = 5000) -> List[Matrix]:
    """
    All elements of the finite group generated by the matrices, identity first.

    Raises:
        InputError: If the closure does not terminate within `cap` elements
    """
    if not generators:
        raise InputError("a group needs at least one generator")
    start = identity(len(generators[0]))
    seen = {_matrix_key(start)}
    order = [start]
    i = 0
    while i < len(order):
        x = order[i]
        i += 1
        for s in generators:
            y = mat_mul(x, s)
            k = _matrix_key(y)
            if k not in seen:
                seen.add(k)
                order.append(y)
                if len(order) > cap:
                    raise InputError("generators do not close to a finite group within the cap", {'cap': cap})
    return order


def permutation_matrix(p: Perm) -> Matrix:
    """rho(p) e_i = e_{p(i)}, a homomorphism for the composition (p*q)(i) = p[q[i]]."""
    n = len(p)
    return matrix([[1 if p[j] == i else 0 for j in range(n)] for i in range(n)])


def permutation_module(n: int, permutations: Dict[str, Perm], label: str = "permutation") -> MatrixModule:
    """The permutation representation of the group generated by `permutations` on Q^n."""
    gens = {name: permutation_matrix(p) for name, p in permutations.items()}
    return MatrixModule(n, gens, FINITE, None, label, dict(permutations))


def regular_module(permutations: Dict[str, Perm], label: str = "regular") -> MatrixModule:
    """
    Left regular representation of a finite permutation group on Q^|G|.
    """
    perms = list(permutations.values())
    universe = PermutationUniverse(len(perms[0]))
    elements = universe.close(perms)
    index = {universe.key(e): i for i, e in enumerate(elements)}
    size = len(elements)

    def left_multiplication(p: Perm) -> Matrix:
        image = [index[universe.key(universe.multiply(p, e))] for e in elements]
        return matrix([[1 if image[j] == i else 0 for j in range(size)] for i in range(size)])

    gens = {name: left_multiplication(p) for name, p in permutations.items()}
    # the element list is known, so the matrix closure is skipped
    acting = tuple(left_multiplication(e) for e in elements)
    return MatrixModule(size, gens, FINITE, acting, label, dict(permutations))


def is_perfect(module: MatrixModule) -> bool:
    """
    True when the acting finite group equals its commutator subgroup.

    Permutation modules ask sympy; other finite matrix groups are decided by
    enumeration of commutators of the element list.
    """
    if not module.is_finite:
        raise UnsupportedError("perfectness is decided by enumeration; the group must be finite")
    if module.permutations:
        return is_perfect_permutation_group(module.permutations.values())
    elements = list(module.elements)
    full = {_matrix_key(e) for e in elements}
    derived_gens: List[Matrix] = []
    derived_keys = {_matrix_key(identity(module.dim))}
    inverses = {_matrix_key(e): _inverse_in(elements, e) for e in elements}
    for a in elements:
        for b in elements:
            c = mat_mul(mat_mul(a, b), mat_mul(inverses[_matrix_key(a)], inverses[_matrix_key(b)]))
            if _matrix_key(c) in derived_keys:
                continue
            derived_gens.append(c)
            derived_keys = {_matrix_key(e) for e in enumerate_matrix_group(derived_gens)}
            if derived_keys == full:
                return True
    return derived_keys == full


def _inverse_in(elements: Sequence[Matrix], e: Matrix) -> Matrix:
    one = identity(len(e))
    for f in elements:
        if mat_mul(e, f) == one:
            return f
    raise InputError("element list is not closed under inversion")


# ---------------------------
# higher invariants
# ---------------------------

def _check_order(q: int, settings: type[Config]) -> None:
    if q < 0:
        raise InputError("order q must be >= 0", {'q': q})
    if q > settings.Q_MAX:
        raise InputError(f"order q={q} exceeds the configured cap Q_MAX={settings.Q_MAX}", {'q': q})


def preimage_step(generators: Sequence[Matrix], lower: Subspace) -> Subspace:
    """{v : (g - 1)v in lower for every g}."""
    dim = lower.ambient_dim
    functionals = lower.annihilator()
    rows = []
    for g in generators:
        shifted = minus_identity(g)
        for phi in functionals:
            rows.append(vec_mat(phi, shifted))
    if not rows:
        return Subspace.full(dim)
    return Subspace(dim, nullspace(rows, dim))


def invariant_filtration(module: MatrixModule, q: int, settings: type[Config] = Config) -> List[Subspace]:
    """
    [H_0, ..., H_q] for the module.

    Args:
        module: The acting group and space
        q: Highest order to compute

    Returns:
        The increasing chain of higher-invariant subspaces
    """
    _check_order(q, settings)
    generators = list(module.generators.values())
    chain: List[Subspace] = []
    current = Subspace.zero(module.dim)
    for _ in range(q + 1):
        current = preimage_step(generators, current)
        chain.append(current)
    return chain


def higher_invariants(module: MatrixModule, q: int, settings: type[Config] = Config) -> Subspace:
    """
    H_q(Gamma, V) = {v : I^{q+1} v = 0}, by iterated preimages over the generators.
    """
    return invariant_filtration(module, q, settings)[-1]


def ideal_power_annihilator(module: MatrixModule, q: int, settings: type[Config] = Config) -> Subspace:
    """
    Brute-force oracle: kernel of the span of all products (g_1 - 1)...(g_{q+1} - 1)
    over the full element list.

    The span is tracked through its row space: the rows of A(g - 1) are the
    rows of A multiplied by (g - 1), so R_{k+1} = span{r (g - 1)} over r in R_k
    and every element g.

    Raises:
        UnsupportedError: If the group is not enumerated
    """
    if not module.is_finite:
        raise UnsupportedError("the ideal-power oracle needs a finite, enumerated group")
    _check_order(q, settings)
    shifted = [minus_identity(g) for g in module.elements]
    rows = EchelonBuilder(module.dim)
    for s in shifted:
        for r in s:
            rows.add(r)
    for _ in range(q):
        nxt = EchelonBuilder(module.dim)
        for r in rows.vectors():
            for s in shifted:
                nxt.add(vec_mat(r, s))
                if nxt.dimension == module.dim:
                    break
        if nxt.vectors() == rows.vectors():
            break
        rows = nxt
        if rows.dimension == 0:
            break
    return Subspace(module.dim, nullspace(rows.vectors(), module.dim))


def stabilization_index(module: MatrixModule, q_max: Optional[int] = None,
                        settings: type[Config] = Config) -> Optional[int]:
    """Smallest q with H_q = H_{q+1}, or None if the chain grows up to q_max."""
    q_max = settings.Q_MAX if q_max is None else q_max
    chain = invariant_filtration(module, q_max, settings)
    for q in range(len(chain) - 1):
        if chain[q] == chain[q + 1]:
            return q
    return None


def order_lowering(v: Sequence, module: MatrixModule, q: int, settings: type[Config] = Config) -> LoweringMap:
    """
    The order-lowering map of v in H_q: each generator g goes to (g - 1)v,
    an element of H_{q-1} read modulo H_{q-2}.

    Raises:
        InputError: If v is not in H_q
    """
    v = tuple(v)
    if len(v) != module.dim:
        raise InputError("vector length does not match the module dimension")
    chain = invariant_filtration(module, q, settings)
    if not chain[q].contains(v):
        raise InputError(f"vector is not a higher invariant of order {q}")
    modulus = chain[q - 2] if q >= 2 else Subspace.zero(module.dim)
    images = {name: mat_vec(minus_identity(g), v) for name, g in module.generators.items()}
    return LoweringMap(q, v, images, modulus, dict(module.generators))


def unitary_residual(m: Matrix) -> float:
    """max |M*M - I| entrywise, in floating point."""
    a = np.array([[complex(x) for x in row] for row in m], dtype=complex)
    return float(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0]))))


def is_unitary(m: Matrix, tolerance: float) -> bool:
    if mat_mul(conjugate_transpose(m), m) == identity(len(m)):
        return True
    return unitary_residual(m) < tolerance


def no_higher_invariants_unitary_check(module: MatrixModule, settings: type[Config] = Config) -> bool:
    """
    Finite groups acting unitarily have no higher invariants: H_q = H_0 for q = 1, 2, 3.

    Raises:
        UnsupportedError: If the group is not finite
        PreconditionError: If a generator is not unitary
    """
    if not module.is_finite:
        raise UnsupportedError("the unitary model check applies to finite groups")
    for name, g in module.generators.items():
        if not is_unitary(g, settings.UNITARY_TOLERANCE):
            raise PreconditionError(f"generator {name} is not unitary",
                                    {'generator': name, 'residual': unitary_residual(g)})
    chain = invariant_filtration(module, min(3, settings.Q_MAX), settings)
    verdict = all(h == chain[0] for h in chain[1:])
    if verdict:
        console.success(f"{module.label}: no higher invariants up to q={len(chain) - 1}")
    else:
        console.warning(f"{module.label}: higher invariants found in a unitary finite model")
    return verdict


def lowering_homomorphism_defect(v: Sequence, module: MatrixModule, q: int, a: Matrix, b: Matrix,
                                 settings: type[Config] = Config) -> Vector:
    """
    l(ab) - l(a) - l(b) modulo H_{q-2}; zero when the lowering map is a homomorphism.
    """
    lowering = order_lowering(v, module, q, settings)
    combined = lowering.apply(mat_mul(a, b))
    return lowering.modulus.reduce(sub_vectors(sub_vectors(combined, lowering.apply(a)), lowering.apply(b)))
