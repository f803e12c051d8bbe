"""
Hecke Service for hoforms.

This service implements the Hecke-pair machinery on top of the exact group
universes: breadth-first coset enumeration of double cosets, the congruence
kernels Gamma(g) and Sigma(g), normalized Hecke operators on higher-invariant
quotients H_q(Sigma, V)/H_{q-1}(Sigma, V), restriction along finer normal
subgroups, Hecke-algebra convolution in the double-coset basis, and the
verifications for finite unitary models (norm bound and adjoint identity).

Pairs are plain data: membership predicates, generator lists and a
transversal of Sigma in Gamma. Factories at the bottom of the module build
the pairs used throughout the toolkit: SL2(Z) in GL2(Q), the p-adic affine
example, the translation pair with a unipotent action, and finite pairs
inside symmetric groups.
"""
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from app.exceptions import InputError, PreconditionError, UnsupportedError
from app.groups.affine_universe import AffineUniverse, affine, valuation
from app.groups.base_universe import GroupUniverse
from app.groups.matrix_universe import (
    MatrixUniverse, congruence_transversal, congruent_to_identity, diag, elementary_divisor_key,
    hermite_label, hermite_label_right, in_sl2z, is_integral, sl2z_generators,
)
from app.groups.permutation_universe import Perm, PermutationUniverse
from app.services.invariants_service import FG_INFINITE, MatrixModule, higher_invariants, is_unitary, permutation_matrix
from config.settings import Config
from utils import console
from utils.exact_linalg import (
    ONE, ZERO, ExactScalar, Matrix, Subspace, Vector, add_vectors, hermitian_product, identity, inverse,
    mat_vec, matrix, nullspace, scale_vector, sub_vectors, zero_vector,
)

LEFT = "left"
RIGHT = "right"


# ---------------------------
# data types
# ---------------------------

@dataclass(frozen=True)
class GroupAction:
    """
    A linear action of the universe G on Q(i)^dim, given element-wise.
    """
    dim: int
    matrix_of: Callable[[Any], Matrix]
    label: str = "action"

    def act(self, element: Any, v: Sequence[ExactScalar]) -> Vector:
        return mat_vec(self.matrix_of(element), v)

    def module(self, elements: Sequence[Any], label: str) -> MatrixModule:
        """The subgroup generated by `elements` acting on the same space."""
        gens = {f"s{i}": self.matrix_of(e) for i, e in enumerate(elements)}
        return MatrixModule(self.dim, gens, FG_INFINITE, None, label)


@dataclass(frozen=True)
class HeckePair:
    """
    A Hecke pair (G, Gamma) together with a normal finite-index Sigma in Gamma.

    `gamma_elements`/`sigma_elements` are filled for finite pairs; the
    optional label functions give canonical coset labels (fast path for
    deduplication), and `double_coset_key` canonical double-coset labels.
    """
    universe: GroupUniverse
    gamma_contains: Callable[[Any], bool]
    gamma_generators: Tuple[Any, ...]
    sigma_contains: Callable[[Any], bool]
    sigma_index: int
    sigma_transversal: Tuple[Any, ...]
    label: str = "Gamma"
    sigma_label: str = "Sigma"
    sigma_generators: Optional[Tuple[Any, ...]] = None
    gamma_elements: Optional[Tuple[Any, ...]] = None
    sigma_elements: Optional[Tuple[Any, ...]] = None
    gamma_coset_label: Optional[Callable[[Any, str], Hashable]] = field(default=None, repr=False)
    sigma_coset_label: Optional[Callable[[Any, str], Hashable]] = field(default=None, repr=False)
    double_coset_key: Optional[Callable[[Any], Hashable]] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if len(self.sigma_transversal) != self.sigma_index:
            raise InputError("transversal size differs from [Gamma:Sigma]",
                             {'transversal': len(self.sigma_transversal), 'index': self.sigma_index})
        for t in self.sigma_transversal:
            if not self.gamma_contains(t):
                raise InputError("transversal element outside Gamma", {'element': self.universe.to_json(t)})
        self.check_normal()

    @property
    def is_finite(self) -> bool:
        return self.gamma_elements is not None and self.sigma_elements is not None

    def check_normal(self) -> None:
        """
        Spot-check that Sigma is normal in Gamma on generators.

        Raises:
            InputError: If some gamma sigma gamma^-1 leaves Sigma
        """
        samples = self.sigma_generators if self.sigma_generators is not None else ()
        for gamma in self.gamma_generators:
            for sigma in samples:
                if not self.sigma_contains(self.universe.conjugate(gamma, sigma)):
                    raise InputError(f"{self.sigma_label} is not normal in {self.label}",
                                     {'gamma': self.universe.to_json(gamma), 'sigma': self.universe.to_json(sigma)})

    def with_sigma_gamma(self) -> 'HeckePair':
        """The same pair with Sigma replaced by Gamma."""
        return replace(self, sigma_contains=self.gamma_contains, sigma_index=1,
                       sigma_transversal=(self.universe.identity(),), sigma_label=self.label,
                       sigma_generators=self.gamma_generators, sigma_elements=self.gamma_elements,
                       sigma_coset_label=self.gamma_coset_label)

    def sigma_as_gamma(self) -> 'HeckePair':
        """The pair (G, Sigma), used to count Sigma-double cosets."""
        if self.sigma_generators is None:
            raise UnsupportedError(f"{self.sigma_label} has no generator list")
        return HeckePair(self.universe, self.sigma_contains, tuple(self.sigma_generators), self.sigma_contains, 1,
                         (self.universe.identity(),), self.sigma_label, self.sigma_label,
                         tuple(self.sigma_generators), self.sigma_elements, self.sigma_elements,
                         self.sigma_coset_label, self.sigma_coset_label, None)

    def with_sigma(self, contains: Callable[[Any], bool], index: int, transversal: Sequence[Any], label: str,
                   generators: Optional[Sequence[Any]] = None, elements: Optional[Sequence[Any]] = None) -> 'HeckePair':
        """The same Gamma with another normal subgroup Sigma."""
        return replace(self, sigma_contains=contains, sigma_index=index, sigma_transversal=tuple(transversal),
                       sigma_label=label, sigma_generators=None if generators is None else tuple(generators),
                       sigma_elements=None if elements is None else tuple(elements), sigma_coset_label=None)


@dataclass(frozen=True)
class CosetDecomposition:
    """Gamma g Gamma as a disjoint union of h_j Sigma (left) or Sigma h_j (right)."""
    g: Any
    reps: Tuple[Any, ...]
    side: str
    modulo: str

    def __len__(self) -> int:
        return len(self.reps)


@dataclass(frozen=True)
class HeckeClass:
    """
    A class in H_q(Sigma, V)/H_{q-1}(Sigma, V): a representative vector read
    modulo `modulus`.
    """
    sigma_label: str
    order: int
    representative: Vector
    modulus: Subspace

    def canonical(self) -> Vector:
        return self.modulus.reduce(self.representative)

    def same_class(self, other: 'HeckeClass') -> bool:
        """Equal modulus and representatives differing by an element of it."""
        return self.modulus == other.modulus and self.modulus.contains(sub_vectors(self.representative, other.representative))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'sigma': self.sigma_label,
            'order': self.order,
            'representative': [x.to_json() for x in self.representative],
            'canonical': [x.to_json() for x in self.canonical()],
            'modulus': self.modulus.to_json(),
        }


@dataclass
class HeckeAlgebraElement:
    """
    Finitely supported element of the Hecke algebra, sum of c_D 1_D over
    double cosets D = Gamma g Gamma. Keys are canonical double-coset labels.
    """
    terms: Dict[Hashable, ExactScalar] = field(default_factory=dict)
    reps: Dict[Hashable, Any] = field(default_factory=dict)

    @classmethod
    def basis(cls, pair: HeckePair, g: Any, coefficient: Any = 1) -> 'HeckeAlgebraElement':
        key = double_coset_label(pair, g)
        return cls({key: ExactScalar.coerce(coefficient)}, {key: g})

    def __add__(self, other: 'HeckeAlgebraElement') -> 'HeckeAlgebraElement':
        terms = dict(self.terms)
        reps = dict(self.reps)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, ZERO) + c
            reps.setdefault(k, other.reps[k])
        return HeckeAlgebraElement(terms, reps).pruned()

    def scaled(self, c: Any) -> 'HeckeAlgebraElement':
        c = ExactScalar.coerce(c)
        return HeckeAlgebraElement({k: c * v for k, v in self.terms.items()}, dict(self.reps)).pruned()

    def pruned(self) -> 'HeckeAlgebraElement':
        terms = {k: v for k, v in self.terms.items() if v}
        return HeckeAlgebraElement(terms, {k: self.reps[k] for k in terms})

    def coefficient(self, pair: HeckePair, g: Any) -> ExactScalar:
        return self.terms.get(double_coset_label(pair, g), ZERO)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HeckeAlgebraElement):
            return NotImplemented
        return self.pruned().terms == other.pruned().terms


# ---------------------------
# cosets
# ---------------------------

def _coset_equal(pair: HeckePair, a: Any, b: Any, side: str, contains: Callable[[Any], bool]) -> bool:
    u = pair.universe
    if side == LEFT:
        return contains(u.multiply(u.invert(a), b))
    return contains(u.multiply(a, u.invert(b)))


def enumerate_cosets(pair: HeckePair, g: Any, side: str = LEFT, modulo: str = "sigma",
                     settings: type[Config] = Config) -> CosetDecomposition:
    """
    Decompose Gamma g Gamma into Sigma-cosets (or Gamma-cosets with modulo="gamma").

    Breadth-first closure: the seeds are g t (left) or t g (right) for t in
    the transversal of the modulus group, and the frontier is multiplied by
    the Gamma generators and their inverses on the outside. Cosets are
    deduplicated by a canonical label when the pair has one, otherwise by the
    membership test h_i^-1 h_j in Sigma (left) or h_i h_j^-1 in Sigma (right).

    Raises:
        InputError: If more than COSET_CAP cosets are found
    """
    if side not in (LEFT, RIGHT):
        raise InputError(f"side must be left or right, got {side!r}")
    u = pair.universe
    if modulo == "gamma":
        contains, transversal, labeler = pair.gamma_contains, (u.identity(),), pair.gamma_coset_label
    else:
        contains, transversal, labeler = pair.sigma_contains, pair.sigma_transversal, pair.sigma_coset_label
    steps = list(pair.gamma_generators) + [u.invert(s) for s in pair.gamma_generators]
    if side == LEFT:
        seeds = [u.multiply(g, t) for t in transversal]
    else:
        seeds = [u.multiply(t, g) for t in transversal]

    reps: List[Any] = []
    labels: Dict[Hashable, Any] = {}

    def admit(h: Any) -> bool:
        if labeler is not None:
            lab = labeler(h, side)
            if lab is not None:
                if lab in labels:
                    return False
                labels[lab] = h
                reps.append(h)
                return True
        for r in reps:
            if _coset_equal(pair, r, h, side, contains):
                return False
        reps.append(h)
        return True

    frontier = [h for h in seeds if admit(h)]
    while frontier:
        nxt = []
        for h in frontier:
            for s in steps:
                y = u.multiply(s, h) if side == LEFT else u.multiply(h, s)
                if admit(y):
                    nxt.append(y)
                    if len(reps) > settings.COSET_CAP:
                        raise InputError("possibly infinite coset space", {'cap': settings.COSET_CAP})
        frontier = nxt
    return CosetDecomposition(g, tuple(reps), side, modulo)


def double_coset_label(pair: HeckePair, g: Any) -> Hashable:
    """
    Canonical label of Gamma g Gamma.

    Uses the pair's key function when present; finite pairs fall back to the
    smallest element key in the double coset.
    """
    if pair.double_coset_key is not None:
        return pair.double_coset_key(g)
    if pair.gamma_elements is not None:
        u = pair.universe
        return min(u.key(u.multiply(u.multiply(a, g), b)) for a in pair.gamma_elements for b in pair.gamma_elements)
    raise UnsupportedError("this pair has no canonical double-coset labels")


def unimodular_counts(pair: HeckePair, g: Any, settings: type[Config] = Config) -> Tuple[int, int]:
    """(|Gamma g Gamma / Gamma|, |Gamma \\ Gamma g Gamma|)."""
    left = enumerate_cosets(pair, g, LEFT, "gamma", settings)
    right = enumerate_cosets(pair, g, RIGHT, "gamma", settings)
    return len(left), len(right)


def gamma_g_contains(pair: HeckePair, g: Any, gamma: Any, variant: str = "gamma",
                     settings: type[Config] = Config) -> bool:
    """
    Membership in Gamma(g) (variant "gamma") or Sigma(g) (variant "sigma"):
    gamma h_j K = h_j K for every coset h_j K of Gamma g Gamma, K = Gamma or Sigma.

    Raises:
        InputError: If gamma is not in Gamma (resp. Sigma)
    """
    u = pair.universe
    if variant == "gamma":
        if not pair.gamma_contains(gamma):
            raise InputError(f"element is not in {pair.label}", {'element': u.to_json(gamma)})
        decomposition = enumerate_cosets(pair, g, LEFT, "gamma", settings)
        contains = pair.gamma_contains
    else:
        if not pair.sigma_contains(gamma):
            raise InputError(f"element is not in {pair.sigma_label}", {'element': u.to_json(gamma)})
        decomposition = enumerate_cosets(pair, g, LEFT, "sigma", settings)
        contains = pair.sigma_contains
    for h in decomposition.reps:
        if not contains(u.multiply(u.invert(h), u.multiply(gamma, h))):
            return False
    return True


def sigma_g_elements(pair: HeckePair, g: Any, settings: type[Config] = Config) -> List[Any]:
    """Sigma(g) as an element list (finite pairs only)."""
    if pair.sigma_elements is None:
        raise UnsupportedError("Sigma(g) is enumerable only on finite pairs; supply a normal subgroup instead")
    u = pair.universe
    decomposition = enumerate_cosets(pair, g, LEFT, "sigma", settings)
    return [s for s in pair.sigma_elements
            if all(pair.sigma_contains(u.multiply(u.invert(h), u.multiply(s, h))) for h in decomposition.reps)]


# ---------------------------
# Hecke operators on higher invariants
# ---------------------------

def hecke_class(pair: HeckePair, action: GroupAction, v: Sequence[ExactScalar], q: int,
                settings: type[Config] = Config) -> HeckeClass:
    """
    Wrap v as a class of H_q(Sigma, V)/H_{q-1}(Sigma, V).

    Raises:
        InputError: If v is not in H_q(Sigma, V)
    """
    v = tuple(ExactScalar.coerce(x) for x in v)
    if pair.sigma_generators is None:
        raise UnsupportedError(f"{pair.sigma_label} has no generator list; cannot verify the class")
    module = action.module(pair.sigma_generators, pair.sigma_label)
    if not higher_invariants(module, q, settings).contains(v):
        raise InputError(f"vector is not in H_{q}({pair.sigma_label}, V)")
    modulus = higher_invariants(module, q - 1, settings) if q >= 1 else Subspace.zero(action.dim)
    return HeckeClass(pair.sigma_label, q, v, modulus)


def _target_modulus(pair: HeckePair, action: GroupAction, g: Any, q: int,
                    target_generators: Optional[Sequence[Any]], settings: type[Config]) -> Tuple[str, Subspace]:
    label = f"{pair.sigma_label}(g)"
    if q == 0:
        return label, Subspace.zero(action.dim)
    if target_generators is None:
        if not pair.is_finite:
            raise UnsupportedError("supply a normal subgroup contained in Sigma(g) for infinite pairs")
        target_generators = sigma_g_elements(pair, g, settings)
    else:
        label = f"{pair.sigma_label}(g)>N"
    module = action.module(list(target_generators), label)
    return label, higher_invariants(module, q - 1, settings)


def hecke_apply(pair: HeckePair, action: GroupAction, cls: HeckeClass, g: Any,
                target_generators: Optional[Sequence[Any]] = None,
                representatives: Optional[Sequence[Any]] = None,
                settings: type[Config] = Config) -> HeckeClass:
    """
    T_{Gamma g Gamma} v = (1/[Gamma:Sigma]) sum_j h_j v over Gamma g Gamma = U h_j Sigma.

    The result is a class over Sigma(g) (or over the supplied normal subgroup
    contained in Sigma(g)) with modulus H_{q-1} of that subgroup.

    Args:
        pair: The Hecke pair with Sigma
        action: Action of G on V
        cls: Class in H_q(Sigma, V)/H_{q-1}(Sigma, V)
        g: Element of G
        target_generators: Generators of a normal subgroup inside Sigma(g) (infinite pairs)
        representatives: Alternative coset representatives h_j sigma_j (well-definedness checks)

    Returns:
        The image class
    """
    pair.check_normal()
    if representatives is None:
        representatives = enumerate_cosets(pair, g, LEFT, "sigma", settings).reps
    total = zero_vector(action.dim)
    for h in representatives:
        total = add_vectors(total, action.act(h, cls.representative))
    total = scale_vector(ExactScalar(Fraction(1, pair.sigma_index)), total)
    label, modulus = _target_modulus(pair, action, g, cls.order, target_generators, settings)
    return HeckeClass(label, cls.order, total, modulus)


def hecke_algebra_action(element: HeckeAlgebraElement, pair: HeckePair, action: GroupAction, cls: HeckeClass,
                         target_generators: Optional[Sequence[Any]] = None,
                         settings: type[Config] = Config) -> HeckeClass:
    """
    Action of sum c_D 1_D as sum c_D T_D, read modulo H_{q-1} of a common
    normal subgroup (the intersection of the Sigma(g_D) on finite pairs).
    """
    total = zero_vector(action.dim)
    common: Optional[List[Any]] = None
    for key, c in element.terms.items():
        g = element.reps[key]
        image = hecke_apply(pair, action, cls, g, target_generators or [pair.universe.identity()], None, settings)
        total = add_vectors(total, scale_vector(c, image.representative))
        if target_generators is None and pair.is_finite:
            members = sigma_g_elements(pair, g, settings)
            if common is None:
                common = members
            else:
                keys = {pair.universe.key(x) for x in members}
                common = [x for x in common if pair.universe.key(x) in keys]
    gens = target_generators if target_generators is not None else common
    if cls.order == 0:
        modulus = Subspace.zero(action.dim)
    elif gens is None:
        raise UnsupportedError("supply a normal subgroup contained in every Sigma(g)")
    else:
        modulus = higher_invariants(action.module(list(gens), "common"), cls.order - 1, settings)
    return HeckeClass(f"{pair.sigma_label}(common)", cls.order, total, modulus)


def _random_sigma(pair: HeckePair, rng: random.Random, length: int = 4) -> Any:
    u = pair.universe
    if pair.sigma_elements is not None:
        return rng.choice(pair.sigma_elements)
    if not pair.sigma_generators:
        raise UnsupportedError(f"{pair.sigma_label} has neither elements nor generators to sample from")
    x = u.identity()
    for _ in range(rng.randint(0, length)):
        s = rng.choice(pair.sigma_generators)
        x = u.multiply(x, s if rng.random() < 0.5 else u.invert(s))
    return x


def welldefinedness_check(pair: HeckePair, action: GroupAction, cls: HeckeClass, g: Any, trials: int,
                          rng: random.Random, target_generators: Optional[Sequence[Any]] = None,
                          settings: type[Config] = Config) -> Dict[str, Any]:
    """
    Re-choose the representatives h_j as h_j sigma_j in shuffled order and
    check that T v only moves inside the modulus H_{q-1}(Sigma(g), V).
    """
    reps = list(enumerate_cosets(pair, g, LEFT, "sigma", settings).reps)
    base = hecke_apply(pair, action, cls, g, target_generators, reps, settings)
    u = pair.universe
    failures = 0
    for _ in range(trials):
        chosen = [u.multiply(h, _random_sigma(pair, rng)) for h in reps]
        rng.shuffle(chosen)
        other = hecke_apply(pair, action, cls, g, target_generators, chosen, settings)
        if not base.modulus.contains(sub_vectors(other.representative, base.representative)):
            failures += 1
    if failures:
        console.warning(f"{failures} of {trials} representative choices changed T v outside the modulus")
    return {'trials': trials, 'failures': failures, 'cosets': len(reps), 'image': base.to_dict()}


def restrict_class(cls: HeckeClass, coarse: HeckePair, fine: HeckePair, action: GroupAction,
                   settings: type[Config] = Config) -> HeckeClass:
    """
    res from Sigma to a finer normal Sigma': same representative, modulus H_{q-1}(Sigma').

    Raises:
        InputError: If Sigma' is not contained in Sigma
    """
    if fine.sigma_generators is None:
        raise UnsupportedError(f"{fine.sigma_label} has no generator list")
    for s in fine.sigma_generators:
        if not coarse.sigma_contains(s):
            raise InputError(f"{fine.sigma_label} is not contained in {coarse.sigma_label}",
                             {'element': fine.universe.to_json(s)})
    if cls.order == 0:
        modulus = Subspace.zero(action.dim)
    else:
        modulus = higher_invariants(action.module(fine.sigma_generators, fine.sigma_label), cls.order - 1, settings)
    return HeckeClass(fine.sigma_label, cls.order, cls.representative, modulus)


def restriction_diagram(coarse: HeckePair, fine: HeckePair, action: GroupAction, cls: HeckeClass, g: Any,
                        fine_target_generators: Optional[Sequence[Any]] = None,
                        settings: type[Config] = Config) -> Tuple[bool, Vector]:
    """
    Compare res(T v) with T(res v) modulo H_{q-1}(Sigma'(g), V).

    Returns:
        (commutes, difference of the two representatives)
    """
    upper = hecke_apply(coarse, action, cls, g, fine_target_generators or [coarse.universe.identity()],
                        None, settings)
    lower = hecke_apply(fine, action, restrict_class(cls, coarse, fine, action, settings), g,
                        fine_target_generators, None, settings)
    difference = sub_vectors(upper.representative, lower.representative)
    return lower.modulus.contains(difference), difference


def congruence_check(pair: HeckePair, g: Any, h: Any, settings: type[Config] = Config) -> Dict[str, Any]:
    """
    On a finite pair: every element of Gamma(g)(h) lies in Gamma(g) and Gamma(h).

    Gamma(g)(h) is the kernel of Gamma(g) acting on Gamma h Gamma / Gamma(g).
    """
    if pair.gamma_elements is None:
        raise UnsupportedError("the congruence check enumerates Gamma; use a finite pair")
    u = pair.universe
    gamma_g = [x for x in pair.gamma_elements if gamma_g_contains(pair, g, x, "gamma", settings)]
    keys = {u.key(x) for x in gamma_g}
    inner = pair.with_sigma(lambda x: u.key(x) in keys, len(pair.gamma_elements) // len(gamma_g),
                            _transversal(u, pair.gamma_elements, gamma_g), "Gamma(g)", gamma_g, gamma_g)
    nested = sigma_g_elements(inner, h, settings)
    in_both = all(x in gamma_g and gamma_g_contains(pair, h, x, "gamma", settings) for x in nested)
    return {
        'gamma_g_order': len(gamma_g),
        'nested_order': len(nested),
        'contained_in_intersection': in_both,
    }


def _transversal(u: GroupUniverse, elements: Sequence[Any], subgroup: Sequence[Any]) -> List[Any]:
    """Left coset representatives of `subgroup` in the finite group `elements`."""
    keys = {u.key(x) for x in subgroup}
    reps: List[Any] = []
    for x in elements:
        if not any(u.key(u.multiply(u.invert(r), x)) in keys for r in reps):
            reps.append(x)
    return reps


# ---------------------------
# Hecke algebra
# ---------------------------

def hecke_convolve(a: HeckeAlgebraElement, b: HeckeAlgebraElement, pair: HeckePair,
                   settings: type[Config] = Config) -> HeckeAlgebraElement:
    """
    Convolution (f*h)(x) = sum over y in G/Gamma of f(y) h(y^-1 x) in the double-coset basis.

    For basis elements with Gamma a Gamma = U a_i Gamma and Gamma b Gamma = U b_j Gamma,
    the coefficient of the double coset D is the number of pairs (i, j) with
    a_i b_j Gamma = x Gamma for one fixed x in D; by Gamma-equivariance that
    count equals (pairs landing in D) / |D/Gamma|.
    """
    gamma_pair = pair.with_sigma_gamma()
    u = pair.universe
    result = HeckeAlgebraElement()
    for ka, ca in a.terms.items():
        left_a = enumerate_cosets(gamma_pair, a.reps[ka], LEFT, "gamma", settings).reps
        for kb, cb in b.terms.items():
            left_b = enumerate_cosets(gamma_pair, b.reps[kb], LEFT, "gamma", settings).reps
            landed: Dict[Hashable, int] = {}
            reps: Dict[Hashable, Any] = {}
            for x in left_a:
                for y in left_b:
                    z = u.multiply(x, y)
                    key = double_coset_label(pair, z)
                    landed[key] = landed.get(key, 0) + 1
                    reps.setdefault(key, z)
            for key, count in landed.items():
                size = len(enumerate_cosets(gamma_pair, reps[key], LEFT, "gamma", settings))
                if count % size:
                    raise InputError("coset counts are inconsistent; check the pair's generators",
                                     {'count': count, 'cosets': size})
                term = HeckeAlgebraElement({key: ca * cb * (count // size)}, {key: reps[key]})
                result = result + term
    return result.pruned()


# ---------------------------
# unitary models
# ---------------------------

def _orthogonal_complement(big: Subspace, small: Subspace) -> Subspace:
    """{v in big : <v, w> = 0 for all w in small}."""
    rows = [tuple(x.conjugate() for x in w) for w in small.basis]
    if not rows:
        return big
    return big.intersection(Subspace(big.ambient_dim, nullspace(rows, big.ambient_dim)))


def _project_out(v: Vector, small: Subspace) -> Vector:
    """Orthogonal projection of v onto the complement of `small`."""
    basis = small.basis
    if not basis:
        return v
    gram = tuple(tuple(hermitian_product(w_j, w_i) for w_j in basis) for w_i in basis)
    rhs = tuple(hermitian_product(v, w_i) for w_i in basis)
    coefficients = mat_vec(inverse(gram), rhs)
    for c, w in zip(coefficients, basis):
        v = sub_vectors(v, scale_vector(c, w))
    return v


def _abs(x: ExactScalar) -> float:
    return float(x.norm2()) ** 0.5


def unitary_model_checks(pair: HeckePair, action: GroupAction, g: Any, q: int,
                         settings: type[Config] = Config) -> Dict[str, Any]:
    """
    Norm bound and adjoint identity for T_{Gamma g Gamma} on a finite unitary model.

    The quotient H_q/H_{q-1} is identified with the orthogonal complement of
    H_{q-1} inside H_q (ambient Hermitian product).

    Returns:
        Report with the measured norm, the bound |Gamma g Gamma / Gamma|, the
        adjoint constant and residual, the self-adjointness verdict and a
        `degenerate` flag when the quotient is zero

    Raises:
        UnsupportedError: If the pair is not finite
        PreconditionError: If the action is not unitary on the elements used
    """
    if not pair.is_finite:
        raise UnsupportedError("unitary model checks need a finite pair")
    u = pair.universe
    g_inv = u.invert(g)
    used = list(pair.gamma_elements) + list(enumerate_cosets(pair, g, LEFT, "sigma", settings).reps)
    for x in used:
        if not is_unitary(action.matrix_of(x), settings.UNITARY_TOLERANCE):
            raise PreconditionError("module is not unitary", {'element': u.to_json(x)})

    sigma_module = action.module(pair.sigma_elements, pair.sigma_label)
    h_q = higher_invariants(sigma_module, q, settings)
    h_lower = higher_invariants(sigma_module, q - 1, settings) if q >= 1 else Subspace.zero(action.dim)
    quotient = _orthogonal_complement(h_q, h_lower)

    def operator(element: Any, v: Vector) -> Vector:
        cls = HeckeClass(pair.sigma_label, q, v, h_lower)
        image = hecke_apply(pair, action, cls, element, None, None, settings)
        return _project_out(image.representative, image.modulus)

    basis = list(quotient.basis)
    images = [operator(g, b) for b in basis]
    adjoint_images = [operator(g_inv, b) for b in basis]

    bound = len(enumerate_cosets(pair, g, LEFT, "gamma", settings))
    if basis:
        bm = np.array([[complex(x) for x in b] for b in basis], dtype=complex).T
        ym = np.array([[complex(x) for x in y] for y in images], dtype=complex).T
        _, r = np.linalg.qr(bm)
        norm = float(np.linalg.svd(ym @ np.linalg.inv(r), compute_uv=False)[0])
    else:
        norm = 0.0

    sigma_pair = pair.sigma_as_gamma()
    c = Fraction(len(enumerate_cosets(sigma_pair, g, LEFT, "gamma", settings)),
                 len(enumerate_cosets(sigma_pair, g_inv, LEFT, "gamma", settings)))
    residual = ZERO
    worst = 0.0
    for v, tv in zip(basis, images):
        for w, tw in zip(basis, adjoint_images):
            residual = hermitian_product(tv, w) - ExactScalar(c) * hermitian_product(v, tw)
            worst = max(worst, _abs(residual))

    symmetric = any(pair.gamma_contains(u.multiply(u.invert(h), g_inv))
                    for h in enumerate_cosets(pair, g, LEFT, "gamma", settings).reps)
    self_adjoint = None
    if symmetric:
        self_adjoint = all((hermitian_product(tv, w) - hermitian_product(v, tw)).is_zero()
                           for v, tv in zip(basis, images) for w, tw in zip(basis, images))
    report = {
        'quotient_dim': len(basis),
        'degenerate': not basis,
        'norm': norm,
        'bound': bound,
        'slack': bound - norm,
        'adjoint_constant': str(c),
        'adjoint_residual': worst,
        'symmetric_double_coset': symmetric,
        'self_adjoint': self_adjoint,
    }
    if not basis:
        console.warning(f"H_{q}/H_{q - 1} is zero for {pair.sigma_label}; the norm and adjoint checks are vacuous")
    elif norm <= bound + settings.UNITARY_TOLERANCE and worst <= settings.UNITARY_TOLERANCE:
        console.success(f"unitary model: norm {norm:.6g} <= {bound}, adjoint residual {worst:.3g}")
    else:
        console.warning(f"unitary model check failed: {report}")
    return report


def nonunimodular_example(p: int, g: Any = None, settings: type[Config] = Config) -> Tuple[int, int]:
    """
    Left and right coset counts of Gamma g Gamma in the p-adic affine group,
    Gamma = {(x, y) : v_p(x) >= 0, v_p(y) = 0}, default g = (0, p).
    """
    pair = padic_pair(p)
    g = affine(0, p) if g is None else g
    return unimodular_counts(pair, g, settings)


# ---------------------------
# actions
# ---------------------------

def trivial_action(dim: int) -> GroupAction:
    return GroupAction(dim, lambda _element: identity(dim), f"trivial{dim}")


def permutation_action(n: int) -> GroupAction:
    return GroupAction(n, permutation_matrix, f"perm{n}")


def unipotent_affine_action() -> GroupAction:
    """(x, y) acts on Q^2 by [[y, x], [0, 1]]."""
    return GroupAction(2, lambda e: matrix([[e[1], e[0]], [0, 1]]), "affine2")


# ---------------------------
# pair factories
# ---------------------------

def sl2z_pair(level: int = 1) -> HeckePair:
    """
    Gamma = SL2(Z) inside GL2(Q) with Sigma = Gamma(level) (matrices = I mod level).
    """
    universe = MatrixUniverse()
    gens = tuple(sl2z_generators())
    transversal = tuple(congruence_transversal(level, gens))
    gamma_label = (lambda h, side: (hermite_label(h) if side == LEFT else hermite_label_right(h))
                   if is_integral(h) else None)
    if level == 1:
        return HeckePair(universe, in_sl2z, gens, in_sl2z, 1, transversal, "SL2(Z)", "SL2(Z)",
                         gens, None, None, gamma_label, gamma_label, elementary_divisor_key)
    return HeckePair(universe, in_sl2z, gens, lambda m: in_sl2z(m) and congruent_to_identity(m, level),
                     len(transversal), transversal, "SL2(Z)", f"Gamma({level})", None, None, None,
                     gamma_label, None, elementary_divisor_key)


def padic_pair(p: int) -> HeckePair:
    """
    The p-adic affine example: Gamma = Z_p x| Z_p^x modelled on rationals
    by valuations; generated topologically by (1, 1) and the units (0, u).
    """
    universe = AffineUniverse()

    def contains(e):
        return valuation(e[0], p) >= 0 and valuation(e[1], p) == 0

    gens = tuple([affine(1, 1), affine(0, -1)] + [affine(0, u) for u in range(2, p)])
    return HeckePair(universe, contains, gens, contains, 1, (universe.identity(),),
                     f"Z_{p} x| Z_{p}^x", f"Z_{p} x| Z_{p}^x", gens)


def translation_pair(p: int, modulus: int = 1) -> HeckePair:
    """
    G = Z[1/p] x| p^Z, Gamma = {(x, 1) : x in Z}, Sigma = modulus*Z.

    Gamma is infinite and acts unipotently on Q^2 through the affine action,
    so H_1 is strictly larger than H_0.
    """
    universe = AffineUniverse()

    def in_gamma(e):
        return e[1] == 1 and e[0].denominator == 1

    def in_sigma(e):
        return in_gamma(e) and e[0].numerator % modulus == 0

    transversal = tuple(affine(j, 1) for j in range(modulus))
    return HeckePair(universe, in_gamma, (affine(1, 1),), in_sigma, modulus, transversal,
                     "Z", f"{modulus}Z", (affine(modulus, 1),))


def finite_pair(n: int, gamma_generators: Sequence[Perm], sigma_generators: Optional[Sequence[Perm]] = None,
                label: str = "Gamma", sigma_label: str = "Sigma") -> HeckePair:
    """
    A finite Hecke pair inside S_n: Gamma and a normal Sigma given by generators
    (Sigma = Gamma when omitted). Both are enumerated.
    """
    universe = PermutationUniverse(n)
    gamma = universe.close(list(gamma_generators))
    sigma = gamma if sigma_generators is None else universe.close(list(sigma_generators))
    gamma_keys = {universe.key(x) for x in gamma}
    sigma_keys = {universe.key(x) for x in sigma}
    transversal = _transversal(universe, gamma, sigma)

    def gamma_label(h, side):
        if side == LEFT:
            return min(universe.key(universe.multiply(h, x)) for x in gamma)
        return min(universe.key(universe.multiply(x, h)) for x in gamma)

    def sigma_coset(h, side):
        if side == LEFT:
            return min(universe.key(universe.multiply(h, x)) for x in sigma)
        return min(universe.key(universe.multiply(x, h)) for x in sigma)

    return HeckePair(universe, lambda x: universe.key(x) in gamma_keys, tuple(gamma_generators),
                     lambda x: universe.key(x) in sigma_keys, len(transversal), tuple(transversal),
                     label, sigma_label if sigma_generators is not None else label,
                     tuple(sigma) if sigma_generators is not None else tuple(gamma),
                     tuple(gamma), tuple(sigma), gamma_label, sigma_coset, None)
