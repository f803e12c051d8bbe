"""
Forms Service for hoforms.

Concrete modular-form data in exact arithmetic: Eisenstein series with
Bernoulli normalization, eta products (Delta and the level 11 newform of
weight 2), Fricke duals, and the inner products on forms. The cusp part of
the inner product is the normalized Hermitian sum of zeroth coefficients;
the Petersson part is integrated numerically over the standard fundamental
domain of SL2(Z).
"""
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Union

import mpmath
from sympy import bernoulli, divisor_count, divisor_sigma

from app.exceptions import InputError, UnsupportedError
from config.settings import Config
from utils import console
from utils.exact_linalg import ExactScalar
from utils.special_functions import integer_order_gamma


@dataclass(frozen=True)
class QExpansion:
    """
    q-expansion sum_n a_n q^n of a modular form, exact rational coefficients for 1 <= n <= n_max.
    """
    weight: int
    level: int
    coeffs: Dict[int, Fraction]
    a0: Fraction = Fraction(0)
    label: str = ""
    cusp: bool = True
    metadata: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.cusp and self.a0:
            raise InputError("cusp form with a nonzero constant term", {'label': self.label})
        if any(n < 1 for n in self.coeffs):
            raise InputError("coefficient indices start at 1", {'label': self.label})

    @property
    def n_max(self) -> int:
        return max(self.coeffs) if self.coeffs else 0

    def coefficient(self, n: int) -> Fraction:
        if n == 0:
            return self.a0
        return self.coeffs.get(n, Fraction(0))

    def scaled(self, c: Union[int, Fraction], label: Optional[str] = None) -> 'QExpansion':
        return replace(self, coeffs={n: c * a for n, a in self.coeffs.items()}, a0=c * self.a0,
                       label=label or self.label)

    def truncated(self, n_max: int) -> 'QExpansion':
        return replace(self, coeffs={n: a for n, a in self.coeffs.items() if n <= n_max})


# ---------------------------
# power series helpers
# ---------------------------

def _series_mul(a: Sequence[Fraction], b: Sequence[Fraction], n_max: int) -> List[Fraction]:
    out = [Fraction(0)] * (n_max + 1)
    for i, x in enumerate(a[:n_max + 1]):
        if not x:
            continue
        for j, y in enumerate(b[:n_max + 1 - i]):
            if y:
                out[i + j] += x * y
    return out


def _euler_product(n_max: int, step: int = 1) -> List[Fraction]:
    """prod_{n>=1} (1 - q^{step n}) through the pentagonal number theorem."""
    out = [Fraction(0)] * (n_max + 1)
    out[0] = Fraction(1)
    k = 1
    while step * (k * (3 * k - 1)) // 2 <= n_max:
        sign = Fraction(-1 if k % 2 else 1)
        for m in ((k * (3 * k - 1)) // 2, (k * (3 * k + 1)) // 2):
            if step * m <= n_max:
                out[step * m] = sign
        k += 1
    return out


def _series_power(f: Sequence[Fraction], alpha: int, n_max: int) -> List[Fraction]:
    """
    f^alpha for f_0 = 1 by n g_n = sum_{k=1}^n ((alpha+1) k - n) f_k g_{n-k}.
    """
    g = [Fraction(0)] * (n_max + 1)
    g[0] = Fraction(1)
    for n in range(1, n_max + 1):
        total = Fraction(0)
        for k in range(1, n + 1):
            if f[k]:
                total += ((alpha + 1) * k - n) * f[k] * g[n - k]
        g[n] = total / n
    return g


def eta_product_qexp(exponents: Dict[int, int], n_max: int, weight: Optional[int] = None,
                     level: Optional[int] = None, label: str = "") -> QExpansion:
    """
    q-expansion of prod_m eta(m z)^{e_m}.

    Raises:
        InputError: If sum m e_m is not divisible by 24 (no integral q-expansion)
    """
    shift, rest = divmod(sum(m * e for m, e in exponents.items()), 24)
    if rest:
        raise InputError("eta product is not an integral q-expansion", {'exponents': exponents})
    if shift < 1:
        raise InputError("eta product must vanish at infinity", {'exponents': exponents})
    length = n_max - shift
    series = [Fraction(1)] + [Fraction(0)] * length
    for m, e in sorted(exponents.items()):
        series = _series_mul(series, _series_power(_euler_product(length, m), e, length), length)
    coeffs = {shift + i: c for i, c in enumerate(series) if shift + i <= n_max}
    weight = weight if weight is not None else sum(exponents.values()) // 2
    level = level if level is not None else max(exponents)
    return QExpansion(weight, level, coeffs, Fraction(0), label or "eta" + "".join(
        f"({m})^{e}" for m, e in sorted(exponents.items())), True, {'source': 'eta-product'})


def eisenstein_qexp(k: int, n_max: int) -> QExpansion:
    """
    E_k = 1 - (2k/B_k) sum_n sigma_{k-1}(n) q^n.

    Raises:
        InputError: If k is odd or below 4
    """
    if k < 4 or k % 2:
        raise InputError("Eisenstein series need even k >= 4", {'k': k})
    b = bernoulli(k)
    factor = -Fraction(2 * k) / Fraction(int(b.p), int(b.q))
    coeffs = {n: factor * int(divisor_sigma(n, k - 1)) for n in range(1, n_max + 1)}
    return QExpansion(k, 1, coeffs, Fraction(1), f"E{k}", False, {'source': 'bernoulli'})


def _dense(q: QExpansion, n_max: int) -> List[Fraction]:
    return [q.coefficient(n) for n in range(n_max + 1)]


def delta_qexp(n_max: int) -> QExpansion:
    """Delta = (E4^3 - E6^2) / 1728."""
    if n_max < 1:
        raise InputError("n_max must be >= 1", {'n_max': n_max})
    e4 = _dense(eisenstein_qexp(4, n_max), n_max)
    e6 = _dense(eisenstein_qexp(6, n_max), n_max)
    cube = _series_mul(_series_mul(e4, e4, n_max), e4, n_max)
    square = _series_mul(e6, e6, n_max)
    coeffs = {n: (cube[n] - square[n]) / 1728 for n in range(1, n_max + 1)}
    return QExpansion(12, 1, coeffs, Fraction(0), "Delta", True, {'source': 'E4^3-E6^2'})


def level11_qexp(n_max: int) -> QExpansion:
    """The weight-2 newform eta(z)^2 eta(11z)^2 on Gamma0(11)."""
    form = eta_product_qexp({1: 2, 11: 2}, n_max, 2, 11, "level11")
    return replace(form, metadata={'source': 'eta-product', 'fricke_eigenvalue': -1})


def ramanujan_bound_check(q: QExpansion, epsilon: float = 1e-9) -> Dict[str, Any]:
    """
    Diagnostic: |a_n| <= d(n) n^{(k-1)/2} (1 + epsilon) over the stored range.
    """
    worst = 0.0
    for n, a in q.coeffs.items():
        bound = int(divisor_count(n)) * n ** ((q.weight - 1) / 2)
        worst = max(worst, abs(float(a)) / bound)
    return {'worst_ratio': worst, 'holds': worst <= 1 + epsilon}


# ---------------------------
# duals and inner products
# ---------------------------

def fricke_dual(q: QExpansion, eigenvalue: Union[int, QExpansion, None] = None) -> QExpansion:
    """
    f_hat = f|_k S_w. Level 1 forms are their own dual; otherwise the caller
    asserts a Fricke eigenvalue +-1 or supplies the dual expansion.
    """
    if isinstance(eigenvalue, QExpansion):
        meta = dict(eigenvalue.metadata, dual_of=q.label, provenance='supplied')
        return replace(eigenvalue, metadata=meta)
    if q.level == 1:
        return replace(q, metadata=dict(q.metadata, provenance='level 1: S is in SL2(Z)'))
    if eigenvalue not in (1, -1):
        raise InputError("Fricke duals above level 1 need an eigenvalue +-1 or an explicit expansion",
                         {'level': q.level})
    dual = q.scaled(eigenvalue)
    return replace(dual, metadata=dict(q.metadata, provenance=f'Fricke eigenvalue {eigenvalue}'))


def cusp_inner(d0_f: Sequence[Any], d0_g: Sequence[Any]) -> Any:
    """
    (1/|cusps|) sum_c d0(f, c) conj(d0(g, c)); exact when every entry is exact.

    Raises:
        InputError: If the lists differ in length or are empty
    """
    if len(d0_f) != len(d0_g) or not d0_f:
        raise InputError("zeroth-coefficient lists must be nonempty and of equal length",
                         {'f': len(d0_f), 'g': len(d0_g)})
    if all(isinstance(x, (int, Fraction, ExactScalar)) for x in list(d0_f) + list(d0_g)):
        total = ExactScalar(0)
        for a, b in zip(d0_f, d0_g):
            total = total + ExactScalar.coerce(a) * ExactScalar.coerce(b).conjugate()
        return total / len(d0_f)
    total = mpmath.mpc(0)
    for a, b in zip(d0_f, d0_g):
        total += mpmath.mpmathify(complex(a)) * mpmath.conj(mpmath.mpmathify(complex(b)))
    return total / len(d0_f)


@dataclass
class PeterssonResult:
    value: mpmath.mpc
    method_delta: float
    terms: int

    def to_dict(self) -> Dict[str, Any]:
        return {'value': [float(self.value.real), float(self.value.imag)],
                'method_delta': self.method_delta, 'terms': self.terms}


def _petersson_integral(f: QExpansion, g: QExpansion, k: int, terms: int, method: str,
                        settings: type[Config] = Config) -> mpmath.mpc:
    """
    int_{-1/2}^{1/2} int_{sqrt(1-x^2)}^inf f conj(g) y^{k-2} dy dx, the inner
    integral in closed form:
    sum_{n,m} a_n conj(b_m) e^{2 pi i (n-m) x} (2 pi (n+m))^{1-k} Gamma(k-1, 2 pi (n+m) sqrt(1-x^2)).
    """
    a = {n: mpmath.mpf(c.numerator) / c.denominator for n, c in f.coeffs.items() if n <= terms and c}
    b = {m: mpmath.mpf(c.numerator) / c.denominator for m, c in g.coeffs.items() if m <= terms and c}

    def integrand(x):
        height = mpmath.sqrt(1 - x * x)
        total = mpmath.mpc(0)
        for n, an in a.items():
            for m, bm in b.items():
                rate = 2 * mpmath.pi * (n + m)
                total += an * bm * mpmath.expjpi(2 * (n - m) * x) * rate ** (1 - k) \
                    * integer_order_gamma(k - 1, rate * height)
        return total

    return mpmath.quad(integrand, [-0.5, 0, 0.5], method=method, maxdegree=settings.QUAD_MAXDEGREE)


def petersson_numeric(f: QExpansion, g: QExpansion, k: Optional[int] = None, terms: Optional[int] = None,
                      settings: type[Config] = Config) -> PeterssonResult:
    """
    Petersson inner product at level 1, normalized by vol = pi/3.

    The outer integral is computed with tanh-sinh and with Gauss-Legendre
    quadrature; their difference is reported as method_delta.

    Raises:
        UnsupportedError: Above level 1
        InputError: If either form has a constant term
    """
    if f.level != 1 or g.level != 1:
        raise UnsupportedError("Petersson integration is implemented for level 1 only",
                               {'levels': [f.level, g.level]})
    if f.a0 or g.a0:
        raise InputError("Petersson integration needs cusp forms")
    k = k if k is not None else f.weight
    terms = terms if terms is not None else min(f.n_max, g.n_max, 12)
    value = _petersson_integral(f, g, k, terms, 'tanh-sinh', settings)
    check = _petersson_integral(f, g, k, terms, 'gauss-legendre', settings)
    volume = mpmath.pi / 3
    delta = float(abs(value - check) / volume)
    if delta > 1e-6 * max(float(abs(value / volume)), 1e-300):
        console.warning(f"Petersson quadrature methods disagree by {delta:.3g}")
    return PeterssonResult(value / volume, delta, terms)


def cusp_projection(f: QExpansion) -> QExpansion:
    """
    P(f) = f - a0(f) E_k at level 1 and k >= 4.

    Raises:
        UnsupportedError: Outside level 1 or for k < 4
    """
    if f.level != 1 or f.weight < 4:
        raise UnsupportedError("cusp projection is available at level 1 with k >= 4",
                               {'level': f.level, 'weight': f.weight})
    if not f.a0:
        return f
    eisenstein = eisenstein_qexp(f.weight, f.n_max)
    coeffs = {n: f.coefficient(n) - f.a0 * eisenstein.coefficient(n) for n in range(1, f.n_max + 1)}
    return QExpansion(f.weight, 1, coeffs, Fraction(0), f"P({f.label})", True, {'projected_from': f.label})


def canonical_inner(f: QExpansion, g: QExpansion, settings: type[Config] = Config) -> Dict[str, Any]:
    """<f, g> = <f, g>_cusp + <P f, P g>_Pet at level 1; the single cusp has d0 = a0."""
    cusp_part = cusp_inner([f.a0], [g.a0])
    pf, pg = cusp_projection(f), cusp_projection(g)
    if not any(pf.coeffs.values()) or not any(pg.coeffs.values()):
        pet = mpmath.mpc(0)
    else:
        pet = petersson_numeric(pf, pg, f.weight, settings=settings).value
    total = complex(cusp_part) + complex(pet)
    return {'cusp': str(cusp_part), 'petersson': [float(pet.real), float(pet.imag)],
            'value': [total.real, total.imag]}
