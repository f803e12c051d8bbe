"""
Fourier-Taylor Series Service for hoforms.

A Fourier-Taylor series is a truncated sum over frequencies n of
e^{2 pi i n z} (a_{n,0} + a_{n,1} z + ... + a_{n,q} z^q). This service holds
the exact coefficient algebra on such series (the difference operator
f(z+1) - f(z), its antidifference, the second-order product of two q-series)
together with the numerical side: evaluation with a tail bound, the weight-k
slash action of SL2(R), the zeroth coefficient at a cusp and the lift to a
function on the group.
"""
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from app.exceptions import DomainError, InputError
from config.settings import Config
from utils import console
from utils.exact_linalg import ZERO, ExactScalar
from utils.special_functions import geometric_tail_bound

Coefficient = Any  # ExactScalar on the exact path, complex on the floating path


def coerce_coefficient(value: Any) -> Coefficient:
    """
    Normalize one coefficient: exact literals become ExactScalar, floats stay floating.

    Raises:
        InputError: If a string is not an exact rational or decimal literal
    """
    if isinstance(value, ExactScalar):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return ExactScalar(value)
    if isinstance(value, (str, list, tuple)):
        try:
            return ExactScalar.parse(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"coefficient is not an exact rational: {value!r}") from exc
    if isinstance(value, (float, complex, mpmath.mpf, mpmath.mpc)):
        return complex(value)
    raise InputError(f"unsupported coefficient type {type(value).__name__}")


def to_mp(value: Coefficient) -> mpmath.mpc:
    if isinstance(value, ExactScalar):
        return value.to_mpc()
    return mpmath.mpc(value)


@dataclass(frozen=True)
class FTSeries:
    """
    Truncated Fourier-Taylor expansion on the full rectangle n_min..n_max x 0..order.

    Coefficients are either all exact (ExactScalar) or all floating (complex).
    """
    order: int
    n_min: int
    n_max: int
    coeffs: Dict[int, Tuple[Coefficient, ...]]
    weight: Optional[int] = None
    label: str = ""
    exact: bool = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, 'exact', all(isinstance(c, ExactScalar)
                                              for row in self.coeffs.values() for c in row))
        if self.order < 0:
            raise InputError("order must be >= 0", {'order': self.order})
        if self.n_max < self.n_min:
            raise InputError("empty frequency range", {'n_min': self.n_min, 'n_max': self.n_max})
        for n in range(self.n_min, self.n_max + 1):
            row = self.coeffs.get(n)
            if row is None or len(row) != self.order + 1:
                raise InputError("coefficients must cover the declared rectangle", {'n': n})

    @classmethod
    def build(cls, order: int, n_min: int, n_max: int, entries: Optional[Dict[Tuple[int, int], Any]] = None,
              weight: Optional[int] = None, label: str = "") -> 'FTSeries':
        """
        Build from sparse entries {(n, j): value}; unset cells are zero.
        """
        entries = {key: coerce_coefficient(v) for key, v in (entries or {}).items()}
        floating = any(not isinstance(v, ExactScalar) for v in entries.values())
        zero = 0j if floating else ZERO
        coeffs = {}
        for n in range(n_min, n_max + 1):
            row = []
            for j in range(order + 1):
                value = entries.get((n, j), zero)
                row.append(complex(value) if floating else value)
            coeffs[n] = tuple(row)
        for (n, j) in entries:
            if not (n_min <= n <= n_max and 0 <= j <= order):
                raise InputError("entry outside the declared rectangle", {'n': n, 'j': j})
        return cls(order, n_min, n_max, coeffs, weight, label)

    @classmethod
    def zero(cls, order: int = 0, n_min: int = 1, n_max: int = 1) -> 'FTSeries':
        return cls.build(order, n_min, n_max)

    @property
    def is_exact(self) -> bool:
        return self.exact

    @property
    def is_cuspidal(self) -> bool:
        return self.n_min >= 1

    def coefficient(self, n: int, j: int) -> Coefficient:
        if self.n_min <= n <= self.n_max and 0 <= j <= self.order:
            return self.coeffs[n][j]
        return ZERO if self.is_exact else 0j

    def column(self, j: int) -> Dict[int, Coefficient]:
        return {n: self.coefficient(n, j) for n in range(self.n_min, self.n_max + 1)}

    def is_zero(self) -> bool:
        return all(not c for row in self.coeffs.values() for c in row)

    def scaled(self, c: Any) -> 'FTSeries':
        c = coerce_coefficient(c)
        coeffs = {n: tuple(c * x for x in row) for n, row in self.coeffs.items()}
        return FTSeries(self.order, self.n_min, self.n_max, coeffs, self.weight, self.label)

    def truncated(self, n_max: int) -> 'FTSeries':
        n_max = max(self.n_min, min(n_max, self.n_max))
        coeffs = {n: self.coeffs[n] for n in range(self.n_min, n_max + 1)}
        return FTSeries(self.order, self.n_min, n_max, coeffs, self.weight, self.label)

    def to_dict(self) -> Dict[str, Any]:
        def text(c):
            if isinstance(c, ExactScalar):
                return str(c.re) if not c.im else c.to_json()
            return [repr(c.real), repr(c.imag)]
        result = {
            'q': self.order,
            'n_min': self.n_min,
            'n_max': self.n_max,
            'coeffs': {str(n): [text(c) for c in row] for n, row in sorted(self.coeffs.items())},
        }
        if self.weight is not None:
            result['weight'] = self.weight
        if self.label:
            result['label'] = self.label
        return result


def add_series(f: FTSeries, g: FTSeries) -> FTSeries:
    """Coefficient-wise sum on the union rectangle."""
    order = max(f.order, g.order)
    n_min, n_max = min(f.n_min, g.n_min), max(f.n_max, g.n_max)
    entries = {}
    for n in range(n_min, n_max + 1):
        for j in range(order + 1):
            entries[(n, j)] = f.coefficient(n, j) + g.coefficient(n, j)
    return FTSeries.build(order, n_min, n_max, entries, f.weight, f.label)


# ---------------------------
# growth and evaluation
# ---------------------------

def growth_exponent(f: FTSeries, j: int = 0, settings: type[Config] = Config) -> Tuple[float, float]:
    """
    Fit |a_{n,j}| <= C n^alpha on the declared range.

    The exponent comes from a least-squares line through (log n, log|a_{n,j}|);
    C is then raised until the bound holds on every observed coefficient.

    Returns:
        (C, alpha); (0, 0) for an empty column
    """
    points = [(n, abs(complex(c))) for n, c in f.column(j).items() if n >= 1 and c]
    if not points:
        return 0.0, 0.0
    if len(points) < 3:
        alpha = settings.GROWTH_EXPONENT
    else:
        logs_n = np.log([n for n, _ in points])
        logs_a = np.log([a for _, a in points])
        alpha = max(float(np.polyfit(logs_n, logs_a, 1)[0]), 0.0)
    amplitude = max(a / n ** alpha for n, a in points)
    return float(amplitude), alpha


@dataclass
class EvalResult:
    value: mpmath.mpc
    tail_bound: float
    status: str = "ok"

    def to_dict(self) -> Dict[str, Any]:
        return {'value': [float(self.value.real), float(self.value.imag)], 'tail_bound': self.tail_bound,
                'status': self.status}


def series_value(f: FTSeries, z: Any) -> mpmath.mpc:
    """
    Partial sum of f at z, without the tail estimate.

    Raises:
        DomainError: If Im z <= 0
    """
    z = mpmath.mpc(z)
    if z.imag <= 0:
        raise DomainError("evaluation needs Im z > 0", {'z': str(z)})
    total = mpmath.mpc(0)
    q = mpmath.exp(2j * mpmath.pi * z)
    qn = q ** f.n_min
    for n in range(f.n_min, f.n_max + 1):
        poly = mpmath.mpc(0)
        for j in reversed(range(f.order + 1)):
            poly = poly * z + to_mp(f.coeffs[n][j])
        if poly:
            total += qn * poly
        qn *= q
    return total


def evaluate(f: FTSeries, z: Any, settings: type[Config] = Config) -> EvalResult:
    """
    Partial sum of f at z with a tail bound for the frequencies past n_max.

    Args:
        f: The series
        z: Point of the upper half plane
        settings: Configuration class (TAIL_TOLERANCE)

    Returns:
        EvalResult with the value and the bound from a geometric majorant

    Raises:
        DomainError: If Im z <= 0
    """
    z = mpmath.mpc(z)
    total = series_value(f, z)
    tail = 0.0
    for j in range(f.order + 1):
        amplitude, alpha = growth_exponent(f, j, settings)
        if amplitude:
            tail += geometric_tail_bound(f.n_max + 1, amplitude, alpha, 2 * float(mpmath.pi) * float(z.imag)) \
                * float(abs(z)) ** j
    status = "ok" if tail <= settings.TAIL_TOLERANCE else "warning"
    return EvalResult(total, tail, status)


def to_function(f: FTSeries) -> Callable[[Any], mpmath.mpc]:
    """The series as a callable z -> f(z) (partial sum)."""
    return lambda z: series_value(f, z)


# ---------------------------
# difference operator
# ---------------------------

def delta(f: FTSeries) -> FTSeries:
    """
    (delta f)(z) = f(z+1) - f(z).

    e^{2 pi i n (z+1)} = e^{2 pi i n z}, so only the polynomial parts change:
    the new coefficient of z^k is sum_{j>k} C(j, k) a_{n,j}. The order drops
    by one; order-0 series map to zero.
    """
    exact = f.is_exact
    zero = ZERO if exact else 0j
    order = max(f.order - 1, 0)
    coeffs = {}
    for n, row in f.coeffs.items():
        new_row = []
        for k in range(order + 1):
            value = zero
            for j in range(k + 1, f.order + 1):
                value = value + comb(j, k) * row[j]
            new_row.append(value)
        coeffs[n] = tuple(new_row)
    return FTSeries(order, f.n_min, f.n_max, coeffs, f.weight, f.label)


def solve_delta(h: FTSeries, v0_part: Optional[FTSeries] = None) -> FTSeries:
    """
    The unique g of order q+1 with delta(g) = h whose order-0 part is v0_part.

    a_{n,k} = sum_{j=k+1}^{q+1} C(j, k) b_{n,j} is solved from the top:
    b_{n,q+1} = a_{n,q}/(q+1), then descending k. The n = 0 column is an
    ordinary polynomial antidifference and follows the same recursion.

    Args:
        h: Series of order q
        v0_part: Periodic part (order 0); zero when omitted

    Returns:
        Series of order q+1
    """
    v0_part = v0_part or FTSeries.zero(0, h.n_min, h.n_min)
    if v0_part.order != 0:
        raise InputError("the periodic part must have order 0", {'order': v0_part.order})
    exact = h.is_exact and v0_part.is_exact
    zero = ZERO if exact else 0j
    q = h.order
    n_min, n_max = min(h.n_min, v0_part.n_min), max(h.n_max, v0_part.n_max)
    coeffs = {}
    for n in range(n_min, n_max + 1):
        b = [zero] * (q + 2)
        for k in range(q, -1, -1):
            rest = h.coefficient(n, k)
            for j in range(k + 2, q + 2):
                rest = rest - comb(j, k) * b[j]
            b[k + 1] = rest / (k + 1)
        b[0] = v0_part.coefficient(n, 0) + zero
        if not exact:
            b = [complex(x) for x in b]
        coeffs[n] = tuple(b)
    return FTSeries(q + 1, n_min, n_max, coeffs, h.weight, h.label)


def second_order_product(f: FTSeries, g: FTSeries, analytic: bool = False) -> FTSeries:
    """
    Coefficients c_n = sum_{j=1}^{n-1} a_{n-j} b_j / j of the second-order form built from f and g.

    With analytic=True each term is further divided by 2 pi i, the factor that
    termwise integration of g produces; the result is then floating.
    The output keeps only frequencies fully determined by the truncations.

    Raises:
        InputError: If either input has order > 0 or a constant term
    """
    if f.order or g.order:
        raise InputError("second_order_product takes order-0 series")
    if not (f.is_cuspidal and g.is_cuspidal):
        raise InputError("second_order_product needs n_min >= 1 on both inputs")
    exact = f.is_exact and g.is_exact and not analytic
    n_max = min(f.n_max, g.n_max) + 1
    entries: Dict[Tuple[int, int], Any] = {}
    scale = 1 / (2j * float(mpmath.pi)) if analytic else None
    for n in range(1, n_max + 1):
        total = ZERO if exact else 0j
        for j in range(1, n):
            a, b = f.coefficient(n - j, 0), g.coefficient(j, 0)
            if not a or not b:
                continue
            if exact:
                total = total + a * b / j
            else:
                total += complex(a) * complex(b) / j
        if scale is not None:
            total *= scale
        entries[(n, 0)] = total
    return FTSeries.build(0, 1, n_max, entries, None, f"{f.label}#{g.label}")


# ---------------------------
# group points and slash action
# ---------------------------

@dataclass(frozen=True)
class GroupPoint:
    """Element (a b; c d) of SL2(R)."""
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        if abs(self.a * self.d - self.b * self.c - 1) >= 1e-12:
            raise InputError("group point must have determinant 1",
                             {'det': self.a * self.d - self.b * self.c})

    @classmethod
    def identity(cls) -> 'GroupPoint':
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def random(cls, rng: random.Random, spread: float = 1.0) -> 'GroupPoint':
        """Product of a rotation, a diagonal and a unipotent element with random parameters."""
        theta = rng.uniform(0, 2 * np.pi)
        t = rng.uniform(-spread, spread)
        lam = np.exp(rng.uniform(-spread, spread) / 2)
        rotation = cls(np.cos(theta), -np.sin(theta), np.sin(theta), np.cos(theta))
        return cls(1.0, t, 0.0, 1.0) @ cls(lam, 0.0, 0.0, 1 / lam) @ rotation

    def __matmul__(self, other: 'GroupPoint') -> 'GroupPoint':
        return GroupPoint(self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d,
                          self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d)

    def inverse(self) -> 'GroupPoint':
        return GroupPoint(self.d, -self.b, -self.c, self.a)

    def act(self, z: Any) -> mpmath.mpc:
        z = mpmath.mpc(z)
        denominator = self.c * z + self.d
        if denominator == 0:
            raise DomainError("cz + d = 0", {'z': str(z)})
        return (self.a * z + self.b) / denominator

    def to_list(self) -> List[List[float]]:
        return [[self.a, self.b], [self.c, self.d]]


def slash(f: Callable[[Any], Any], gamma: GroupPoint, k: int, z: Any) -> mpmath.mpc:
    """
    (f|_k gamma)(z) = (cz + d)^{-k} f(gamma z).

    Raises:
        DomainError: If Im z <= 0 or cz + d = 0
    """
    z = mpmath.mpc(z)
    if z.imag <= 0:
        raise DomainError("slash needs Im z > 0", {'z': str(z)})
    j = gamma.c * z + gamma.d
    if j == 0:
        raise DomainError("cz + d = 0", {'z': str(z)})
    return j ** (-k) * f(gamma.act(z))


def slashed(f: Callable[[Any], Any], gamma: GroupPoint, k: int) -> Callable[[Any], mpmath.mpc]:
    """f|_k gamma as a callable."""
    return lambda z: slash(f, gamma, k, z)


def iwasawa_k(g: GroupPoint) -> GroupPoint:
    """Rotation part of g: (1/sqrt(c^2 + d^2)) (d -c; c d)."""
    r = float(np.hypot(g.c, g.d))
    return GroupPoint(g.d / r, -g.c / r, g.c / r, g.d / r)


def psi_lift(f: Callable[[Any], Any], k: int, g: GroupPoint) -> mpmath.mpc:
    """
    psi_f(g) = Im(g i)^{k/2} eps_k(k(g)) f(g i) with eps_k((a -b; b a)) = (a + ib)^{-k}.
    """
    w = g.act(1j)
    rotation = iwasawa_k(g)
    epsilon = mpmath.mpc(rotation.a, rotation.c) ** (-k)
    return w.imag ** (mpmath.mpf(k) / 2) * epsilon * f(w)


def psi_equivariance_residual(f: Callable[[Any], Any], k: int, gamma: GroupPoint, x: GroupPoint) -> float:
    """|psi_f(gamma x) - psi_{f|gamma}(x)|."""
    return float(abs(psi_lift(f, k, gamma @ x) - psi_lift(slashed(f, gamma, k), k, x)))


# ---------------------------
# zeroth coefficient at a cusp
# ---------------------------

@dataclass
class DzeroResult:
    value: mpmath.mpc
    residual: float
    points: int
    status: str = "ok"

    def to_dict(self) -> Dict[str, Any]:
        return {'value': [float(self.value.real), float(self.value.imag)], 'residual': self.residual,
                'points': self.points, 'status': self.status}


def dzero_at_cusp(f: Callable[[Any], Any], sigma_c: GroupPoint, period: float, y: float, k: int,
                  tolerance: Optional[float] = None, settings: type[Config] = Config) -> DzeroResult:
    """
    Zeroth coefficient (1/period) int_0^period (f|_k sigma_c)(t + iy) dt.

    The trapezoid rule on a full period is spectrally accurate for periodic
    integrands; the point count doubles until two successive sums agree.
    Non-convergence is reported through the residual and a warning status.
    """
    if period <= 0:
        raise InputError("period must be positive", {'period': period})
    tolerance = tolerance if tolerance is not None else settings.DEFAULT_TOLERANCE
    g = slashed(f, sigma_c, k)

    def trapezoid(points: int) -> mpmath.mpc:
        h = mpmath.mpf(period) / points
        return sum((g(mpmath.mpc(i * h, y)) for i in range(points)), mpmath.mpc(0)) / points

    points = settings.TRAPEZOID_POINTS
    value = trapezoid(points)
    residual = float('inf')
    for _ in range(settings.TRAPEZOID_DOUBLINGS):
        points *= 2
        refined = trapezoid(points)
        residual = float(abs(refined - value))
        value = refined
        if residual <= tolerance:
            break
    status = "ok" if residual <= tolerance else "warning"
    if status != "ok":
        console.warning(f"d0 trapezoid residual {residual:.3g} above {tolerance:.3g}")
    return DzeroResult(value, residual, points, status)


# ---------------------------
# uniqueness and decay
# ---------------------------

def interpolation_grid(f: FTSeries, height: float = 0.1) -> List[complex]:
    """
    (q+2) * (frequency count) points z = m/M + r + i*height; integer shifts r
    separate the polynomial degrees, fractional offsets the frequencies.
    """
    count = f.n_max - f.n_min + 1
    return [complex(m / count + r, height) for r in range(f.order + 2) for m in range(count)]


def interpolation_check(f: FTSeries, grid: Optional[Sequence[complex]] = None,
                        settings: type[Config] = Config) -> Dict[str, Any]:
    """
    Recover the coefficients of f from its values on a grid by least squares
    in the basis e^{2 pi i n z} z^j, and report the largest coefficient error.
    """
    grid = list(grid) if grid is not None else interpolation_grid(f)
    basis = [(n, j) for n in range(f.n_min, f.n_max + 1) for j in range(f.order + 1)]
    if len(grid) < len(basis):
        raise InputError("grid too small for the coefficient rectangle",
                         {'points': len(grid), 'unknowns': len(basis)})
    system = np.array([[np.exp(2j * np.pi * n * z) * z ** j for (n, j) in basis] for z in grid], dtype=complex)
    values = np.array([complex(evaluate(f, z, settings).value) for z in grid], dtype=complex)
    solution = np.linalg.lstsq(system, values, rcond=None)[0]
    expected = np.array([complex(f.coefficient(n, j)) for (n, j) in basis], dtype=complex)
    return {
        'unknowns': len(basis),
        'points': len(grid),
        'max_coefficient_error': float(np.max(np.abs(solution - expected))) if basis else 0.0,
        'condition': float(np.linalg.cond(system)),
    }


def coefficient_decay(f: FTSeries, j: int, y: float, window: int = 5) -> bool:
    """True when |a_{n,j}| e^{-2 pi n y} decreases over the last `window` frequencies."""
    tail = [abs(complex(f.coefficient(n, j))) * np.exp(-2 * np.pi * n * y)
            for n in range(max(f.n_min, f.n_max - window), f.n_max + 1)]
    return all(b <= a for a, b in zip(tail, tail[1:]))


def from_qexpansion(qexp: Any) -> FTSeries:
    """Order-0 series from a QExpansion; the constant term is kept only when nonzero."""
    n_min = 0 if qexp.a0 else 1
    entries = {(n, 0): c for n, c in qexp.coeffs.items() if n >= n_min}
    if n_min == 0:
        entries[(0, 0)] = qexp.a0
    return FTSeries.build(0, n_min, qexp.n_max, entries, qexp.weight, qexp.label)


def random_series(rng: random.Random, order: int, n_min: int, n_max: int, height: int = 9) -> FTSeries:
    """Exact series with small random rational coefficients."""
    entries = {(n, j): Fraction(rng.randint(-height, height), rng.randint(1, height))
               for n in range(n_min, n_max + 1) for j in range(order + 1)}
    return FTSeries.build(order, n_min, n_max, entries)
