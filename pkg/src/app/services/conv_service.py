"""
Convolution Service for hoforms.

Evaluates the convolution L-function of two cusp forms f (weight k) and g
(weight l),

    (L_f # L_g)(s, t) = sum_n n^{-s} sum_{j<n} a_{n-j} b_j j^{-t},

its two-variable Mellin transform

    Lambda_{f,g}(s, t) = int_0^inf f(ix) int_0^inf g(ix+iy) y^{t-1} dy x^{s-1} dx
                       = Gamma(t) (2 pi)^{-t} K(s, t),
    K(s, t) = int_0^inf f(ix) g_t(x) x^{s-1} dx,   g_t(x) = sum_m b_m m^{-t} e^{-2 pi m x},

and the one-variable transform Lambda_{f,g}(s) built from (y-x)^{l-2}.
K is entire in t: the part above 1/sqrt(w) is a sum of incomplete gamma
values and the part below is moved to [1/sqrt(w), inf) with the dual form,
so the only poles of Lambda_{f,g}(s, t) are those of Gamma(t).
"""
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import mpmath
from sympy import Rational, binomial, expand, factorial, symbols

from app.exceptions import DomainError, InputError, NumericError
from app.services.ft_series_service import FTSeries, growth_exponent, series_value, to_mp
from app.services.lfun_service import LFunctionJob, completed_lambda
from config.settings import Config
from utils import console
from utils.special_functions import checked_quad, continued_gamma, integer_gamma_ladder, upper_incomplete_gamma

SERIES = "series"
CONTINUED = "continued"


@dataclass(frozen=True)
class ConvolutionJob:
    """
    Cusp forms f (weight k) and g (weight l) with their duals and the common width.
    """
    f: FTSeries
    f_hat: FTSeries
    g: FTSeries
    g_hat: FTSeries
    k: int
    l: int
    w: Any = 1
    truncation: Optional[int] = None
    label: str = "conv"

    def __post_init__(self) -> None:
        for name in ('f', 'f_hat', 'g', 'g_hat'):
            series = getattr(self, name)
            if not series.is_cuspidal:
                raise InputError(f"{name} must start at n >= 1")
            if series.order:
                raise InputError(f"{name} must be an order-0 cusp form")
        if mpmath.mpf(self.w) <= 0:
            raise InputError("width must be positive", {'w': str(self.w)})

    def dual(self) -> 'ConvolutionJob':
        return replace(self, f=self.f_hat, f_hat=self.f, g=self.g_hat, g_hat=self.g, label=f"{self.label}^")

    def f_job(self) -> LFunctionJob:
        return LFunctionJob(self.f, self.f_hat, self.k, self.w, self.truncation, f"{self.label}:f")

    def g_job(self) -> LFunctionJob:
        return LFunctionJob(self.g, self.g_hat, self.l, self.w, self.truncation, f"{self.label}:g")

    def scaled_f(self, c: Any) -> 'ConvolutionJob':
        return replace(self, f=self.f.scaled(c), f_hat=self.f_hat.scaled(c))

    @property
    def cutoff(self) -> mpmath.mpf:
        return 1 / mpmath.sqrt(mpmath.mpf(self.w))

    def sign_f(self) -> int:
        return 1 if self.k % 4 == 0 else -1


@dataclass
class ConvValue:
    value: Optional[mpmath.mpc]
    tail_bound: float = 0.0
    method: str = SERIES
    status: str = "ok"
    residue: Optional[mpmath.mpc] = None
    extras: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        def pair(z):
            return None if z is None else [float(z.real), float(z.imag)]
        result = {'value': pair(self.value), 'tail_bound': self.tail_bound, 'method': self.method,
                  'status': self.status}
        if self.residue is not None:
            result['residue'] = pair(self.residue)
        result.update(self.extras)
        return result


def _mp_coeffs(series: FTSeries, truncation: Optional[int]) -> List[Tuple[int, mpmath.mpc]]:
    top = series.n_max if truncation is None else min(series.n_max, truncation)
    return [(n, to_mp(series.coeffs[n][0])) for n in range(series.n_min, top + 1) if series.coeffs[n][0]]


# ---------------------------
# double Dirichlet series
# ---------------------------

def conv_series(job: ConvolutionJob, s: Any, t: Any, N: Optional[int] = None,
                settings: type[Config] = Config) -> ConvValue:
    """
    Truncated double sum over n <= N (ascending) and j < n (ascending).

    The default N = n_max(f) + n_max(g) covers every available pair of
    coefficients. The tail bound uses |a_n| <= C_f n^alpha, |b_j| <= C_g j^beta.
    """
    s, t = mpmath.mpc(s), mpmath.mpc(t)
    N = N if N is not None else job.f.n_max + job.g.n_max
    a = {n: c for n, c in _mp_coeffs(job.f, job.truncation)}
    b = {m: c for m, c in _mp_coeffs(job.g, job.truncation)}
    total = mpmath.mpc(0)
    for n in range(2, N + 1):
        inner = mpmath.mpc(0)
        for j in range(1, n):
            if (n - j) in a and j in b:
                inner += a[n - j] * b[j] * mpmath.power(j, -t)
        if inner:
            total += inner * mpmath.power(n, -s)
    cf, alpha = growth_exponent(job.f, 0, settings)
    cg, beta = growth_exponent(job.g, 0, settings)
    gamma = alpha + max(beta - float(t.real), -1.0) + 1
    excess = float(s.real) - gamma - 1
    if not (cf and cg):
        tail = 0.0
    elif excess <= 0:
        tail = float('inf')
    else:
        tail = float(cf * cg * mpmath.power(N, -excess) / excess)
    status = "ok" if tail <= settings.TAIL_TOLERANCE else "warning"
    return ConvValue(total, tail, SERIES, status)


# ---------------------------
# K(s, t) and the two-variable transform
# ---------------------------

def _g_t(b: Sequence[Tuple[int, mpmath.mpc]], t: mpmath.mpc, x: mpmath.mpf) -> mpmath.mpc:
    total = mpmath.mpc(0)
    for m, bm in b:
        total += bm * mpmath.power(m, -t) * mpmath.exp(-2 * mpmath.pi * m * x)
    return total


def mellin_kernel(job: ConvolutionJob, s: Any, t: Any, settings: type[Config] = Config,
                  tolerance: float = 1e-12) -> mpmath.mpc:
    """
    K(s, t) = int_0^inf f(ix) g_t(x) x^{s-1} dx, entire in s and t.

    Above X = 1/sqrt(w): sum_N c_N(t) (2 pi N)^{-s} Gamma(s, 2 pi N X) with
    c_N(t) = sum_{m<N} a_{N-m} b_m m^{-t}. Below X, x = 1/(wu) turns the
    integral into i^k w^{k/2-s} int_X^inf f_hat(iu) u^{k-s-1} g_t(1/(wu)) du.
    """
    s, t = mpmath.mpc(s), mpmath.mpc(t)
    X = job.cutoff
    a = dict(_mp_coeffs(job.f, job.truncation))
    b = _mp_coeffs(job.g, job.truncation)
    high = mpmath.mpc(0)
    for N in range(2, job.f.n_max + job.g.n_max + 1):
        c = mpmath.mpc(0)
        for m, bm in b:
            if m < N and (N - m) in a:
                c += a[N - m] * bm * mpmath.power(m, -t)
        if c:
            rate = 2 * mpmath.pi * N
            high += c * mpmath.power(rate, -s) * upper_incomplete_gamma(s, rate * X, settings)

    w = mpmath.mpf(job.w)

    def integrand(u):
        return series_value(job.f_hat, mpmath.mpc(0, u)) * mpmath.power(u, job.k - s - 1) * _g_t(b, t, 1 / (w * u))

    low, _ = checked_quad(integrand, [X, X + 1, X + 3, mpmath.inf], tolerance, settings)
    return high + job.sign_f() * mpmath.power(w, mpmath.mpf(job.k) / 2 - s) * low


def _is_pole(t: mpmath.mpc) -> bool:
    return t.imag == 0 and t.real <= 0 and t.real == mpmath.floor(t.real)


def lambda2(job: ConvolutionJob, s: Any, t: Any, method: Optional[str] = None,
            settings: type[Config] = Config) -> ConvValue:
    """
    Lambda_{f,g}(s, t).

    Args:
        job: The convolution job
        s, t: Complex arguments
        method: "series" for the termwise double sum
                sum a_n b_m Gamma(s) (2 pi (n+m))^{-s} Gamma(t) (2 pi m)^{-t} (Re t > 0),
                "continued" for Gamma(t) (2 pi)^{-t} K(s, t); default picks
                series for Re t > 0 and continued otherwise
        settings: Configuration class (CONTINUATION_DEPTH)

    Returns:
        ConvValue; at t = 0, -1, ... the status is "pole" with the residue
        (2 pi)^m K(s, -m) (-1)^m / m!
    """
    s, t = mpmath.mpc(s), mpmath.mpc(t)
    method = method or (SERIES if t.real > 0 else CONTINUED)
    if method == SERIES:
        if t.real <= 0:
            raise DomainError("the termwise series needs Re t > 0; use the continued method", {'t': str(t)})
        a = _mp_coeffs(job.f, job.truncation)
        b = _mp_coeffs(job.g, job.truncation)
        gamma_s, gamma_t = mpmath.gamma(s), mpmath.gamma(t)
        total = mpmath.mpc(0)
        for n, an in a:
            for m, bm in b:
                total += an * bm * mpmath.power(2 * mpmath.pi * (n + m), -s) * mpmath.power(2 * mpmath.pi * m, -t)
        return ConvValue(gamma_s * gamma_t * total, 0.0, SERIES)
    if method != CONTINUED:
        raise InputError(f"unknown method {method!r}")
    depth = settings.CONTINUATION_DEPTH
    if t.real <= -depth:
        raise DomainError(f"continuation reaches Re t > -{depth} only", {'t': str(t), 'depth': depth})
    kernel = mellin_kernel(job, s, t, settings)
    if _is_pole(t):
        m = int(-t.real)
        residue = mpmath.power(2 * mpmath.pi, m) * kernel * (-1) ** m / mpmath.factorial(m)
        console.warning(f"Lambda(s, t) has a pole at t = {-m}; residue reported")
        return ConvValue(None, 0.0, CONTINUED, "pole", residue)
    value = continued_gamma(t, depth) * mpmath.power(2 * mpmath.pi, -t) * kernel
    return ConvValue(value, 0.0, CONTINUED)


def conv_entire(job: ConvolutionJob, s: Any, t: Any, check_limit: bool = False,
                tolerance: Optional[float] = None, settings: type[Config] = Config) -> ConvValue:
    """
    Entire continuation (2 pi)^{s+t} Lambda(s, t) / (Gamma(s) Gamma(t)) = (2 pi)^s K(s, t) / Gamma(s).

    The Gamma(t) factor cancels analytically, so t = 0, -1, ... need no
    special treatment. With check_limit the value at a pole of Gamma(t) is
    compared against the extrapolated limit along t + eps.

    Raises:
        NumericError: If the extrapolated limit disagrees beyond tolerance
    """
    s, t = mpmath.mpc(s), mpmath.mpc(t)
    value = mpmath.power(2 * mpmath.pi, s) * mellin_kernel(job, s, t, settings) * mpmath.rgamma(s)
    result = ConvValue(value, 0.0, CONTINUED)
    if check_limit and _is_pole(t):
        tolerance = tolerance if tolerance is not None else settings.DEFAULT_TOLERANCE
        approach = limit_extrapolation(job, s, t, settings=settings)
        gap = float(abs(approach['limit'] - value))
        result.extras['limit_gap'] = gap
        if gap > tolerance * max(1.0, float(abs(value))):
            raise NumericError("pole cancellation failed", {'t': str(t), 'gap': gap, 'tolerance': tolerance})
    return result


def limit_extrapolation(job: ConvolutionJob, s: Any, t0: Any, eps: Tuple[float, float] = (1e-2, 1e-3),
                        settings: type[Config] = Config) -> Dict[str, Any]:
    """
    Limit of conv_entire at t0 from samples at t0 +- eps.

    The symmetric means m(e) = (v(t0+e) + v(t0-e)) / 2 have no odd terms, and
    v0 = (e1^2 m(e2) - e2^2 m(e1)) / (e1^2 - e2^2) removes the e^2 term.
    """
    s, t0 = mpmath.mpc(s), mpmath.mpc(t0)
    e1, e2 = (mpmath.mpf(e) for e in eps)
    samples = [conv_entire(job, s, t0 + e, settings=settings).value for e in (e1, -e1, e2, -e2)]
    m1 = (samples[0] + samples[1]) / 2
    m2 = (samples[2] + samples[3]) / 2
    limit = (e1 ** 2 * m2 - e2 ** 2 * m1) / (e1 ** 2 - e2 ** 2)
    return {'limit': limit, 'samples': samples, 'eps': [float(e1), float(e2)]}


# ---------------------------
# one-variable transform
# ---------------------------

@dataclass
class _OneVarData:
    a_hat: List[Tuple[int, mpmath.mpc]]
    b: List[Tuple[int, mpmath.mpc]]
    b_hat: List[Tuple[int, mpmath.mpc]]
    g_lambdas: List[mpmath.mpc]  # Lambda(g, j+1), j = 0..l-2


def _onevar_data(job: ConvolutionJob, settings: type[Config]) -> _OneVarData:
    g_lambdas = [completed_lambda(job.g_job(), j + 1, settings=settings).value for j in range(job.l - 1)]
    return _OneVarData(_mp_coeffs(job.f_hat, job.truncation), _mp_coeffs(job.g, job.truncation),
                       _mp_coeffs(job.g_hat, job.truncation), g_lambdas)


def _inner_polynomial(job: ConvolutionJob, data: _OneVarData, x: mpmath.mpf) -> mpmath.mpc:
    """
    P(x) = 2 int_x^inf g(iy) (y-x)^{l-2} dy - int_0^inf g(iy) (y-x)^{l-2} dy
         = sum_j C(l-2, j) (-x)^{l-2-j} (2 M_j(x) - Lambda(g, j+1)),
    M_j(x) = int_x^inf g(iy) y^j dy.
    """
    l = job.l
    X = job.cutoff
    w = mpmath.mpf(job.w)
    moments = [mpmath.mpc(0)] * (l - 1)
    if x >= X:
        for m, bm in data.b:
            rate = 2 * mpmath.pi * m
            ladder = integer_gamma_ladder(l - 1, rate * x)
            for j in range(l - 1):
                moments[j] += bm * ladder[j] * mpmath.power(rate, -(j + 1))
    else:
        # int_0^x g(iy) y^j dy = i^l w^{l/2-j-1} sum_m b_hat_m Gamma(l-j-1, 2 pi m/(wx)) (2 pi m)^{-(l-j-1)}
        sign = 1 if l % 4 == 0 else -1
        lower = [mpmath.mpc(0)] * (l - 1)
        for m, bm in data.b_hat:
            rate = 2 * mpmath.pi * m
            ladder = integer_gamma_ladder(l - 1, rate / (w * x))
            for j in range(l - 1):
                order = l - j - 1
                lower[j] += bm * ladder[order - 1] * mpmath.power(rate, -order)
        for j in range(l - 1):
            moments[j] = data.g_lambdas[j] - sign * mpmath.power(w, mpmath.mpf(l) / 2 - j - 1) * lower[j]
    total = mpmath.mpc(0)
    for j in range(l - 1):
        total += mpmath.binomial(l - 2, j) * (-x) ** (l - 2 - j) * (2 * moments[j] - data.g_lambdas[j])
    return total


def lambda_onevar(job: ConvolutionJob, s: Any, tolerance: float = 1e-12,
                  settings: type[Config] = Config) -> ConvValue:
    """
    Lambda_{f,g}(s) = int_0^inf f(ix) P(x) x^{s-1} dx.

    The range below X = 1/sqrt(w) is mapped to [X, inf) with x = 1/(wu) and
    the dual form: i^k w^{k/2-s} int_X^inf f_hat(iu) u^{k-s-1} P(1/(wu)) du.

    Raises:
        InputError: If l < 4
        NumericError: If a quadrature does not converge
    """
    if job.l < 4:
        raise InputError("the one-variable transform needs l >= 4", {'l': job.l})
    s = mpmath.mpc(s)
    X = job.cutoff
    w = mpmath.mpf(job.w)
    data = _onevar_data(job, settings)

    def upper(x):
        return series_value(job.f, mpmath.mpc(0, x)) * _inner_polynomial(job, data, x) * mpmath.power(x, s - 1)

    def lower(u):
        return series_value(job.f_hat, mpmath.mpc(0, u)) * mpmath.power(u, job.k - s - 1) \
            * _inner_polynomial(job, data, 1 / (w * u))

    points = [X, X + 1, X + 3, mpmath.inf]
    high, err_high = checked_quad(upper, points, tolerance, settings)
    low, err_low = checked_quad(lower, points, tolerance, settings)
    value = high + job.sign_f() * mpmath.power(w, mpmath.mpf(job.k) / 2 - s) * low
    return ConvValue(value, err_high + err_low, "quadrature")


# ---------------------------
# identities with resolved constants
# ---------------------------

@lru_cache(maxsize=None)
def resolve_prop_constants(l: int) -> Dict[str, Any]:
    """
    Exact constants of
    Lambda_{f,g}(s) = 2 Lambda_{f,g}(s, l-1) - sum_j c_j Lambda(f, s+j) Lambda(g, l-1-j),
    derived from the binomial expansion of (y - x)^{l-2} with sympy.

    In Dirichlet form the j-th term carries (l-2)! (-1)^j / j! and Gamma(s+j)
    inside the sum, with (2 pi)^{-(s+l-1)} in front.
    """
    if l < 2:
        raise InputError("weight l must be >= 2", {'l': l})
    x, y = symbols('x y')
    expansion = expand((y - x) ** (l - 2))
    lambda_coefficients = {}
    dirichlet_coefficients = {}
    for i in range(l - 1):
        # x^i y^{l-2-i}: int f(ix) x^{s+i-1} -> Lambda(f, s+i); int g(iy) y^{l-2-i} -> Lambda(g, l-1-i)
        c = expansion.coeff(x, i).coeff(y, l - 2 - i)
        if c != binomial(l - 2, i) * (-1) ** i:
            raise NumericError("binomial expansion mismatch", {'i': i, 'coefficient': str(c)})
        lambda_coefficients[i] = str(c)
        dirichlet_coefficients[i] = str(Rational(factorial(l - 2) * (-1) ** i, factorial(i)))
    return {
        'l': l,
        'two_variable_factor': '2',
        'two_variable_t': l - 1,
        'lambda_coefficients': lambda_coefficients,
        'dirichlet_coefficients': dirichlet_coefficients,
        'dirichlet_prefactor': '(2 pi)^-(s+l-1)',
        'functional_equation': '-i^(k+l) w^((k-l)/2+1-s) Lambda_hat(k-l+2-s)',
    }


def prop_identity_rhs(job: ConvolutionJob, s: Any, settings: type[Config] = Config) -> mpmath.mpc:
    s = mpmath.mpc(s)
    constants = resolve_prop_constants(job.l)
    total = 2 * lambda2(job, s, job.l - 1, CONTINUED, settings).value
    for i, c in constants['lambda_coefficients'].items():
        coefficient = int(c)
        if not coefficient:
            continue
        lf = completed_lambda(job.f_job(), s + i, settings=settings).value
        lg = completed_lambda(job.g_job(), job.l - 1 - i, settings=settings).value
        total -= coefficient * lf * lg
    return total


def prop_identity_residual(job: ConvolutionJob, s: Any, settings: type[Config] = Config) -> float:
    """|lambda_onevar(s) - RHS(s)| with the resolved constants."""
    return float(abs(lambda_onevar(job, s, settings=settings).value - prop_identity_rhs(job, s, settings)))


def fe_onevar_factor(job: ConvolutionJob, s: Any) -> mpmath.mpc:
    """-i^{k+l} w^{(k-l)/2+1-s}; i^{k+l} is exactly +-1 for even weights."""
    s = mpmath.mpc(s)
    sign = 1 if (job.k + job.l) % 4 == 0 else -1
    return -sign * mpmath.power(mpmath.mpf(job.w), mpmath.mpf(job.k - job.l) / 2 + 1 - s)


def fe_onevar_residual(job: ConvolutionJob, s: Any, settings: type[Config] = Config) -> float:
    """|Lambda_{f,g}(s) + i^{k+l} w^{(k-l)/2+1-s} Lambda_{f_hat,g_hat}(k-l+2-s)|."""
    s = mpmath.mpc(s)
    left = lambda_onevar(job, s, settings=settings).value
    right = lambda_onevar(job.dual(), job.k - job.l + 2 - s, settings=settings).value
    return float(abs(left - fe_onevar_factor(job, s) * right))


def validate_prop_constants(job: ConvolutionJob, points: Sequence[Any], settings: type[Config] = Config) -> List[Dict[str, Any]]:
    """Residuals of the identity at sample points, shipped with the resolved constants."""
    rows = []
    for s in points:
        value = lambda_onevar(job, s, settings=settings).value
        rhs = prop_identity_rhs(job, s, settings)
        rows.append({'s': str(s), 'value': mpmath.nstr(value, 15), 'residual': float(abs(value - rhs)),
                     'relative': float(abs(value - rhs) / max(abs(value), mpmath.mpf('1e-300')))})
    return rows
