"""
L-function Service for hoforms.

For a Fourier-Taylor series f of weight k with dual form f_hat = f|_k S_w
this service evaluates the truncated Dirichlet series L_nu(f, s), the
completed L-function

    Lambda(f, s) = F(s) + i^k w^{k/2-s} F_hat(k-s),
    F(s) = sum_{n,nu} a_{n,nu} i^nu (2 pi n)^{-(s+nu)} Gamma(s+nu, 2 pi n / sqrt(w)),

and the residuals of its functional equation and of the decomposition into
Gamma-factors times L_nu. Quadrature along the imaginary axis is available as
an independent method.
"""
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import mpmath

from app.exceptions import DomainError, InputError
from app.services.ft_series_service import FTSeries, growth_exponent, series_value, to_mp
from config.settings import Config
from utils import console
from utils.special_functions import checked_quad, geometric_tail_bound, upper_incomplete_gamma

INCOMPLETE_GAMMA = "incomplete-gamma"
QUADRATURE = "quadrature"


@dataclass(frozen=True)
class LFunctionJob:
    """
    A form with its dual, weight and width.

    f_hat may be None for synthetic series without a modular dual; the part
    of the Mellin integral below 1/sqrt(w) is then computed from f directly.
    """
    f: FTSeries
    f_hat: Optional[FTSeries]
    k: int
    w: Any = 1
    truncation: Optional[int] = None
    label: str = "job"

    def __post_init__(self) -> None:
        if not self.f.is_cuspidal or (self.f_hat is not None and not self.f_hat.is_cuspidal):
            raise InputError("L-function data must start at n >= 1")
        if mpmath.mpf(self.w) <= 0:
            raise InputError("width must be positive", {'w': str(self.w)})
        if self.k % 2:
            raise InputError("weight must be even", {'k': self.k})

    def dual(self) -> 'LFunctionJob':
        """Swap f and f_hat; applying it twice returns the job."""
        if self.f_hat is None:
            raise InputError("job has no dual form")
        return replace(self, f=self.f_hat, f_hat=self.f, label=f"{self.label}^")

    @property
    def cutoff(self) -> mpmath.mpf:
        """1/sqrt(w), the point the Mellin integral is split at."""
        return 1 / mpmath.sqrt(mpmath.mpf(self.w))

    def sign(self) -> int:
        """i^k, exactly +-1 for even k."""
        return 1 if self.k % 4 == 0 else -1


@dataclass
class CompletedValue:
    s: mpmath.mpc
    value: mpmath.mpc
    tail_bound: float
    method: str
    status: str = "ok"
    terms: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            's': [float(self.s.real), float(self.s.imag)],
            'value': [float(self.value.real), float(self.value.imag)],
            'tail_bound': self.tail_bound,
            'method': self.method,
            'status': self.status,
            'terms': self.terms,
        }


@dataclass
class DirichletValue:
    value: mpmath.mpc
    tail_bound: float
    terms: int
    status: str = "ok"
    extras: Dict[str, Any] = field(default_factory=dict)


def _terms(f: FTSeries, truncation: Optional[int], settings: type[Config]) -> int:
    cap = truncation if truncation is not None else settings.TRUNCATION_CAP
    return min(cap, f.n_max)


def dirichlet_L(f: FTSeries, nu: int, s: Any, truncation: Optional[int] = None,
                settings: type[Config] = Config) -> DirichletValue:
    """
    Partial sum of L_nu(f, s) = sum_n a_{n,nu} n^{-s}.

    The tail is bounded by C N^{alpha - sigma + 1} / (sigma - alpha - 1) from
    the fitted growth |a_{n,nu}| <= C n^alpha, and the sum stops at the first
    N where that bound is below STOP_TOLERANCE. An infinite or large bound
    gives status "warning" while the value is still returned.
    """
    s = mpmath.mpc(s)
    if nu > f.order or nu < 0:
        return DirichletValue(mpmath.mpc(0), 0.0, 0)
    n_terms = _terms(f, truncation, settings)
    amplitude, alpha = growth_exponent(f, nu, settings)
    excess = float(s.real) - alpha - 1
    if amplitude and excess > 0:
        # C N^-excess / excess <= STOP_TOLERANCE, solved for N in logs
        log_needed = (mpmath.log(amplitude) - mpmath.log(excess * settings.STOP_TOLERANCE)) / excess
        if log_needed < mpmath.log(n_terms):
            n_terms = max(f.n_min, int(mpmath.ceil(mpmath.exp(log_needed))))
    total = mpmath.mpc(0)
    for n in range(max(1, f.n_min), n_terms + 1):
        a = f.coeffs[n][nu]
        if a:
            total += to_mp(a) * mpmath.power(n, -s)
    if not amplitude:
        tail = 0.0
    elif excess <= 0:
        tail = float('inf')
    else:
        tail = float(amplitude * mpmath.power(n_terms, -excess) / excess)
    status = "ok" if tail <= settings.TAIL_TOLERANCE else "warning"
    return DirichletValue(total, tail, n_terms, status)


def _gamma_tail_factor(a: float, x: float) -> Optional[float]:
    """c with Gamma(a, x) <= c x^{a-1} e^-x for real a, or None when no bound applies."""
    if a <= 1:
        return 1.0
    if x > 2 * (a - 1):
        return 2.0
    return None


def _growth(f: FTSeries, settings: type[Config]) -> List[Tuple[float, float]]:
    return [growth_exponent(f, nu, settings) for nu in range(f.order + 1)]


def _mellin_tail(f: FTSeries, s: mpmath.mpc, n_terms: int, cutoff: mpmath.mpf, settings: type[Config],
                 growth: Optional[List[Tuple[float, float]]] = None) -> float:
    """Bound on the F(s) terms with n > n_terms."""
    growth = growth if growth is not None else _growth(f, settings)
    total = 0.0
    two_pi_x = 2 * float(mpmath.pi) * float(cutoff)
    for nu, (amplitude, alpha) in enumerate(growth):
        if not amplitude:
            continue
        a = float(s.real) + nu
        factor = _gamma_tail_factor(a, two_pi_x * (n_terms + 1))
        if factor is None:
            return float('inf')
        # |a_n (2 pi n)^{-a} Gamma(a, 2 pi n X)| <= C factor X^{a-1} (2 pi)^-1 n^{alpha-1} e^{-2 pi X n}
        scale = amplitude * factor * float(cutoff) ** (a - 1) / (2 * float(mpmath.pi))
        total += geometric_tail_bound(n_terms + 1, scale, alpha - 1, two_pi_x)
    return total


def _stopping_index(f: FTSeries, s: mpmath.mpc, cutoff: mpmath.mpf, n_terms: int,
                    settings: type[Config]) -> Tuple[int, float]:
    """First N <= n_terms whose tail bound is below STOP_TOLERANCE, with that bound."""
    growth = _growth(f, settings)
    for n in range(max(1, f.n_min), n_terms):
        tail = _mellin_tail(f, s, n, cutoff, settings, growth)
        if tail <= settings.STOP_TOLERANCE:
            return n, tail
    return n_terms, _mellin_tail(f, s, n_terms, cutoff, settings, growth)


def incomplete_mellin(f: FTSeries, s: Any, cutoff: Any, truncation: Optional[int] = None,
                      settings: type[Config] = Config) -> CompletedValue:
    """
    int_cutoff^inf f(iy) y^{s-1} dy termwise:
    sum_{n,nu} a_{n,nu} i^nu (2 pi n)^{-(s+nu)} Gamma(s+nu, 2 pi n cutoff),
    summed up to the first n whose tail bound is below STOP_TOLERANCE.
    """
    s = mpmath.mpc(s)
    cutoff = mpmath.mpf(cutoff)
    n_terms, tail = _stopping_index(f, s, cutoff, _terms(f, truncation, settings), settings)
    total = mpmath.mpc(0)
    for n in range(max(1, f.n_min), n_terms + 1):
        row = f.coeffs[n]
        two_pi_n = 2 * mpmath.pi * n
        for nu in range(f.order + 1):
            if not row[nu]:
                continue
            total += to_mp(row[nu]) * mpmath.j ** nu * mpmath.power(two_pi_n, -(s + nu)) \
                * upper_incomplete_gamma(s + nu, two_pi_n * cutoff, settings)
    return CompletedValue(s, total, tail, INCOMPLETE_GAMMA, terms=n_terms)


def _lower_mellin(f: FTSeries, s: mpmath.mpc, cutoff: mpmath.mpf, n_terms: int,
                  settings: type[Config]) -> mpmath.mpc:
    """int_0^cutoff f(iy) y^{s-1} dy from the series itself, via Gamma(a) - Gamma(a, x)."""
    total = mpmath.mpc(0)
    for n in range(max(1, f.n_min), n_terms + 1):
        row = f.coeffs[n]
        two_pi_n = 2 * mpmath.pi * n
        for nu in range(f.order + 1):
            if not row[nu]:
                continue
            a = s + nu
            lower = mpmath.gamma(a) - upper_incomplete_gamma(a, two_pi_n * cutoff, settings)
            total += to_mp(row[nu]) * mpmath.j ** nu * mpmath.power(two_pi_n, -a) * lower
    return total


def completed_lambda(job: LFunctionJob, s: Any, method: str = INCOMPLETE_GAMMA,
                     settings: type[Config] = Config) -> CompletedValue:
    """
    Completed L-function Lambda(f, s).

    Args:
        job: Form, dual, weight and width
        s: Complex argument
        method: "incomplete-gamma" (termwise, default) or "quadrature"
        settings: Configuration class

    Returns:
        CompletedValue with the value, a tail bound and the method used
    """
    s = mpmath.mpc(s)
    if method == QUADRATURE:
        return _lambda_quadrature(job, s, settings)
    if method != INCOMPLETE_GAMMA:
        raise InputError(f"unknown method {method!r}")
    cutoff = job.cutoff
    upper = incomplete_mellin(job.f, s, cutoff, job.truncation, settings)
    if job.f_hat is None:
        n_lower = _terms(job.f, job.truncation, settings)
        value = upper.value + _lower_mellin(job.f, s, cutoff, n_lower, settings)
        tail = upper.tail_bound
        terms = max(upper.terms, n_lower)
    else:
        factor = job.sign() * mpmath.power(mpmath.mpf(job.w), mpmath.mpf(job.k) / 2 - s)
        dual = incomplete_mellin(job.f_hat, job.k - s, cutoff, job.truncation, settings)
        value = upper.value + factor * dual.value
        tail = upper.tail_bound + float(abs(factor)) * dual.tail_bound
        terms = max(upper.terms, dual.terms)
    status = "ok" if tail <= settings.TAIL_TOLERANCE else "warning"
    return CompletedValue(s, value, tail, INCOMPLETE_GAMMA, status, terms)


def mellin_quadrature(f: FTSeries, s: Any, lower: Any = 0, settings: type[Config] = Config,
                      tolerance: float = 1e-12) -> mpmath.mpc:
    """int_lower^inf f(iy) y^{s-1} dy by adaptive quadrature on the truncated series."""
    s = mpmath.mpc(s)
    lower = mpmath.mpf(lower)
    points = [lower] + [p for p in (mpmath.mpf(1) / 2, 1, 2, 5) if p > lower] + [mpmath.inf]

    def integrand(y):
        return series_value(f, mpmath.mpc(0, y)) * mpmath.power(y, s - 1)

    value, _ = checked_quad(integrand, points, tolerance, settings)
    return value


def _lambda_quadrature(job: LFunctionJob, s: mpmath.mpc, settings: type[Config]) -> CompletedValue:
    cutoff = job.cutoff
    upper = mellin_quadrature(job.f, s, cutoff, settings)
    if job.f_hat is None:
        value = mellin_quadrature(job.f, s, 0, settings)
    else:
        factor = job.sign() * mpmath.power(mpmath.mpf(job.w), mpmath.mpf(job.k) / 2 - s)
        value = upper + factor * mellin_quadrature(job.f_hat, job.k - s, cutoff, settings)
    return CompletedValue(s, value, 0.0, QUADRATURE)


def fe_residual(job: LFunctionJob, s: Any, settings: type[Config] = Config) -> float:
    """
    |Lambda(f, s) - i^k w^{k/2-s} Lambda(f_hat, k-s)|.
    """
    s = mpmath.mpc(s)
    left = completed_lambda(job, s, settings=settings).value
    right = completed_lambda(job.dual(), job.k - s, settings=settings).value
    factor = job.sign() * mpmath.power(mpmath.mpf(job.w), mpmath.mpf(job.k) / 2 - s)
    return float(abs(left - factor * right))


def lambda_nu_decomposition_residual(job: LFunctionJob, s: Any, settings: type[Config] = Config) -> float:
    """
    |Lambda(f, s) - sum_nu i^nu Gamma(s+nu) (2 pi)^{-(s+nu)} L_nu(f, s+nu)|.

    The identity is the full Mellin transform read termwise, so it holds for
    every width.

    Raises:
        DomainError: If some L_nu(f, s+nu) is outside its convergence region
    """
    s = mpmath.mpc(s)
    total = mpmath.mpc(0)
    for nu in range(job.f.order + 1):
        partial = dirichlet_L(job.f, nu, s + nu, job.truncation, settings)
        if partial.tail_bound == float('inf'):
            raise DomainError("Dirichlet series does not converge here",
                              {'s': str(s + nu), 'nu': nu})
        if partial.status != "ok":
            console.warning(f"L_{nu} tail bound {partial.tail_bound:.3g} at s = {mpmath.nstr(s + nu, 6)}")
        total += mpmath.j ** nu * mpmath.gamma(s + nu) * mpmath.power(2 * mpmath.pi, -(s + nu)) * partial.value
    return float(abs(completed_lambda(job, s, settings=settings).value - total))


def critical_grid(k: int, points: int = 5) -> List[mpmath.mpc]:
    """Points on Re s = k/2 with imaginary parts 0..points-1."""
    return [mpmath.mpc(mpmath.mpf(k) / 2, t) for t in range(points)]


def strip_grid(k: int) -> List[mpmath.mpc]:
    """Grid covering Re s in [-3, k+3], used by the entirety scan."""
    return [mpmath.mpc(sigma, t) for sigma in range(-3, k + 4, 3) for t in (0, 2)]


def entirety_scan(job: LFunctionJob, grid: Optional[List[Any]] = None,
                   settings: type[Config] = Config) -> List[CompletedValue]:
    """completed_lambda on a grid; every value must be finite with a finite tail bound."""
    grid = grid if grid is not None else strip_grid(job.k)
    values = [completed_lambda(job, s, settings=settings) for s in grid]
    bad = [v for v in values if not mpmath.isfinite(v.value) or v.tail_bound == float('inf')]
    if bad:
        console.warning(f"{len(bad)} non-finite values on the entirety grid")
    return values
