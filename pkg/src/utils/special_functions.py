"""
Special functions used by the L-function services.

The upper incomplete gamma function is evaluated the classical way: a
modified Lentz continued fraction in the region x >= max(1, |s|) and the
complement of the lower-gamma power series elsewhere. All arithmetic runs in
mpmath so the working precision follows MpmathConfig.
"""
from math import factorial
from typing import Any, Callable, List, Sequence, Tuple

import mpmath

from app.exceptions import DomainError, NumericError
from config.settings import Config

_FPMIN = mpmath.mpf('1e-300')


def _is_nonpositive_integer(s: mpmath.mpc) -> bool:
    return s.imag == 0 and s.real <= 0 and s.real == mpmath.floor(s.real)


def _continued_fraction(s: mpmath.mpc, x: mpmath.mpf, settings: type[Config]) -> mpmath.mpc:
    b = x + 1 - s
    c = 1 / _FPMIN
    d = 1 / b
    h = d
    for i in range(1, settings.GAMMA_MAX_ITER + 1):
        an = -i * (i - s)
        b += 2
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1 / d
        delta = d * c
        h *= delta
        if abs(delta - 1) < settings.GAMMA_EPS:
            return mpmath.exp(-x + s * mpmath.log(x)) * h
    raise NumericError("incomplete gamma continued fraction did not converge",
                       {'s': str(s), 'x': str(x), 'iterations': settings.GAMMA_MAX_ITER})


def _lower_series(s: mpmath.mpc, x: mpmath.mpf, settings: type[Config]) -> mpmath.mpc:
    """gamma(s, x) = x^s e^-x sum_n x^n / (s (s+1) ... (s+n))."""
    ap = s
    term = 1 / s
    total = term
    for _ in range(settings.GAMMA_MAX_ITER):
        ap += 1
        term *= x / ap
        total += term
        if abs(term) < abs(total) * settings.GAMMA_EPS:
            return total * mpmath.exp(-x + s * mpmath.log(x))
    raise NumericError("lower incomplete gamma series did not converge",
                       {'s': str(s), 'x': str(x), 'iterations': settings.GAMMA_MAX_ITER})


def upper_incomplete_gamma(s: Any, x: Any, settings: type[Config] = Config) -> mpmath.mpc:
    """
    Upper incomplete gamma function Gamma(s, x) for complex s and real x > 0.

    Args:
        s: Complex order
        x: Positive real lower limit
        settings: Configuration class (GAMMA_EPS, GAMMA_MAX_ITER)

    Returns:
        Gamma(s, x) as an mpmath complex number

    Raises:
        DomainError: If x <= 0
        NumericError: If the iteration cap is reached
    """
    s = mpmath.mpc(s)
    x = mpmath.mpf(x)
    if x <= 0:
        raise DomainError("upper incomplete gamma needs x > 0", {'x': str(x)})
    if _is_nonpositive_integer(s):
        # Gamma(0, x) = E1(x), then Gamma(s, x) = (Gamma(s+1, x) - x^s e^-x) / s downwards
        value = mpmath.mpc(mpmath.e1(x))
        for m in range(1, int(-s.real) + 1):
            value = (value - x ** (-m) * mpmath.exp(-x)) / (-m)
        return value
    if x >= max(1, abs(s)):
        return _continued_fraction(s, x, settings)
    return mpmath.gamma(s) - _lower_series(s, x, settings)


def integer_order_gamma(n: int, z: Any) -> mpmath.mpc:
    """
    Gamma(n, z) for integer n >= 1 and any complex z: (n-1)! e^-z sum_{i<n} z^i / i!.
    """
    if n < 1:
        raise DomainError("integer_order_gamma needs n >= 1", {'n': n})
    z = mpmath.mpmathify(z)
    term = mpmath.mpf(1)
    total = mpmath.mpf(1)
    for i in range(1, n):
        term *= z / i
        total += term
    return factorial(n - 1) * mpmath.exp(-z) * total


def integer_gamma_ladder(top: int, z: Any) -> List[mpmath.mpc]:
    """[Gamma(1, z), ..., Gamma(top, z)] from Gamma(n+1, z) = n Gamma(n, z) + z^n e^-z."""
    z = mpmath.mpmathify(z)
    decay = mpmath.exp(-z)
    values = [decay]
    power = mpmath.mpf(1)
    for n in range(1, top):
        power *= z
        values.append(n * values[-1] + power * decay)
    return values


def continued_gamma(t: Any, depth: int) -> mpmath.mpc:
    """
    Gamma(t) through Gamma(t + depth) / (t (t+1) ... (t+depth-1)), valid for Re t > -depth.

    Raises:
        DomainError: Outside the continuation strip or at a pole
    """
    t = mpmath.mpc(t)
    if t.real <= -depth:
        raise DomainError(f"continuation depth {depth} does not reach Re t = {mpmath.nstr(t.real, 6)}",
                          {'t': str(t), 'depth': depth})
    denominator = mpmath.mpc(1)
    for j in range(depth):
        denominator *= t + j
    if denominator == 0:
        raise DomainError("Gamma(t) has a pole here", {'t': str(t)})
    return mpmath.gamma(t + depth) / denominator


def geometric_tail_bound(first_index: int, amplitude: float, exponent: float, decay: float) -> float:
    """
    Bound sum_{n >= first_index} amplitude n^exponent e^(-decay n) by a geometric majorant.

    The ratio of consecutive terms is at most ((n0+1)/n0)^exponent e^-decay
    for n >= n0; an infinite bound means the majorant does not apply.
    """
    n0 = max(1, first_index)
    first = amplitude * n0 ** exponent * mpmath.exp(-decay * n0)
    ratio = (mpmath.mpf(n0 + 1) / n0) ** max(exponent, 0) * mpmath.exp(-decay)
    if ratio >= 1:
        return float('inf')
    return float(first / (1 - ratio))


def checked_quad(integrand: Callable, interval: Sequence[Any], tolerance: float,
                 settings: type[Config] = Config) -> Tuple[mpmath.mpc, float]:
    """
    mpmath.quad with its error estimate; raises when the estimate exceeds `tolerance`
    relative to the value.

    Raises:
        NumericError: If the quadrature error estimate is too large
    """
    value, err = mpmath.quad(integrand, list(interval), error=True, maxdegree=settings.QUAD_MAXDEGREE)
    scale = max(abs(value), mpmath.mpf(1))
    if err > tolerance * scale:
        raise NumericError("quadrature did not converge",
                           {'estimate': mpmath.nstr(value, 15), 'error': float(err), 'tolerance': tolerance})
    return value, float(err)
