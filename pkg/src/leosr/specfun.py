"""
Special functions used by the fading statistics and the dish pattern.

Everything here is real-valued and works on scalars or numpy arrays.

Accuracy targets
----------------
confluent_1f1
    Series truncated once the next term falls below 1e-15 of the partial
    sum (relative), 10 000 term cap.
kummer_polynomial
    Exact finite sum, agrees with the series to ~1e-13 relative for
    m <= 25, x in [0, 50].
bessel_j1
    <= 1e-10 absolute on |x| <= 1000.
lower_incomplete_gamma_int
    Exact finite-sum identity; absolute error at the level of double
    rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpecfunResult",
    "ConvergenceError",
    "confluent_1f1",
    "confluent_1f1_scaled",
    "kummer_polynomial",
    "bessel_j1",
    "lower_incomplete_gamma_int",
    "log_factorial",
    "log_binomial",
]

REL_TOL = 1e-15
MAX_TERMS = 10_000

# Series / asymptotic switch-over for J1; both branches are < 1e-11 here.
_J1_SWITCH = 13.0


class ConvergenceError(ArithmeticError):
    """A series or quadrature did not reach its tolerance."""


@dataclass(frozen=True)
class SpecfunResult:
    """Value of a series evaluation plus its convergence bookkeeping.

    ``value`` is a float for scalar input and an ndarray otherwise.
    Callers must check ``converged`` (or use :meth:`checked`) before
    consuming ``value``.
    """

    value: float | np.ndarray
    converged: bool
    terms_used: int

    def checked(self, what: str = "series") -> float | np.ndarray:
        if not self.converged:
            raise ConvergenceError(
                f"{what} did not converge after {self.terms_used} terms"
            )
        return self.value


def _as_float_array(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def _unwrap(arr: np.ndarray, scalar: bool):
    return float(arr[0]) if scalar else arr


def _check_b(b: float) -> None:
    if not math.isfinite(b):
        raise ValueError("b must be finite")
    if b <= 0 and float(b).is_integer():
        raise ValueError(f"b={b} is a non-positive integer; 1F1 is undefined")


def _series_1f1(a: float, b: float, x: np.ndarray) -> tuple[np.ndarray, bool, int]:
    total = np.ones_like(x)
    term = np.ones_like(x)
    for i in range(MAX_TERMS):
        term = term * ((a + i) / ((b + i) * (i + 1.0))) * x
        total = total + term
        with np.errstate(invalid="ignore", divide="ignore"):
            small = np.abs(term) <= REL_TOL * np.abs(total)
        if np.all(small | (term == 0.0)):
            return total, bool(np.all(np.isfinite(total))), i + 2
    return total, False, MAX_TERMS


def confluent_1f1(a: float, b: float, x) -> SpecfunResult:
    """Kummer's confluent hypergeometric function 1F1(a; b; x).

    Parameters
    ----------
    a, b : float
        Parameters. ``b`` must not be a non-positive integer.
    x : float or array_like
        Argument(s), finite.

    Returns
    -------
    SpecfunResult
        ``terms_used`` is the largest count over the array.

    Notes
    -----
    Negative arguments go through Kummer's transformation
    ``1F1(a;b;x) = e^x 1F1(b-a;b;-x)`` so that the summed series has
    positive argument.  When ``a > b`` that series alternates and loses
    roughly ``log10(max term / result)`` digits; for ``x >= 0`` (the only
    case the fading model needs) every term is positive.
    """
    _check_b(b)
    if not math.isfinite(a):
        raise ValueError("a must be finite")
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(_as_float_array(x, "x"))

    out = np.empty_like(xs)
    converged = True
    terms = 1
    pos = xs >= 0
    if np.any(pos):
        v, ok, n = _series_1f1(a, b, xs[pos])
        out[pos] = v
        converged &= ok
        terms = max(terms, n)
    if np.any(~pos):
        xn = xs[~pos]
        v, ok, n = _series_1f1(b - a, b, -xn)
        out[~pos] = np.exp(xn) * v
        converged &= ok
        terms = max(terms, n)
    return SpecfunResult(_unwrap(out, scalar), converged, terms)


def confluent_1f1_scaled(a: float, b: float, x) -> SpecfunResult:
    """``exp(-x) * 1F1(a; b; x)`` for ``x >= 0`` without overflow.

    Arguments well past the double-precision range of ``exp`` still give
    finite results (the running sum is periodically rescaled).  Needs
    ``a > 0`` and ``b > 0``.
    """
    _check_b(b)
    if a <= 0 or b <= 0:
        raise ValueError("scaled 1F1 requires a > 0 and b > 0")
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(_as_float_array(x, "x"))
    if np.any(xs < 0):
        raise ValueError("scaled 1F1 requires x >= 0")

    # exp(-x) stays a normal double below ~700: plain recurrence is enough.
    # Past that, sum unscaled and divide out 1e200 whenever the partial sum
    # grows large, tracking the removed factor as a log offset.
    rescale = bool(np.any(xs > 700.0))
    if rescale:
        term = np.ones_like(xs)
        offset = -xs.copy()
    else:
        term = np.exp(-xs)
    total = term.copy()
    for i in range(MAX_TERMS):
        term = term * (((a + i) / ((b + i) * (i + 1.0))) * xs)
        total = total + term
        if rescale:
            big = total > _RESCALE
            if np.any(big):
                term[big] /= _RESCALE
                total[big] /= _RESCALE
                offset[big] += _LOG_RESCALE
        past_peak = i + 1 > a + xs
        if np.all(((term <= REL_TOL * total) & past_peak) | (xs == 0)):
            if rescale:
                total = np.exp(np.log(total) + offset)
            return SpecfunResult(_unwrap(total, scalar), True, i + 2)
    if rescale:
        total = np.exp(np.log(total) + offset)
    return SpecfunResult(_unwrap(total, scalar), False, MAX_TERMS)


_RESCALE = 1e200
_LOG_RESCALE = math.log(_RESCALE)


def _check_positive_int(n, name: str) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def laguerre_coefficients(m: int) -> np.ndarray:
    """Coefficients c_i = (m-1)! / ((m-1-i)! (i!)^2), i = 0..m-1."""
    m = _check_positive_int(m, "m")
    return np.array(
        [math.comb(m - 1, i) / math.factorial(i) for i in range(m)], dtype=float
    )


def kummer_polynomial(m: int, x):
    """1F1(m; 1; x) for integer m >= 1 as e^x times a degree m-1 polynomial.

    >>> round(kummer_polynomial(2, 1.0), 10)
    5.4365636569
    """
    coeffs = laguerre_coefficients(m)
    xs = _as_float_array(x, "x")
    poly = np.polynomial.polynomial.polyval(xs, coeffs)
    out = np.exp(xs) * poly
    return float(out) if np.ndim(out) == 0 else out


def _j1_series(x: np.ndarray) -> np.ndarray:
    # sum_k (-1)^k (x/2)^(2k+1) / (k! (k+1)!)
    half = 0.5 * x
    q = -(half * half)
    term = half.copy()
    total = half.copy()
    for k in range(1, 80):
        term = term * q / (k * (k + 1.0))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _j1_asymptotic(x: np.ndarray) -> np.ndarray:
    # Hankel expansion, order 1 (mu = 4).
    mu = 4.0
    p = np.ones_like(x)
    q = np.zeros_like(x)
    coef = 1.0
    inv8x = 1.0 / (8.0 * x)
    prev = np.full_like(x, np.inf)
    for k in range(1, 60):
        coef *= (mu - (2 * k - 1) ** 2) / k
        term = coef * inv8x**k
        mag = np.abs(term)
        # stop each element at its smallest term (series is divergent)
        active = mag < prev
        if not np.any(active):
            break
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q = np.where(active, q + sign * term, q)
        else:
            p = np.where(active, p + sign * term, p)
        prev = np.where(active, mag, 0.0)
        if np.all(mag < 1e-17):
            break
    chi = x - 0.75 * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j1(x):
    """Bessel function of the first kind, order one.

    Power series below |x| = 13, Hankel asymptotic expansion above.
    Odd symmetry is exact by construction.
    """
    xs = _as_float_array(x, "x")
    scalar = xs.ndim == 0
    ax = np.abs(np.atleast_1d(xs))
    out = np.empty_like(ax)
    small = ax <= _J1_SWITCH
    if np.any(small):
        out[small] = _j1_series(ax[small])
    if np.any(~small):
        out[~small] = _j1_asymptotic(ax[~small])
    out = np.where(np.atleast_1d(xs) < 0, -out, out)
    return float(out[0]) if scalar else out.reshape(xs.shape)


def lower_incomplete_gamma_int(a: int, x):
    """Unnormalised lower incomplete gamma for integer ``a >= 1``.

    gamma(a, x) = (a-1)! * (1 - e^{-x} sum_{k<a} x^k / k!)

    That closed form cancels badly for small ``x``, so below ``x = a + 1``
    the ascending series is used instead.
    """
    a = _check_positive_int(a, "a")
    xs = _as_float_array(x, "x")
    if np.any(xs < 0):
        raise ValueError("x must be non-negative")
    shape = xs.shape
    xs = np.atleast_1d(xs).ravel()
    regularized = np.empty_like(xs, dtype=float)
    low = xs < a + 1.0
    # below the peak: ascending series x^a e^-x / a! * sum x^k / ((a+1)..(a+k))
    if np.any(low):
        xl = xs[low]
        term = np.ones_like(xl)
        acc = np.ones_like(xl)
        for k in range(1, MAX_TERMS):
            term = term * xl / (a + k)
            acc = acc + term
            if np.all(term <= REL_TOL * acc):
                break
        with np.errstate(divide="ignore"):
            logpre = a * np.log(xl) - xl - math.lgamma(a + 1.0)
        regularized[low] = np.where(xl > 0, np.exp(logpre) * acc, 0.0)
    # above it: 1 - e^-x sum_{k<a} x^k/k!, no cancellation since P >= ~1/2
    if np.any(~low):
        xh = xs[~low]
        term = np.exp(-xh)
        tail = term.copy()
        for k in range(1, a):
            term = term * xh / k
            tail = tail + term
        regularized[~low] = 1.0 - tail
    out = (math.factorial(a - 1) * np.clip(regularized, 0.0, 1.0)).reshape(shape)
    return float(out) if out.ndim == 0 else out


def log_factorial(n: int) -> float:
    return math.lgamma(n + 1.0)


def log_binomial(n: int, k: int) -> float:
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k)
