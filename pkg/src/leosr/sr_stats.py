"""
Shadowed Rician (SR) amplitude and squared-SR (SSR) power distributions.

Conventions: ``b`` is half the NLOS average power, ``omega`` the LOS
average power and ``m`` the Nakagami fading order of the LOS amplitude.
Everything is in linear units.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .specfun import (
    ConvergenceError,
    confluent_1f1,
    confluent_1f1_scaled,
    laguerre_coefficients,
    lower_incomplete_gamma_int,
)

__all__ = [
    "SrParams",
    "ShadowingLevel",
    "SsrDistribution",
    "sr_pdf",
    "ssr_pdf",
    "ssr_pdf_int",
    "ssr_cdf_int",
    "ssr_cdf_general",
    "scale_ssr",
    "ssr_mean_int",
    "sample_sr_power",
    "snr_outage",
    "prob_not_noise_limited",
]

_CDF_RANGE_SLACK = 1e-9


@dataclass(frozen=True)
class SrParams:
    """SR channel parameters ``(b, m, omega)``."""

    b: float
    m: float
    omega: float

    def __post_init__(self):
        for name in ("b", "m", "omega"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.b <= 0:
            raise ValueError(f"b must be positive, got {self.b}")
        if self.m <= 0:
            raise ValueError(f"m must be positive, got {self.m}")
        if self.omega < 0:
            raise ValueError(f"omega must be non-negative, got {self.omega}")

    @property
    def mean(self) -> float:
        return 2.0 * self.b + self.omega

    @property
    def variance(self) -> float:
        # E[Var(Y|W)] + Var(E[Y|W]) with W ~ Gamma(m, omega/m)
        b, om = self.b, self.omega
        return 4.0 * b * b + 4.0 * b * om + om * om / self.m

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    @property
    def m_rounded(self) -> int:
        """Nearest integer to ``m`` (halves round up), at least 1."""
        return max(1, int(math.floor(self.m + 0.5)))

    def with_integer_m(self) -> "SrParams":
        return replace(self, m=float(self.m_rounded))


class ShadowingLevel(enum.Enum):
    """Measured SR fits for three shadowing intensities."""

    LIGHT = SrParams(b=0.158, m=19.4, omega=1.29)
    AVERAGE = SrParams(b=0.126, m=10.1, omega=0.835)
    HEAVY = SrParams(b=0.063, m=0.739, omega=8.97e-4)

    @property
    def label(self) -> str:
        return self.name.capitalize()

    @property
    def params(self) -> SrParams:
        return self.value

    @classmethod
    def from_name(cls, name: str) -> "ShadowingLevel":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            valid = ", ".join(level.name.lower() for level in cls)
            raise ValueError(
                f"unknown shadowing level {name!r} (expected one of: {valid})"
            ) from None


@dataclass(frozen=True)
class SsrDistribution:
    """SSR law whose closed forms use the integer-rounded fading order."""

    params: SrParams

    @property
    def m_rounded(self) -> int:
        return self.params.m_rounded

    @cached_property
    def _terms(self):
        b, om = self.params.b, self.params.omega
        m = self.m_rounded
        s = 2.0 * b * m + om
        return m, s, laguerre_coefficients(m)


def _nonneg(y, name: str) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise ValueError(f"{name} must be non-negative")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def _is_integer(m: float) -> bool:
    return float(m).is_integer()


def sr_pdf(params: SrParams, x):
    """Density of the SR channel amplitude ``|h|``."""
    xs = _nonneg(x, "x")
    b, m, om = params.b, params.m, params.omega
    s = 2.0 * b * m + om
    z = om * xs * xs / (2.0 * b * s)
    hyp = confluent_1f1(m, 1.0, z).checked("1F1 in SR pdf")
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        out = (xs / b) * (2.0 * b * m / s) ** m * np.exp(-xs * xs / (2.0 * b)) * hyp
    bad = ~np.isfinite(out)
    if np.any(bad):
        # exp underflow against 1F1 overflow far in the tail: rebalance exponents
        xb = np.broadcast_to(xs, out.shape)[bad]
        zb = om * xb * xb / (2.0 * b * s)
        scaled = confluent_1f1_scaled(m, 1.0, zb).checked("scaled 1F1 in SR pdf")
        out = np.array(out, copy=True)
        out[bad] = (xb / b) * (2.0 * b * m / s) ** m * np.exp(-m * xb * xb / s) * scaled
    return _out(out)


def ssr_pdf(params: SrParams, y, *, method: str = "auto"):
    """Density of the channel power ``|h|^2``.

    ``method`` selects the 1F1 evaluation: ``"kummer"`` (integer m only),
    ``"series"``, or ``"auto"`` (kummer whenever m is integral).
    """
    ys = _nonneg(y, "y")
    b, m, om = params.b, params.m, params.omega
    if method == "auto":
        method = "kummer" if _is_integer(m) else "series"
    s = 2.0 * b * m + om
    pref = (2.0 * b * m / s) ** m / (2.0 * b)
    z = om * ys / (2.0 * b * s)
    # exp(-y/2b) * 1F1(m,1,z) == exp(-m y / s) * [exp(-z) 1F1(m,1,z)]
    if method == "kummer":
        if not _is_integer(m):
            raise ValueError("kummer evaluation needs an integer fading order")
        poly = np.polynomial.polynomial.polyval(z, laguerre_coefficients(int(m)))
        out = pref * np.exp(-m * ys / s) * poly
    elif method == "series":
        scaled = confluent_1f1_scaled(m, 1.0, z).checked("1F1 in SSR pdf")
        out = pref * np.exp(-m * ys / s) * scaled
    else:
        raise ValueError(f"unknown method {method!r}")
    return _out(out)


def ssr_pdf_int(dist: SsrDistribution, y):
    """Finite-sum SSR density with the rounded fading order."""
    ys = _nonneg(y, "y")
    b, om = dist.params.b, dist.params.omega
    m, s, coeffs = dist._terms
    pref = (2.0 * b * m / s) ** m / (2.0 * b)
    poly = np.polynomial.polynomial.polyval(om * ys / (2.0 * b * s), coeffs)
    return _out(pref * np.exp(-m * ys / s) * poly)


def ssr_cdf_int(dist: SsrDistribution, y):
    """Finite-sum SSR CDF with the rounded fading order.

    F(y) = (2bm/s)^(m-1) sum_i c_i (omega/2bm)^i gamma(i+1, m y / s),
    s = 2bm + omega.  Raises if the result leaves [0, 1] by more than
    1e-9 (that would be a coding fault, not round-off).
    """
    ys = _nonneg(y, "y")
    b, om = dist.params.b, dist.params.omega
    m, s, coeffs = dist._terms
    r = om / (2.0 * b * m)
    arg = m * ys / s
    total = np.zeros_like(arg)
    ri = 1.0
    for i in range(m):
        total = total + coeffs[i] * ri * lower_incomplete_gamma_int(i + 1, arg)
        ri *= r
    out = (2.0 * b * m / s) ** (m - 1) * total
    if np.any(out < -_CDF_RANGE_SLACK) or np.any(out > 1.0 + _CDF_RANGE_SLACK):
        raise ArithmeticError("integer-m SSR CDF left [0, 1]")
    return _out(np.clip(out, 0.0, 1.0))


_GL_FINE = np.polynomial.legendre.leggauss(20)
_GL_COARSE = np.polynomial.legendre.leggauss(10)


def _gl_segments(f, lo: np.ndarray, hi: np.ndarray, rule) -> np.ndarray:
    nodes, weights = rule
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    return half * (f(pts) @ weights)


def ssr_cdf_general(params: SrParams, y, *, atol: float = 1e-8):
    """SSR CDF for any fading order, by Gauss-Legendre quadrature of the pdf.

    A panel grid (width std/4 up to mean + 40 std, then growing by 1.5x
    until the density is negligible) is integrated with a 20-point rule
    and checked against a 10-point rule; each query then adds the partial
    panel up to ``y``.  Accepts arrays and evaluates them in one pass.
    """
    ys = _nonneg(y, "y")
    flat = ys.ravel()

    def pdf(t):
        return ssr_pdf(params, t)

    h = params.std / 4.0
    cap = params.mean + 40.0 * params.std
    edges = list(np.arange(0.0, cap + h, h))
    for _ in range(400):
        if pdf(edges[-1]) * edges[-1] < 1e-18:
            break
        edges.append(edges[-1] * 1.5)
    else:
        raise ConvergenceError("SSR density tail did not decay")
    edges = np.asarray(edges)

    lo, hi = edges[:-1], edges[1:]
    fine = _gl_segments(pdf, lo, hi, _GL_FINE)
    coarse = _gl_segments(pdf, lo, hi, _GL_COARSE)
    err = float(np.sum(np.abs(fine - coarse)))
    if not err <= atol:
        raise ConvergenceError(f"SSR CDF quadrature error estimate {err:.3g} > {atol}")
    cum = np.concatenate([[0.0], np.cumsum(fine)])

    # past the last edge the remaining mass is below the tail cut-off
    flat = np.minimum(flat, edges[-1])
    k = np.clip(np.searchsorted(edges, flat, side="right") - 1, 0, len(edges) - 1)
    partial = np.zeros_like(flat)
    inside = flat > edges[k]
    if np.any(inside):
        partial[inside] = _gl_segments(pdf, edges[k][inside], flat[inside], _GL_COARSE)
    out = np.clip(cum[k] + partial, 0.0, 1.0).reshape(ys.shape)
    return _out(out)


def scale_ssr(params: SrParams, k: float) -> SrParams:
    """Parameters of ``k * Y`` for ``Y ~ SSR(b, m, omega)``."""
    if not (k > 0 and math.isfinite(k)):
        raise ValueError(f"scale factor must be positive and finite, got {k}")
    return SrParams(b=k * params.b, m=params.m, omega=k * params.omega)


def ssr_mean_int(dist: SsrDistribution) -> float:
    return dist.params.mean


def sample_sr_power(params: SrParams, rng: np.random.Generator, size=None):
    """Draw ``|h|^2`` realisations.

    LOS amplitude is sqrt of a Gamma(m, omega/m) power (Nakagami-m), NLOS
    is circular complex Gaussian with variance ``b`` per component.  Draw
    order is fixed (gamma, real, imaginary) so a seeded stream replays
    exactly.
    """
    los_power = rng.gamma(params.m, params.omega / params.m, size=size)
    sigma = math.sqrt(params.b)
    re = rng.normal(0.0, sigma, size=size)
    im = rng.normal(0.0, sigma, size=size)
    return (np.sqrt(los_power) + re) ** 2 + im**2


def snr_outage(snr_bar, dist: SsrDistribution, gamma):
    """P(SNR <= gamma) for SNR = snr_bar * |h|^2 (linear units)."""
    snr_bar = np.asarray(snr_bar, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if np.any(snr_bar <= 0) or np.any(gamma < 0):
        raise ValueError("snr_bar must be positive and gamma non-negative")
    return ssr_cdf_int(dist, gamma / snr_bar)


def prob_not_noise_limited(snr_bar, sir, dist: SsrDistribution):
    """P(SNR <= SIR); infinite SIR gives 1."""
    snr_bar = np.asarray(snr_bar, dtype=float)
    sir = np.asarray(sir, dtype=float)
    if np.any(snr_bar <= 0) or np.any(sir < 0):
        raise ValueError("snr_bar must be positive and sir non-negative")
    ratio = np.where(np.isinf(sir), 0.0, sir / snr_bar)
    out = np.where(np.isinf(sir), 1.0, ssr_cdf_int(dist, ratio))
    return _out(out)
