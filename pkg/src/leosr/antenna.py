"""
Circular-aperture dish pattern for the satellite spot beams.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .specfun import bessel_j1

__all__ = [
    "SPEED_OF_LIGHT",
    "FIRST_J1_ZERO",
    "DishPattern",
    "normalized_gain",
    "gain_toward",
    "calibrate_aperture",
    "half_power_argument",
    "wavelength_m",
]

SPEED_OF_LIGHT = 299_792_458.0
FIRST_J1_ZERO = 3.8317059702075125


def wavelength_m(carrier_GHz: float) -> float:
    return SPEED_OF_LIGHT / (carrier_GHz * 1e9)


@dataclass(frozen=True)
class DishPattern:
    aperture_radius_m: float
    wavelength_m: float
    peak_gain_dBi: float = 38.5

    def __post_init__(self):
        if not self.aperture_radius_m > 0:
            raise ValueError("aperture radius must be positive")
        if not self.wavelength_m > 0:
            raise ValueError("wavelength must be positive")

    @property
    def ka(self) -> float:
        return 2.0 * math.pi / self.wavelength_m * self.aperture_radius_m

    @property
    def peak_gain_linear(self) -> float:
        return 10.0 ** (self.peak_gain_dBi / 10.0)

    @property
    def first_null_deg(self) -> float:
        return math.degrees(math.asin(min(1.0, FIRST_J1_ZERO / self.ka)))


def _airy(u: np.ndarray) -> np.ndarray:
    """4 |J1(u)/u|^2 with the u -> 0 limit of 1."""
    out = np.ones_like(u)
    nz = u != 0
    # below 1e-6 the series 1 - u^2/8 is already exact in doubles
    tiny = nz & (np.abs(u) < 1e-6)
    out[tiny] = 1.0 - u[tiny] ** 2 / 8.0
    big = nz & ~tiny
    ratio = bessel_j1(u[big]) / u[big]
    out[big] = 4.0 * ratio * ratio
    return out


def normalized_gain(pattern: DishPattern, zeta_deg):
    """Relative gain (peak = 1) at ``zeta_deg`` off boresight, 0..90 deg."""
    z = np.asarray(zeta_deg, dtype=float)
    if np.any(np.isnan(z)) or np.any(z < 0) or np.any(z > 90):
        raise ValueError("off-boresight angle must be within [0, 90] degrees")
    u = pattern.ka * np.sin(np.radians(np.atleast_1d(z)))
    out = _airy(u).reshape(z.shape)
    return float(out) if out.ndim == 0 else out


def gain_toward(pattern: DishPattern, zeta_deg):
    """Linear transmit gain toward ``zeta_deg``."""
    return pattern.peak_gain_linear * normalized_gain(pattern, zeta_deg)


def half_power_argument() -> float:
    """The u in (0, first zero) where 4 |J1(u)/u|^2 = 1/2."""
    f = lambda u: 4.0 * (bessel_j1(u) / u) ** 2 - 0.5
    return brentq(f, 1e-3, FIRST_J1_ZERO, xtol=1e-15, rtol=1e-15)


def calibrate_aperture(cell_radius_km: float, altitude_km: float, wavelength_m: float) -> float:
    """Dish radius (m) that puts the -3 dB contour on the nadir cell edge.

    The edge angle is ``atan(cell_radius / altitude)``; the root is sought
    on the main lobe only.
    """
    if min(cell_radius_km, altitude_km, wavelength_m) <= 0:
        raise ValueError("inputs must be positive")
    zeta = math.atan2(cell_radius_km, altitude_km)
    s = math.sin(zeta)
    k = 2.0 * math.pi / wavelength_m

    def excess(a):
        return float(_airy(np.array([k * a * s]))[0]) - 0.5

    lo, hi = 1e-9 / (k * s), FIRST_J1_ZERO / (k * s)
    if excess(lo) * excess(hi) > 0:
        raise ValueError("no half-power point on the main lobe")
    return brentq(excess, lo, hi, xtol=1e-15, rtol=1e-15)
