"""
Large-scale downlink budget: path loss, noise, and the SNR/INR/SIR ratios
that the channel power ``|h|^2`` later scales.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .antenna import DishPattern, gain_toward
from .geometry import BeamLayout, GroundPoint, SatelliteState, off_boresight_angle, user_slant_and_elevation

__all__ = [
    "BOLTZMANN",
    "RfConfig",
    "LinkState",
    "fspl_dB",
    "atmospheric_loss_dB",
    "system_temperature_K",
    "noise_power_dBW",
    "g_over_t_dBK",
    "conducted_power_dBW",
    "beam_gains",
    "large_scale_links",
    "large_scale_link",
    "realize_metrics",
    "db",
    "undb",
]

BOLTZMANN = 1.380649e-23


def db(x):
    return 10.0 * np.log10(x)


def undb(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


@dataclass(frozen=True)
class RfConfig:
    """Radio parameters; defaults are the Ka-band LEO-600 set."""

    carrier_GHz: float = 20.0
    bandwidth_MHz: float = 400.0
    eirp_density_dBW_per_MHz: float = 4.0
    peak_tx_gain_dBi: float = 38.5
    rx_gain_dBi: float = 39.7
    noise_figure_dB: float = 1.2
    antenna_temp_K: float = 150.0
    zenith_attenuation_dB: float = 0.9

    def __post_init__(self):
        for name in ("carrier_GHz", "bandwidth_MHz", "antenna_temp_K"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.zenith_attenuation_dB < 0:
            raise ValueError("zenith attenuation must be non-negative")


@dataclass(frozen=True)
class LinkState:
    """Large-scale ratios (linear).  Fields may be scalars or arrays."""

    snr_bar: float | np.ndarray
    inr_bar: float | np.ndarray
    sir: float | np.ndarray


def fspl_dB(distance_km, carrier_GHz):
    """Free-space loss with f in GHz and d in metres."""
    d = np.asarray(distance_km, dtype=float)
    if np.any(d <= 0) or carrier_GHz <= 0:
        raise ValueError("distance and frequency must be positive")
    out = 32.45 + 20.0 * np.log10(carrier_GHz) + 20.0 * np.log10(d * 1e3)
    return float(out) if np.ndim(out) == 0 else out


def atmospheric_loss_dB(elevation_deg, zenith_attenuation_dB: float = 0.9):
    el = np.asarray(elevation_deg, dtype=float)
    if np.any(el <= 0) or np.any(el > 90):
        raise ValueError("elevation must be in (0, 90] degrees")
    out = zenith_attenuation_dB / np.sin(np.radians(el))
    return float(out) if np.ndim(out) == 0 else out


def system_temperature_K(cfg: RfConfig) -> float:
    return cfg.antenna_temp_K + 290.0 * (10.0 ** (cfg.noise_figure_dB / 10.0) - 1.0)


def noise_power_dBW(cfg: RfConfig) -> float:
    return 10.0 * math.log10(BOLTZMANN * system_temperature_K(cfg) * cfg.bandwidth_MHz * 1e6)


def g_over_t_dBK(cfg: RfConfig) -> float:
    return cfg.rx_gain_dBi - 10.0 * math.log10(system_temperature_K(cfg))


def conducted_power_dBW(cfg: RfConfig) -> float:
    """Per-beam conducted power: EIRP over the band minus peak antenna gain."""
    return cfg.eirp_density_dBW_per_MHz + 10.0 * math.log10(cfg.bandwidth_MHz) - cfg.peak_tx_gain_dBi


def beam_gains(layout: BeamLayout, sat_pos, users_xy, pattern: DishPattern) -> np.ndarray:
    """Linear transmit gain of every beam toward every user, shape (users, beams)."""
    users = np.asarray(users_xy, dtype=float).reshape(-1, 2)
    zeta = off_boresight_angle(sat_pos, layout.centers_xy[None, :, :], users[:, None, :])
    return gain_toward(pattern, np.atleast_2d(zeta))


def large_scale_links(cfg: RfConfig, layout: BeamLayout, sat: SatelliteState, users_xy,
                      serving, pattern: DishPattern) -> tuple[LinkState, np.ndarray]:
    """Vectorised large-scale link for many users.

    Returns the LinkState (arrays) and the serving-beam linear gain per
    user.  Path loss uses each user's own slant range and elevation.
    """
    users = np.asarray(users_xy, dtype=float).reshape(-1, 2)
    serving = np.broadcast_to(np.asarray(serving, dtype=int), (len(users),))
    if np.any(serving < 0) or np.any(serving >= layout.n_beams):
        raise IndexError("serving cell index out of range")
    sat_pos = sat.position
    gains = beam_gains(layout, sat_pos, users, pattern)
    rows = np.arange(len(users))
    g0 = gains[rows, serving]

    colors = np.asarray(layout.colors)
    co = colors[None, :] == colors[serving][:, None]
    co[rows, serving] = False
    g_int = np.where(co, gains, 0.0).sum(axis=1)

    dist, elev = user_slant_and_elevation(sat_pos, users)
    path_loss = fspl_dB(dist, cfg.carrier_GHz) + atmospheric_loss_dB(elev, cfg.zenith_attenuation_dB)
    budget_dB = conducted_power_dBW(cfg) + cfg.rx_gain_dBi - path_loss - noise_power_dBW(cfg)
    scale = undb(budget_dB)

    snr_bar = scale * g0
    inr_bar = scale * g_int
    with np.errstate(divide="ignore"):
        sir = np.where(g_int > 0, g0 / np.where(g_int > 0, g_int, 1.0), np.inf)
    return LinkState(snr_bar, inr_bar, sir), g0


def large_scale_link(cfg: RfConfig, layout: BeamLayout, sat: SatelliteState, user: GroundPoint,
                     serving_cell: int, pattern: DishPattern) -> LinkState:
    if not 0 <= serving_cell < layout.n_beams:
        raise IndexError(f"serving cell {serving_cell} not in layout of {layout.n_beams}")
    link, _ = large_scale_links(cfg, layout, sat, [[user.x_km, user.y_km]], serving_cell, pattern)
    return LinkState(float(link.snr_bar[0]), float(link.inr_bar[0]), float(link.sir[0]))


def realize_metrics(link: LinkState, h2):
    """SNR, INR and SINR for channel power draws ``h2`` shared by all beams.

    Arrays broadcast: per-user LinkState fields of shape (n,) need ``h2``
    of shape (n, k).
    """
    h2 = np.asarray(h2, dtype=float)
    if np.any(h2 < 0):
        raise ValueError("channel power must be non-negative")
    snr_bar = np.asarray(link.snr_bar, dtype=float)
    inr_bar = np.asarray(link.inr_bar, dtype=float)
    if h2.ndim > snr_bar.ndim and snr_bar.ndim > 0:
        snr_bar = snr_bar.reshape(snr_bar.shape + (1,) * (h2.ndim - snr_bar.ndim))
        inr_bar = inr_bar.reshape(snr_bar.shape)
    snr = snr_bar * h2
    inr = inr_bar * h2
    sinr = snr / (1.0 + inr)
    if snr.ndim == 0:
        return float(snr), float(inr), float(sinr)
    return snr, inr, sinr
