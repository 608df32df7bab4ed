import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leosr.antenna import DishPattern, calibrate_aperture, wavelength_m
from leosr.geometry import GroundPoint, SatelliteState, build_hex_layout
from leosr.link_budget import (
    LinkState,
    RfConfig,
    atmospheric_loss_dB,
    beam_gains,
    conducted_power_dBW,
    fspl_dB,
    g_over_t_dBK,
    large_scale_link,
    large_scale_links,
    noise_power_dBW,
    realize_metrics,
    system_temperature_K,
)

CFG = RfConfig()
LAM = wavelength_m(CFG.carrier_GHz)
PATTERN = DishPattern(calibrate_aperture(10, 600, LAM), LAM, 38.5)


def test_fspl_values():
    assert fspl_dB(831.6, 20) == pytest.approx(176.87, abs=0.005)
    assert fspl_dB(600, 20) == pytest.approx(174.03, abs=0.005)
    with pytest.raises(ValueError):
        fspl_dB(0, 20)


def test_fspl_matches_friis():
    d, f = 814.83, 20e9
    friis = 20 * math.log10(4 * math.pi * d * 1e3 * f / 299_792_458.0)
    # 32.45 is the rounded constant, so agreement is to ~0.005 dB
    assert fspl_dB(d, 20) == pytest.approx(friis, abs=0.01)


@given(st.floats(1, 5000), st.floats(0.1, 100))
@settings(max_examples=50, deadline=None)
def test_fspl_doubling_distance_adds_6db(d, f):
    assert fspl_dB(2 * d, f) - fspl_dB(d, f) == pytest.approx(20 * math.log10(2), abs=1e-9)


def test_atmospheric_loss():
    assert atmospheric_loss_dB(90, 0.9) == pytest.approx(0.9)
    assert atmospheric_loss_dB(30, 0.9) == pytest.approx(1.8)
    with pytest.raises(ValueError):
        atmospheric_loss_dB(0)


def test_noise_figures():
    assert system_temperature_K(CFG) == pytest.approx(242.294, abs=1e-3)
    assert noise_power_dBW(CFG) == pytest.approx(-118.735, abs=1e-3)
    assert g_over_t_dBK(CFG) == pytest.approx(15.857, abs=1e-3)
    assert conducted_power_dBW(CFG) == pytest.approx(4 + 10 * math.log10(400) - 38.5)


def test_rf_validation():
    with pytest.raises(ValueError):
        RfConfig(bandwidth_MHz=0)
    with pytest.raises(ValueError):
        RfConfig(zenith_attenuation_dB=-1)


def _nadir_link(reuse=1, cfg=CFG, el=90.0, user=GroundPoint(0, 0)):
    lay = build_hex_layout(10, 2, reuse)
    return large_scale_link(cfg, lay, SatelliteState(600, el), user, lay.center_index, PATTERN)


def test_nadir_snr_bar():
    link = _nadir_link()
    # hand budget: EIRP 30.02 dBW, +39.7 rx gain, -174.03 FSPL, -0.9 atm, +118.74 noise
    hand = 4 + 10 * math.log10(400) + 39.7 - fspl_dB(600, 20) - 0.9 - noise_power_dBW(CFG)
    assert 10 * math.log10(link.snr_bar) == pytest.approx(hand, abs=1e-9)
    assert 10 * math.log10(link.snr_bar) == pytest.approx(13.52, abs=0.01)


def test_sir_is_power_independent():
    a = _nadir_link(user=GroundPoint(3, 2))
    b = _nadir_link(cfg=dataclasses.replace(CFG, eirp_density_dBW_per_MHz=CFG.eirp_density_dBW_per_MHz + 3.0103),
                    user=GroundPoint(3, 2))
    assert a.sir == b.sir
    assert b.snr_bar / a.snr_bar == pytest.approx(2.0, rel=1e-4)


def test_inr_over_snr_is_inverse_sir():
    link = _nadir_link(user=GroundPoint(4, -1))
    assert link.inr_bar / link.snr_bar == pytest.approx(1 / link.sir, rel=1e-12)


def test_reuse3_reduces_interference():
    one, three = _nadir_link(1), _nadir_link(3)
    assert three.inr_bar < one.inr_bar
    assert three.sir > one.sir
    assert three.snr_bar == one.snr_bar


def test_single_beam_layout_has_infinite_sir():
    lay = build_hex_layout(10, 0, 1)
    link = large_scale_link(CFG, lay, SatelliteState(600, 90), GroundPoint(0, 0), 0, PATTERN)
    assert link.sir == math.inf and link.inr_bar == 0.0


def test_bad_serving_cell():
    lay = build_hex_layout()
    with pytest.raises(IndexError):
        large_scale_link(CFG, lay, SatelliteState(600, 90), GroundPoint(0, 0), 19, PATTERN)


def test_vectorised_matches_scalar():
    lay = build_hex_layout(10, 2, 3)
    sat = SatelliteState(600, 45)
    users = np.array([[0.0, 0.0], [5.0, 1.0], [-3.0, 7.0]])
    serving = lay.associate(users)
    links, g0 = large_scale_links(CFG, lay, sat, users, serving, PATTERN)
    for i, (x, y) in enumerate(users):
        one = large_scale_link(CFG, lay, sat, GroundPoint(x, y), int(serving[i]), PATTERN)
        assert links.snr_bar[i] == pytest.approx(one.snr_bar, rel=1e-14)
        assert links.sir[i] == pytest.approx(one.sir, rel=1e-14)
    gains = beam_gains(lay, sat.position, users, PATTERN)
    assert gains.shape == (3, 19)
    assert g0 == pytest.approx(gains[np.arange(3), serving])


def test_boresight_gain_is_peak():
    lay = build_hex_layout()
    g = beam_gains(lay, SatelliteState(600, 90).position, lay.centers_xy, PATTERN)
    assert 10 * np.log10(np.diag(g)) == pytest.approx(np.full(19, 38.5), abs=1e-9)


@given(st.floats(1e-3, 1e3), st.floats(1e-4, 1e3), st.floats(0, 50))
@settings(max_examples=200, deadline=None)
def test_sinr_bounded_by_snr_and_sir(snr_bar, inr_bar, h2):
    link = LinkState(snr_bar, inr_bar, snr_bar / inr_bar)
    snr, inr, sinr = realize_metrics(link, h2)
    assert sinr <= min(snr, link.sir) * (1 + 1e-12) + 1e-300


def test_realize_metrics_broadcast_and_monotone():
    link = LinkState(np.array([10.0, 2.0]), np.array([1.0, 0.5]), np.array([10.0, 4.0]))
    h2 = np.sort(np.random.default_rng(0).exponential(size=(2, 50)), axis=1)
    snr, inr, sinr = realize_metrics(link, h2)
    assert snr.shape == (2, 50)
    assert np.all(np.diff(snr, axis=1) >= 0) and np.all(np.diff(sinr, axis=1) >= 0)
    # SINR approaches SIR from below as h2 grows
    assert np.all(sinr < link.sir[:, None])
    with pytest.raises(ValueError):
        realize_metrics(link, -np.ones((2, 1)))
