"""
Monte Carlo engine: user grids, spatial maps, pooled CDFs and sweeps.

Every user point draws its channel realisations from its own Philox
stream keyed by ``(seed, point_index)``.  Points may be processed by any
number of threads; results are written back by index, so the output only
depends on the scenario.
"""
from __future__ import annotations

import enum
import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property

import numpy as np

from .antenna import DishPattern, calibrate_aperture, wavelength_m
from .geometry import BeamLayout, SatelliteState, build_hex_layout
from .link_budget import LinkState, RfConfig, db, large_scale_links, realize_metrics, undb
from .sr_stats import ShadowingLevel, SsrDistribution, prob_not_noise_limited, sample_sr_power, scale_ssr, snr_outage, ssr_cdf_int

__all__ = [
    "DB_FLOOR",
    "THREADS_ENV",
    "Metric",
    "Statistic",
    "Region",
    "LayoutSpec",
    "UserGrid",
    "Scenario",
    "MetricDistribution",
    "SpatialMap",
    "PointSamples",
    "point_rng",
    "user_points",
    "simulate_points",
    "run_spatial_map",
    "run_cdf",
    "closed_form_cdf",
    "sweep",
    "outage_table",
]

DB_FLOOR = -200.0
THREADS_ENV = "LEOSR_THREADS"


class Metric(str, enum.Enum):
    SNR = "SNR"
    INR = "INR"
    SINR = "SINR"
    SIR = "SIR"
    GAIN = "GAIN"

    @classmethod
    def parse(cls, value) -> "Metric":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown metric {value!r}") from None


class Statistic(str, enum.Enum):
    SINGLE = "single-realization"
    LARGE_SCALE = "large-scale"
    MEAN = "mean"


class Region(str, enum.Enum):
    CENTER_CELL = "center-cell"
    FOOTPRINT = "footprint"


@dataclass(frozen=True)
class LayoutSpec:
    cell_radius_km: float = 10.0
    rings: int = 2
    reuse_factor: int = 1

    def __post_init__(self):
        if not self.cell_radius_km > 0:
            raise ValueError("cell radius must be positive")
        if isinstance(self.rings, bool) or int(self.rings) != self.rings or self.rings < 0:
            raise ValueError("rings must be a non-negative integer")
        if self.reuse_factor not in (1, 3):
            raise ValueError(f"reuse factor must be 1 or 3, got {self.reuse_factor!r}")

    def build(self) -> BeamLayout:
        return build_hex_layout(self.cell_radius_km, self.rings, self.reuse_factor)


@dataclass(frozen=True)
class UserGrid:
    """Either a regular grid (resolution, optional map extent) or explicit points."""

    resolution_km: float = 0.25
    extent_km: float | None = None
    points: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if not self.resolution_km > 0:
            raise ValueError("grid resolution must be positive")
        if self.extent_km is not None and not self.extent_km > 0:
            raise ValueError("grid extent must be positive")
        if self.points is not None:
            object.__setattr__(self, "points", tuple((float(x), float(y)) for x, y in self.points))
            if not self.points:
                raise ValueError("explicit point list is empty")


@dataclass(frozen=True)
class Scenario:
    rf: RfConfig = field(default_factory=RfConfig)
    layout: LayoutSpec = field(default_factory=LayoutSpec)
    sat: SatelliteState = field(default_factory=lambda: SatelliteState(600.0, 90.0, 0.0))
    shadowing: ShadowingLevel = ShadowingLevel.LIGHT
    user_grid: UserGrid = field(default_factory=UserGrid)
    realizations_per_point: int = 200
    seed: int = 0
    aperture_radius_m: float | None = None

    def __post_init__(self):
        if int(self.realizations_per_point) != self.realizations_per_point or self.realizations_per_point < 1:
            raise ValueError("realizations_per_point must be a positive integer")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["shadowing"] = self.shadowing.name.lower()
        pts = self.user_grid.points
        d["user_grid"]["points"] = None if pts is None else [list(p) for p in pts]
        return d

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @cached_property
    def beam_layout(self) -> BeamLayout:
        return self.layout.build()

    @cached_property
    def pattern(self) -> DishPattern:
        lam = wavelength_m(self.rf.carrier_GHz)
        a = self.aperture_radius_m
        if a is None:
            # the dish is sized once, for the overhead pass
            a = calibrate_aperture(self.layout.cell_radius_km, self.sat.altitude_km, lam)
        return DishPattern(a, lam, self.rf.peak_tx_gain_dBi)


@dataclass(frozen=True)
class MetricDistribution:
    """CDF of one metric in dB, from pooled samples or a closed form.

    Empirical: ``values_dB`` are the sorted samples and ``cum_prob`` is
    ``i/n``.  Closed form: the CDF tabulated on a dB grid.
    """

    metric: Metric
    values_dB: np.ndarray
    cum_prob: np.ndarray
    source: str
    kind: str = "empirical"

    @classmethod
    def from_samples(cls, metric: Metric, samples_dB, source: str) -> "MetricDistribution":
        v = np.sort(np.asarray(samples_dB, dtype=float).ravel())
        if v.size == 0:
            raise ValueError("no samples")
        return cls(metric, v, np.arange(1, v.size + 1) / v.size, source, "empirical")

    @property
    def samples_dB(self) -> np.ndarray:
        if self.kind != "empirical":
            raise AttributeError("closed-form distribution has no samples")
        return self.values_dB

    def __len__(self) -> int:
        return self.values_dB.size

    def cdf(self, x_dB):
        x = np.asarray(x_dB, dtype=float)
        if self.kind == "empirical":
            out = np.searchsorted(self.values_dB, x, side="right") / self.values_dB.size
        else:
            out = np.interp(x, self.values_dB, self.cum_prob, left=0.0, right=1.0)
        return float(out) if out.ndim == 0 else out

    def percentile(self, q):
        """Value (dB) below which ``q`` percent of the mass lies."""
        qs = np.asarray(q, dtype=float) / 100.0
        if np.any(qs < 0) or np.any(qs > 1):
            raise ValueError("percentile must be in [0, 100]")
        if self.kind == "empirical":
            out = np.quantile(self.values_dB, qs)
        else:
            out = np.interp(qs, self.cum_prob, self.values_dB)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def median(self) -> float:
        return self.percentile(50.0)


@dataclass(frozen=True)
class SpatialMap:
    metric: Metric
    statistic: Statistic
    grid: np.ndarray  # (ny, nx), dB; rows follow ys
    xs: np.ndarray
    ys: np.ndarray

    @property
    def extent(self) -> dict:
        return {"x_min": float(self.xs[0]), "x_max": float(self.xs[-1]),
                "y_min": float(self.ys[0]), "y_max": float(self.ys[-1])}

    def value_at(self, x_km: float, y_km: float) -> float:
        i = int(np.argmin(np.abs(self.ys - y_km)))
        j = int(np.argmin(np.abs(self.xs - x_km)))
        return float(self.grid[i, j])


@dataclass(frozen=True)
class PointSamples:
    xy: np.ndarray          # (n, 2)
    serving: np.ndarray     # (n,)
    link: LinkState         # arrays of shape (n,)
    serving_gain: np.ndarray
    h2: np.ndarray          # (n, k)

    def metric_linear(self, metric: Metric) -> np.ndarray:
        snr, inr, sinr = realize_metrics(self.link, self.h2)
        if metric is Metric.SNR:
            return snr
        if metric is Metric.INR:
            return inr
        if metric is Metric.SINR:
            return sinr
        if metric is Metric.SIR:
            return np.broadcast_to(np.asarray(self.link.sir)[:, None], self.h2.shape)
        raise ValueError(f"{metric.value} is not a per-realisation metric")


def to_db(x) -> np.ndarray:
    """dB with zero (and anything below the floor) clamped to DB_FLOOR."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = db(x)
    return np.maximum(out, DB_FLOOR)


def point_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(int(index),))))


def _thread_count(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, int(threads))


def _axis(half_width: float, res: float) -> np.ndarray:
    n = int(math.floor(half_width / res + 1e-9))
    return res * np.arange(-n, n + 1)


def _inside_hexes(xy: np.ndarray, layout: BeamLayout, cells: np.ndarray) -> np.ndarray:
    c = layout.centers_xy[cells]
    dx = np.abs(xy[:, 0] - c[:, 0])
    dy = np.abs(xy[:, 1] - c[:, 1])
    r = layout.cell_radius_km
    eps = 1e-9
    return (dx <= math.sqrt(3.0) / 2.0 * r + eps) & (dy <= r - dx / math.sqrt(3.0) + eps)


def user_points(scenario: Scenario, region: Region | str = Region.CENTER_CELL) -> np.ndarray:
    """User locations (n, 2) for a CDF region, or the explicit point list."""
    if scenario.user_grid.points is not None:
        return np.array(scenario.user_grid.points, dtype=float)
    region = Region(region)
    layout = scenario.beam_layout
    res = scenario.user_grid.resolution_km
    r = layout.cell_radius_km
    if region is Region.CENTER_CELL:
        xs, ys = _axis(r, res), _axis(r, res)
    else:
        reach = np.abs(layout.centers_xy).max() + r
        xs = ys = _axis(reach, res)
    X, Y = np.meshgrid(xs, ys)
    xy = np.column_stack([X.ravel(), Y.ravel()])
    cells = layout.associate(xy)
    if region is Region.CENTER_CELL:
        keep = cells == layout.center_index
    else:
        keep = _inside_hexes(xy, layout, cells)
    return xy[keep]


def _links(scenario: Scenario, xy: np.ndarray):
    layout = scenario.beam_layout
    serving = layout.associate(xy)
    link, g0 = large_scale_links(scenario.rf, layout, scenario.sat, xy, serving, scenario.pattern)
    return serving, link, g0


def _draw(scenario: Scenario, n_points: int, k: int, threads: int | None) -> np.ndarray:
    params = scenario.shadowing.params
    out = np.empty((n_points, k))

    def work(indices):
        for i in indices:
            out[i] = sample_sr_power(params, point_rng(scenario.seed, i), size=k)

    n_threads = _thread_count(threads)
    if n_threads == 1 or n_points < 2:
        work(range(n_points))
    else:
        chunks = np.array_split(np.arange(n_points), n_threads * 4)
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            list(pool.map(work, chunks))
    return out


def simulate_points(scenario: Scenario, region: Region | str = Region.CENTER_CELL,
                    *, threads: int | None = None) -> PointSamples:
    xy = user_points(scenario, region)
    serving, link, g0 = _links(scenario, xy)
    h2 = _draw(scenario, len(xy), scenario.realizations_per_point, threads)
    return PointSamples(xy, serving, link, g0, h2)


def run_cdf(scenario: Scenario, metric, region: Region | str = Region.CENTER_CELL,
            *, threads: int | None = None) -> MetricDistribution:
    """Pool every realisation at every user point of ``region`` into one CDF."""
    metric = Metric.parse(metric)
    samples = simulate_points(scenario, region, threads=threads)
    values = samples.metric_linear(metric)
    return MetricDistribution.from_samples(metric, to_db(values), scenario.fingerprint())


def run_spatial_map(scenario: Scenario, metric, statistic=Statistic.LARGE_SCALE,
                    *, threads: int | None = None) -> SpatialMap:
    """Metric over a square grid centred on the origin.

    ``large-scale`` uses |h|^2 = 1, ``mean`` multiplies by 2b + omega,
    ``single-realization`` draws one |h|^2 per point.  GAIN is the serving
    beam's transmit gain in dBi and SIR is deterministic, so both ignore
    ``statistic``.
    """
    metric = Metric.parse(metric)
    statistic = Statistic(statistic)
    grid = scenario.user_grid
    if grid.points is not None:
        raise ValueError("spatial maps need a regular grid, not a point list")
    extent = grid.extent_km
    if extent is None:
        extent = 1.5 * math.sqrt(3.0) * scenario.layout.cell_radius_km + scenario.layout.cell_radius_km
    xs = ys = _axis(extent, grid.resolution_km)
    X, Y = np.meshgrid(xs, ys)
    xy = np.column_stack([X.ravel(), Y.ravel()])
    _, link, g0 = _links(scenario, xy)

    if metric is Metric.GAIN:
        values = g0
    elif metric is Metric.SIR:
        values = link.sir
    else:
        if statistic is Statistic.LARGE_SCALE:
            h2 = np.ones(len(xy))
        elif statistic is Statistic.MEAN:
            if metric is Metric.SINR:
                raise ValueError("mean SINR has no closed form; use single-realization")
            h2 = np.full(len(xy), scenario.shadowing.params.mean)
        else:
            h2 = _draw(scenario, len(xy), 1, threads)[:, 0]
        snr, inr, sinr = realize_metrics(link, h2)
        values = {Metric.SNR: snr, Metric.INR: inr, Metric.SINR: sinr}[metric]
    return SpatialMap(metric, statistic, to_db(values).reshape(X.shape), xs, ys)


def closed_form_cdf(link: LinkState, shadowing: ShadowingLevel, metric, grid_dB) -> MetricDistribution:
    """Integer-m CDF of SNR or INR at one user, evaluated on a dB grid."""
    metric = Metric.parse(metric)
    if metric is Metric.SNR:
        scale = float(link.snr_bar)
    elif metric is Metric.INR:
        scale = float(link.inr_bar)
        if not scale > 0:
            raise ValueError("INR closed form needs a positive large-scale INR")
    else:
        raise ValueError("closed form exists only for SNR and INR")
    grid = np.sort(np.asarray(grid_dB, dtype=float))
    dist = SsrDistribution(scale_ssr(shadowing.params, scale))
    probs = np.asarray(ssr_cdf_int(dist, undb(grid)), dtype=float)
    return MetricDistribution(metric, grid, probs, "closed-form", "closed-form")


_SWEEP_AXES = ("elevation", "shadowing", "reuse")


def _with_axis(base: Scenario, axis: str, value) -> Scenario:
    if axis == "elevation":
        sat = SatelliteState.from_sky_angle(base.sat.altitude_km, float(value), base.sat.azimuth_deg)
        # keep the dish sized for the base pass
        return replace(base, sat=sat, aperture_radius_m=base.pattern.aperture_radius_m)
    if axis == "shadowing":
        level = value if isinstance(value, ShadowingLevel) else ShadowingLevel.from_name(str(value))
        return replace(base, shadowing=level)
    if axis == "reuse":
        if int(value) not in (1, 3):
            raise ValueError(f"reuse factor must be 1 or 3, got {value!r}")
        return replace(base, layout=replace(base.layout, reuse_factor=int(value)))
    raise ValueError(f"unknown sweep axis {axis!r} (expected one of {_SWEEP_AXES})")


def sweep(base: Scenario, axis: str, values, metric, region: Region | str = Region.CENTER_CELL,
          *, threads: int | None = None) -> list[MetricDistribution]:
    """One pooled CDF per axis value; every run reuses the base seed."""
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    scenarios = [_with_axis(base, axis, v) for v in values]
    return [run_cdf(s, metric, region, threads=threads) for s in scenarios]


def outage_table(scenario: Scenario, thresholds_dB, region: Region | str = Region.CENTER_CELL):
    """Closed-form SNR outage and P(SNR <= SIR) per user point and threshold.

    Returns ``(xy, thresholds, p_outage, p_not_noise_limited)`` where
    ``p_outage`` has shape (points, thresholds).
    """
    xy = user_points(scenario, region)
    _, link, _ = _links(scenario, xy)
    thr = np.asarray(thresholds_dB, dtype=float).ravel()
    dist = SsrDistribution(scenario.shadowing.params)
    snr_bar = np.asarray(link.snr_bar)[:, None]
    p_out = snr_outage(snr_bar, dist, undb(thr)[None, :])
    p_nnl = prob_not_noise_limited(np.asarray(link.snr_bar), np.asarray(link.sir), dist)
    return xy, thr, np.asarray(p_out), np.asarray(p_nnl)
