"""
Satellite, footprint and user geometry.

Ground coordinates live on a flat tangent plane (km) whose origin is the
centre of the middle cell; ``z`` points up.  The satellite position uses
the spherical-Earth slant range, so it is exact at the origin and the flat
plane only enters through per-user offsets (tens of km, far below R_E).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EARTH_RADIUS_KM",
    "SatelliteState",
    "GroundPoint",
    "BeamLayout",
    "slant_distance",
    "satellite_position",
    "build_hex_layout",
    "off_boresight_angle",
    "user_slant_and_elevation",
    "fold_elevation",
]

EARTH_RADIUS_KM = 6378.0
MAX_GROUND_OFFSET_KM = 500.0


def _check_elevation(elevation_deg: float) -> None:
    if not (0.0 < elevation_deg <= 90.0):
        raise ValueError(f"elevation must be in (0, 90] degrees, got {elevation_deg}")


@dataclass(frozen=True)
class SatelliteState:
    altitude_km: float
    elevation_deg: float
    azimuth_deg: float = 0.0

    def __post_init__(self):
        if not self.altitude_km > 0:
            raise ValueError("altitude must be positive")
        _check_elevation(self.elevation_deg)
        if not (0.0 <= self.azimuth_deg < 360.0):
            raise ValueError("azimuth must be in [0, 360) degrees")

    @classmethod
    def from_sky_angle(cls, altitude_km: float, elevation_deg: float,
                       azimuth_deg: float = 0.0) -> "SatelliteState":
        """Build a state allowing elevations past zenith (up to 180 deg)."""
        el, az = fold_elevation(elevation_deg, azimuth_deg)
        return cls(altitude_km, el, az)

    @property
    def slant_km(self) -> float:
        return slant_distance(self.altitude_km, self.elevation_deg)

    @property
    def position(self) -> np.ndarray:
        return satellite_position(self)


def fold_elevation(elevation_deg: float, azimuth_deg: float = 0.0) -> tuple[float, float]:
    """Map an elevation in (90, 180) to the mirror pass on the other side.

    An elevation of 135 deg at azimuth 0 is the same sky position as 45 deg
    at azimuth 180.
    """
    if not (0.0 < elevation_deg < 180.0):
        raise ValueError(f"elevation must be in (0, 180) degrees, got {elevation_deg}")
    az = azimuth_deg % 360.0
    if elevation_deg > 90.0:
        return 180.0 - elevation_deg, (az + 180.0) % 360.0
    return float(elevation_deg), az


@dataclass(frozen=True)
class GroundPoint:
    x_km: float
    y_km: float

    def __post_init__(self):
        if math.hypot(self.x_km, self.y_km) > MAX_GROUND_OFFSET_KM:
            raise ValueError(
                f"ground point further than {MAX_GROUND_OFFSET_KM} km from the origin"
            )

    def as_array(self) -> np.ndarray:
        return np.array([self.x_km, self.y_km, 0.0])


@dataclass(frozen=True)
class BeamLayout:
    """Hexagonal cells, one spot beam per cell, aimed at the cell centre.

    ``axial`` keeps the integer (q, r) lattice coordinates alongside the
    planar centres.
    """

    cell_centers: tuple[GroundPoint, ...]
    cell_radius_km: float
    reuse_factor: int
    colors: tuple[int, ...]
    axial: tuple[tuple[int, int], ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.reuse_factor not in (1, 3):
            raise ValueError("reuse factor must be 1 or 3")
        if len(self.colors) != len(self.cell_centers):
            raise ValueError("one colour per cell required")
        if any(not 0 <= c < self.reuse_factor for c in self.colors):
            raise ValueError("colour outside [0, reuse_factor)")

    @property
    def n_beams(self) -> int:
        return len(self.cell_centers)

    @property
    def centers_xy(self) -> np.ndarray:
        return np.array([[c.x_km, c.y_km] for c in self.cell_centers], dtype=float)

    @property
    def center_index(self) -> int:
        return int(np.argmin(np.hypot(*self.centers_xy.T)))

    def co_channel_mask(self, serving: int) -> np.ndarray:
        """Beams sharing the serving cell's colour, serving beam excluded."""
        colors = np.asarray(self.colors)
        mask = colors == colors[serving]
        mask[serving] = False
        return mask

    def associate(self, xy) -> np.ndarray:
        """Serving cell per user: the cell whose centre is nearest.

        Inside the layout this is exactly hexagon membership; points past
        the footprint edge fall to the nearest border cell.
        """
        pts = np.asarray(xy, dtype=float).reshape(-1, 2)
        d2 = ((pts[:, None, :] - self.centers_xy[None, :, :]) ** 2).sum(axis=2)
        return np.argmin(d2, axis=1)


def slant_distance(altitude_km, elevation_deg, earth_radius_km: float = EARTH_RADIUS_KM):
    """Straight-line range from a ground point to a satellite at a given elevation."""
    el = np.asarray(elevation_deg, dtype=float)
    if np.any(el <= 0) or np.any(el > 90):
        raise ValueError("elevation must be in (0, 90] degrees")
    if np.any(np.asarray(altitude_km) <= 0):
        raise ValueError("altitude must be positive")
    h = np.asarray(altitude_km, dtype=float)
    re_sin = earth_radius_km * np.sin(np.radians(el))
    d = np.sqrt(re_sin**2 + h**2 + 2.0 * h * earth_radius_km) - re_sin
    return float(d) if np.ndim(d) == 0 else d


def satellite_position(state: SatelliteState) -> np.ndarray:
    d = state.slant_km
    el = math.radians(state.elevation_deg)
    az = math.radians(state.azimuth_deg)
    return np.array([
        d * math.cos(el) * math.cos(az),
        d * math.cos(el) * math.sin(az),
        d * math.sin(el),
    ])


def build_hex_layout(cell_radius_km: float = 10.0, rings: int = 2,
                     reuse_factor: int = 1) -> BeamLayout:
    """Hexagonal tessellation with ``rings`` rings around a centre cell.

    Hexagons are pointy-topped with circumradius ``cell_radius_km``;
    neighbouring centres are sqrt(3) radii apart, one of them straight
    along +x.  Reuse-3 colouring is ``(q - r) mod 3``.
    """
    if not cell_radius_km > 0:
        raise ValueError("cell radius must be positive")
    if rings < 0 or int(rings) != rings:
        raise ValueError("rings must be a non-negative integer")
    if reuse_factor not in (1, 3):
        raise ValueError("reuse factor must be 1 or 3")
    spacing = math.sqrt(3.0) * cell_radius_km
    axial, centers, colors = [], [], []
    for r in range(-rings, rings + 1):
        for q in range(-rings, rings + 1):
            if abs(q + r) > rings:
                continue
            axial.append((q, r))
            centers.append(GroundPoint(spacing * (q + 0.5 * r), spacing * (math.sqrt(3.0) / 2.0) * r))
            colors.append((q - r) % 3 if reuse_factor == 3 else 0)
    return BeamLayout(tuple(centers), float(cell_radius_km), reuse_factor,
                      tuple(colors), tuple(axial))


def _ground3(points) -> np.ndarray:
    if isinstance(points, GroundPoint):
        return points.as_array()
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] == 2:
        pts = np.concatenate([pts, np.zeros(pts.shape[:-1] + (1,))], axis=-1)
    return pts


def off_boresight_angle(sat_pos, boresight_target, user):
    """Angle (deg) at the satellite between a beam's aim point and a user.

    ``boresight_target`` and ``user`` may be GroundPoints or (..., 2)
    arrays; arrays broadcast against each other.
    """
    sat = np.asarray(sat_pos, dtype=float)
    if sat[2] <= 0:
        raise ValueError("satellite must be above the ground plane")
    a = _ground3(boresight_target) - sat
    u = _ground3(user) - sat
    na = np.linalg.norm(a, axis=-1)
    nu = np.linalg.norm(u, axis=-1)
    if np.any(na == 0) or np.any(nu == 0):
        raise ValueError("degenerate zero-length direction")
    # atan2 of |a x u| and a.u stays accurate for the sub-degree angles here
    cross = np.linalg.norm(np.cross(a, u), axis=-1)
    dot = np.sum(a * u, axis=-1)
    ang = np.degrees(np.arctan2(cross, dot))
    return float(ang) if np.ndim(ang) == 0 else ang


def user_slant_and_elevation(sat_pos, user):
    """Distance (km) and elevation (deg) of the satellite seen from ``user``."""
    sat = np.asarray(sat_pos, dtype=float)
    if sat[2] <= 0:
        raise ValueError("satellite must be above the ground plane")
    v = sat - _ground3(user)
    dist = np.linalg.norm(v, axis=-1)
    elev = np.degrees(np.arcsin(v[..., 2] / dist))
    if np.ndim(dist) == 0:
        return float(dist), float(elev)
    return dist, elev
