"""
JSON scenario files.

The file holds one object whose keys mirror :class:`~leosr.engine.Scenario`.
Every key is optional (defaults fill the gaps) but unknown keys are rejected,
so a typo in a physics parameter cannot pass silently.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from pathlib import Path

from .engine import LayoutSpec, Scenario, UserGrid
from .geometry import SatelliteState
from .link_budget import RfConfig
from .sr_stats import ShadowingLevel

__all__ = ["ConfigError", "scenario_from_dict", "load_scenario", "config_digest"]


class ConfigError(ValueError):
    pass


def _fields(cls) -> set[str]:
    return {f.name for f in dataclasses.fields(cls)}


def _section(raw, cls, where: str) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected an object, got {type(raw).__name__}")
    unknown = sorted(set(raw) - _fields(cls))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}; allowed: {', '.join(sorted(_fields(cls)))}")
    return dict(raw)


def _build(cls, kwargs: dict, where: str):
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def scenario_from_dict(raw: dict) -> Scenario:
    top = _section(raw, Scenario, "scenario")
    kw = {}
    if "rf" in top:
        kw["rf"] = _build(RfConfig, _section(top["rf"], RfConfig, "rf"), "rf")
    if "layout" in top:
        kw["layout"] = _build(LayoutSpec, _section(top["layout"], LayoutSpec, "layout"), "layout")
    if "sat" in top:
        sat = _section(top["sat"], SatelliteState, "sat")
        if "elevation_deg" not in sat:
            raise ConfigError("sat: elevation_deg is required")
        try:
            # elevations past 90 deg describe the mirrored pass
            kw["sat"] = SatelliteState.from_sky_angle(
                float(sat.get("altitude_km", 600.0)), float(sat["elevation_deg"]),
                float(sat.get("azimuth_deg", 0.0)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"sat: {exc}") from None
    if "shadowing" in top:
        try:
            kw["shadowing"] = ShadowingLevel.from_name(str(top["shadowing"]))
        except ValueError as exc:
            raise ConfigError(f"shadowing: {exc}") from None
    if "user_grid" in top:
        grid = _section(top["user_grid"], UserGrid, "user_grid")
        if grid.get("points") is not None:
            grid["points"] = tuple(tuple(p) for p in grid["points"])
        kw["user_grid"] = _build(UserGrid, grid, "user_grid")
    for key in ("realizations_per_point", "seed"):
        if key in top:
            value = top[key]
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{key}: expected an integer, got {value!r}")
            kw[key] = value
    if top.get("aperture_radius_m") is not None:
        kw["aperture_radius_m"] = float(top["aperture_radius_m"])
    return _build(Scenario, kw, "scenario")


def load_scenario(path: str | Path) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return scenario_from_dict(raw)


def config_digest(path: str | Path | None) -> str:
    """sha256 of the config file bytes; of an empty object when there is no file."""
    data = b"{}" if path is None else Path(path).read_bytes()
    return hashlib.sha256(data).hexdigest()
