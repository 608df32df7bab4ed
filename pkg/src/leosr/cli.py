"""
Command-line front end.

Every command writes CSV files plus a ``<command>_manifest.json`` into
``--out``.  Values cross this boundary in dB; the engine works in linear
units.  Files are written to a temporary name and renamed, so a failed
run never leaves a partial CSV behind.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, config_digest, load_scenario
from .engine import (
    THREADS_ENV,
    Metric,
    MetricDistribution,
    Region,
    Scenario,
    Statistic,
    outage_table,
    run_cdf,
    run_spatial_map,
    sweep,
)
from .specfun import ConvergenceError
from .sr_stats import ShadowingLevel, SrParams, SsrDistribution, ssr_cdf_general, ssr_cdf_int, ssr_pdf, ssr_pdf_int

__all__ = ["main", "build_parser", "RunManifest", "fmt", "CDF_LEVELS"]

CDF_LEVELS = 1000


@dataclasses.dataclass
class RunManifest:
    command: str
    config_digest: str
    seed: int | None
    tool_version: str
    outputs: list[str]


def fmt(x: float) -> str:
    """Fixed 12-significant-digit rendering used in every CSV."""
    x = float(x)
    if x == 0.0:
        return "0"
    return format(x, ".12g")


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


class _Outputs:
    """Collects rendered files; nothing touches disk until ``commit``."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.files: dict[str, str] = {}

    def add(self, name: str, header, rows) -> None:
        self.files[name] = _csv_text(header, rows)

    def commit(self, command: str, digest: str, seed: int | None) -> RunManifest:
        for name, text in self.files.items():
            _atomic_write(self.out_dir / name, text)
        manifest = RunManifest(command, digest, seed, __version__, sorted(self.files))
        blob = json.dumps(dataclasses.asdict(manifest), indent=2, sort_keys=True) + "\n"
        _atomic_write(self.out_dir / f"{command.split()[0]}_manifest.json", blob)
        return manifest


def _scenario(args) -> Scenario:
    scen = load_scenario(args.config) if args.config else Scenario()
    if args.seed is not None:
        scen = dataclasses.replace(scen, seed=args.seed)
    return scen


def _slug(value) -> str:
    return str(value).replace("-", "m").replace(".", "p").replace("/", "_")


def _cdf_rows(dist: MetricDistribution):
    probs = np.arange(1, CDF_LEVELS + 1) / CDF_LEVELS
    values = np.quantile(dist.samples_dB, probs, method="inverted_cdf")
    return list(zip(values, probs))


def _sr_params(args) -> SrParams:
    custom = [args.b, args.m, args.omega]
    if any(v is not None for v in custom):
        if args.level is not None or any(v is None for v in custom):
            raise ValueError("give either --level or all of --b, --m, --omega")
        return SrParams(args.b, args.m, args.omega)
    return ShadowingLevel.from_name(args.level or "light").params


def cmd_dist(args) -> RunManifest:
    params = _sr_params(args)
    if not args.step > 0:
        raise ValueError("--step must be positive")
    if not 0 <= args.y_min < args.y_max:
        raise ValueError("need 0 <= --y-min < --y-max")
    n = int(np.floor((args.y_max - args.y_min) / args.step + 1e-9)) + 1
    y = args.y_min + args.step * np.arange(n)
    dist = SsrDistribution(params)
    if args.which == "pdf":
        evaluators = {"general": lambda v: ssr_pdf(params, v, method="series"),
                      "integer": lambda v: ssr_pdf_int(dist, v)}
    else:
        evaluators = {"general": lambda v: ssr_cdf_general(params, v),
                      "integer": lambda v: ssr_cdf_int(dist, v)}
    modes = ["general", "integer"] if args.mode == "both" else [args.mode]
    columns = [np.asarray(evaluators[mode](y)) for mode in modes]
    header = ["y"] + (modes if args.mode == "both" else ["value"])

    out = _Outputs(Path(args.out))
    out.add(f"dist_{args.which}_{args.mode}.csv", header, zip(y, *columns))
    digest_src = json.dumps(dataclasses.asdict(params), sort_keys=True).encode()
    return out.commit(f"dist --which {args.which} --mode {args.mode}", hashlib.sha256(digest_src).hexdigest(), None)


def cmd_map(args) -> RunManifest:
    scen = _scenario(args)
    metric = Metric.parse(args.metric)
    smap = run_spatial_map(scen, metric, Statistic(args.statistic))
    X, Y = np.meshgrid(smap.xs, smap.ys)
    out = _Outputs(Path(args.out))
    out.add(f"map_{metric.value.lower()}_{args.statistic}.csv", ["x_km", "y_km", "value_dB"],
            zip(X.ravel(), Y.ravel(), smap.grid.ravel()))
    return out.commit(f"map --metric {metric.value} --statistic {args.statistic}",
                      config_digest(args.config), scen.seed)


def _parse_values(axis: str, text: str) -> list:
    items = [v.strip() for v in text.split(",") if v.strip()]
    if not items:
        raise ValueError("--values is empty")
    if axis == "elevation":
        return [float(v) for v in items]
    if axis == "reuse":
        return [int(v) for v in items]
    return items


def _run_sweep(args, command: str) -> RunManifest:
    scen = _scenario(args)
    metric = Metric.parse(args.metric)
    out = _Outputs(Path(args.out))
    tag = metric.value.lower()
    if args.axis is None:
        dist = run_cdf(scen, metric, Region(args.region))
        out.add(f"cdf_{tag}.csv", ["value_dB", "cum_prob"], _cdf_rows(dist))
        return out.commit(f"{command} --metric {metric.value}", config_digest(args.config), scen.seed)

    values = _parse_values(args.axis, args.values or "")
    dists = sweep(scen, args.axis, values, metric, Region(args.region))
    combined, summary = [], []
    for value, dist in zip(values, dists):
        rows = _cdf_rows(dist)
        out.add(f"cdf_{tag}_{args.axis}_{_slug(value)}.csv", ["value_dB", "cum_prob"], rows)
        combined.extend((str(value), v, p) for v, p in rows)
        summary.append((str(value), dist.percentile(10), dist.median, dist.percentile(90), dist.cdf(0.0)))
    out.add(f"cdf_{tag}_{args.axis}.csv", ["sweep_value", "value_dB", "cum_prob"], combined)
    if command == "sweep":
        out.add(f"sweep_{tag}_{args.axis}_summary.csv",
                ["sweep_value", "p10_dB", "median_dB", "p90_dB", "cdf_at_0dB"], summary)
    return out.commit(f"{command} --metric {metric.value} --axis {args.axis} --values {args.values}",
                      config_digest(args.config), scen.seed)


def cmd_cdf(args) -> RunManifest:
    return _run_sweep(args, "cdf")


def cmd_sweep(args) -> RunManifest:
    return _run_sweep(args, "sweep")


def cmd_outage(args) -> RunManifest:
    scen = _scenario(args)
    thresholds = [float(v) for v in args.thresholds.split(",") if v.strip()]
    if not thresholds:
        raise ValueError("--thresholds is empty")
    xy, thr, p_out, p_nnl = outage_table(scen, thresholds, Region(args.region))
    rows = []
    for i, (x, y) in enumerate(xy):
        for j, t in enumerate(thr):
            rows.append((x, y, t, p_out[i, j], p_nnl[i]))
    out = _Outputs(Path(args.out))
    out.add("outage.csv", ["user_x", "user_y", "threshold_dB", "p_snr_outage", "p_not_noise_limited"], rows)
    return out.commit(f"outage --thresholds {args.thresholds}", config_digest(args.config), scen.seed)


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leosr",
        description="Shadowed Rician statistics and multi-beam LEO downlink simulation.",
        epilog=f"Set {THREADS_ENV} to run the Monte Carlo engine on several threads.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        p.add_argument("--out", default=".", help="output directory (default: current)")
        if config:
            p.add_argument("--config", help="JSON scenario file (defaults apply when omitted)")
            p.add_argument("--seed", type=_u64, help="override the scenario seed")

    p = sub.add_parser("dist", help="tabulate an SSR pdf or CDF")
    common(p, config=False)
    p.add_argument("--level", help="light, average or heavy")
    p.add_argument("--b", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--omega", type=float)
    p.add_argument("--which", choices=["pdf", "cdf"], default="pdf")
    p.add_argument("--mode", choices=["general", "integer", "both"], default="both")
    p.add_argument("--y-min", type=float, default=0.0)
    p.add_argument("--y-max", type=float, default=5.0)
    p.add_argument("--step", type=float, default=0.01)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("map", help="metric over a ground grid")
    common(p)
    p.add_argument("--metric", default="SNR", help="GAIN, SNR, INR, SINR or SIR")
    p.add_argument("--statistic", choices=[s.value for s in Statistic], default=Statistic.LARGE_SCALE.value)
    p.set_defaults(func=cmd_map)

    for name, func, helptext in (("cdf", cmd_cdf, "pooled CDF, optionally swept"),
                                 ("sweep", cmd_sweep, "CDFs across one scenario axis")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--metric", default="SNR", help="SNR, INR, SINR or SIR")
        p.add_argument("--region", choices=[r.value for r in Region], default=Region.CENTER_CELL.value)
        p.add_argument("--axis", choices=["elevation", "shadowing", "reuse"], required=name == "sweep")
        p.add_argument("--values", required=name == "sweep", help="comma-separated axis values")
        p.set_defaults(func=func)

    p = sub.add_parser("outage", help="closed-form outage per user point")
    common(p)
    p.add_argument("--thresholds", required=True, help="comma-separated thresholds in dB")
    p.add_argument("--region", choices=[r.value for r in Region], default=Region.CENTER_CELL.value)
    p.set_defaults(func=cmd_outage)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        manifest = args.func(args)
    except (ConfigError, ValueError, IndexError, ConvergenceError, OSError) as exc:
        print(f"leosr {args.command}: error: {exc}", file=sys.stderr)
        return 2
    for path in manifest.outputs:
        print(Path(args.out) / path)
    return 0
