import csv
import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from leosr.cli import CDF_LEVELS, fmt, main
from leosr.config import ConfigError, load_scenario, scenario_from_dict
from leosr.sr_stats import ShadowingLevel


def _cell(v):
    try:
        return float(v)
    except ValueError:
        return v


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[_cell(v) for v in r] for r in rows[1:]]


@pytest.fixture
def cfg(tmp_path):
    def make(**scenario):
        base = {"user_grid": {"resolution_km": 1.0}, "realizations_per_point": 20, "seed": 3}
        base.update(scenario)
        p = tmp_path / "scenario.json"
        p.write_text(json.dumps(base, indent=1))
        return p
    return make


def test_fmt_twelve_significant_digits():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(0.0) == "0"
    assert fmt(-200) == "-200"
    assert fmt(123456789012345.0) == "1.23456789012e+14"


def test_dist_both_modes_close(tmp_path):
    assert main(["dist", "--level", "light", "--which", "pdf", "--mode", "both", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "dist_pdf_both.csv")
    assert header == ["y", "general", "integer"]
    arr = np.array(rows, dtype=float)
    assert arr[1, 0] - arr[0, 0] == pytest.approx(0.01)
    gap = np.max(np.abs(arr[:, 1] - arr[:, 2])) / np.max(arr[:, 1])
    assert gap < 0.02
    manifest = json.loads((tmp_path / "dist_manifest.json").read_text())
    assert manifest["outputs"] == ["dist_pdf_both.csv"]


def test_dist_heavy_integer_cdf_reaches_one(tmp_path):
    assert main(["dist", "--level", "heavy", "--which", "cdf", "--mode", "integer",
                 "--y-max", "20", "--step", "0.5", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "dist_cdf_integer.csv")
    assert header == ["y", "value"]
    assert rows[-1][1] >= 0.999999


def test_dist_custom_params(tmp_path):
    assert main(["dist", "--b", "0.2", "--m", "3", "--omega", "1", "--which", "cdf", "--mode", "general",
                 "--out", str(tmp_path)]) == 0
    assert main(["dist", "--b", "0.2", "--out", str(tmp_path)]) == 2


def test_invalid_level_leaves_no_files(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["dist", "--level", "murky", "--out", str(out)]) != 0
    assert "murky" in capsys.readouterr().err
    assert not out.exists()


def test_map_gain_and_determinism(tmp_path, cfg):
    path = cfg(user_grid={"resolution_km": 1.0, "extent_km": 12.0})
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["map", "--config", str(path), "--metric", "GAIN", "--out", str(d)]) == 0
    name = "map_gain_large-scale.csv"
    assert (a / name).read_bytes() == (b / name).read_bytes()
    header, rows = read_csv(a / name)
    assert header == ["x_km", "y_km", "value_dB"]
    arr = np.array(rows, dtype=float)
    assert arr[arr[:, 0].argsort(kind="stable")].shape == arr.shape
    # row-major: x varies fastest
    assert arr[0, 1] == arr[1, 1] and arr[1, 0] > arr[0, 0]
    centre = arr[(arr[:, 0] == 0) & (arr[:, 1] == 0), 2]
    assert centre == pytest.approx([38.5], abs=0.01)
    raw = (a / name).read_bytes()
    assert b"\r" not in raw and not any(line.endswith(b",") for line in raw.splitlines())
    man = json.loads((a / "map_manifest.json").read_text())
    assert man["config_digest"] == hashlib.sha256(path.read_bytes()).hexdigest()
    assert man["seed"] == 3 and man["tool_version"]


def test_seed_override_changes_single_realisation_map(tmp_path, cfg):
    path = cfg(user_grid={"resolution_km": 2.0, "extent_km": 6.0})
    args = ["map", "--config", str(path), "--metric", "SNR", "--statistic", "single-realization"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b"), "--seed", "4"])
    name = "map_snr_single-realization.csv"
    assert (tmp_path / "a" / name).read_bytes() != (tmp_path / "b" / name).read_bytes()
    assert json.loads((tmp_path / "b" / "map_manifest.json").read_text())["seed"] == 4


def test_cdf_sweep_files(tmp_path, cfg):
    path = cfg()
    assert main(["cdf", "--config", str(path), "--metric", "INR", "--axis", "reuse", "--values", "1,3",
                 "--out", str(tmp_path)]) == 0
    per = [read_csv(tmp_path / f"cdf_inr_reuse_{v}.csv") for v in (1, 3)]
    for header, rows in per:
        assert header == ["value_dB", "cum_prob"] and len(rows) == CDF_LEVELS
        vals = np.array(rows, dtype=float)
        assert np.all(np.diff(vals[:, 0]) >= 0) and vals[-1, 1] == 1.0
    header, rows = read_csv(tmp_path / "cdf_inr_reuse.csv")
    assert header == ["sweep_value", "value_dB", "cum_prob"] and len(rows) == 2 * CDF_LEVELS
    med1 = np.array(per[0][1])[CDF_LEVELS // 2 - 1, 0]
    med3 = np.array(per[1][1])[CDF_LEVELS // 2 - 1, 0]
    assert med1 - med3 > 5.0


def test_cdf_single_and_sweep_command(tmp_path, cfg):
    path = cfg()
    assert main(["cdf", "--config", str(path), "--metric", "SNR", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "cdf_snr.csv").exists()
    assert main(["sweep", "--config", str(path), "--metric", "SNR", "--axis", "shadowing",
                 "--values", "light,heavy", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "sweep_snr_shadowing_summary.csv")
    assert header[0] == "sweep_value" and [r[0] for r in rows] == ["light", "heavy"]


def test_outage_command(tmp_path, cfg):
    path = cfg()
    assert main(["outage", "--config", str(path), "--thresholds=-200,0,200", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "outage.csv")
    assert header == ["user_x", "user_y", "threshold_dB", "p_snr_outage", "p_not_noise_limited"]
    arr = np.array(rows, dtype=float)
    assert np.all(arr[arr[:, 2] == -200, 3] < 1e-12)
    assert np.all(arr[arr[:, 2] == 200, 3] > 1 - 1e-12)


def test_outage_at_empirical_median_is_half(tmp_path, cfg):
    path = cfg(user_grid={"points": [[0.0, 0.0]]}, realizations_per_point=200_000)
    assert main(["cdf", "--config", str(path), "--metric", "SNR", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "cdf_snr.csv")
    median = float(np.array(rows, dtype=float)[CDF_LEVELS // 2 - 1, 0])
    assert main(["outage", "--config", str(path), f"--thresholds={median!r}", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "outage.csv")
    assert rows[0][3] == pytest.approx(0.5, abs=0.02)


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "seed": 1,\n  "sat": {"elevation_deg": 90,}\n}\n')
    assert main(["map", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert ":3:" in capsys.readouterr().err
    with pytest.raises(ConfigError, match="unknown key"):
        scenario_from_dict({"shadowin": "light"})
    with pytest.raises(ConfigError, match="rf"):
        scenario_from_dict({"rf": {"carrier_ghz": 20}})
    with pytest.raises(ConfigError):
        scenario_from_dict({"seed": 1.5})
    with pytest.raises(ConfigError):
        scenario_from_dict({"layout": {"reuse_factor": 4}})
    assert not (tmp_path / "o").exists()


def test_config_round_trip(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"shadowing": "average", "sat": {"altitude_km": 600, "elevation_deg": 135},
                             "layout": {"reuse_factor": 3}, "rf": {"bandwidth_MHz": 200}}))
    s = load_scenario(p)
    assert s.shadowing is ShadowingLevel.AVERAGE
    assert (s.sat.elevation_deg, s.sat.azimuth_deg) == (45.0, 180.0)
    assert s.layout.reuse_factor == 3 and s.rf.bandwidth_MHz == 200


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "leosr", "dist", "--level", "average", "--y-max", "1",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "dist_pdf_both.csv").exists()
