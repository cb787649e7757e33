import json

import numpy as np
import pytest

from surgerylab.experiments import ConfigError, config_hash, fit_slope, validate_config
from surgerylab.experiments.cli import main
from surgerylab.experiments.golden import default_table, evaluate_table
from surgerylab.experiments.io import format_value, read_rows, write_rows


def test_defaults_fill_in():
    cfg = validate_config({}, "pipe")
    assert cfg["sweep"]["values"] == [0.4, 0.2, 0.1, 0.05]
    assert validate_config({"experiment": "net"})["target"]["C"] == 1.5


@pytest.mark.parametrize("raw", [
    {"bogus": 1},
    {"sweep": {"values": [0.1, 0.2]}},
    {"sweep": {"values": [0.8, 0.4]}},
    {"sweep": {"values": []}},
    {"schema": 99},
    {"tunnel": {"extra": 1}},
])
def test_pipe_config_rejections(raw):
    with pytest.raises(ConfigError):
        validate_config(raw, "pipe")


def test_net_target_rules():
    with pytest.raises(ConfigError):
        validate_config({"target": {"kind": "scaled", "C": 0.5}}, "net")
    with pytest.raises(ConfigError):
        validate_config({"target": {"kind": "conformal", "offset": -0.1, "amplitude": 0.2}}, "net")
    with pytest.raises(ConfigError):
        validate_config({"experiment": "pipe"}, "net")


def test_hash_ignores_private_keys():
    a = validate_config({}, "golden")
    b = dict(a, _config_dir="/somewhere")
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(dict(a, seed=1))


def test_fit_slope_exact_power():
    x = np.array([0.4, 0.2, 0.1, 0.05])
    f = fit_slope(x, 3 * x**2)
    assert f.slope == pytest.approx(2.0)
    assert f.r2 == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fit_slope([1, 2], [1, 2])
    with pytest.raises(ValueError):
        fit_slope([1, 2, 3], [1, 0, 2])


def test_format_value_roundtrips_floats():
    for v in (0.1, 1 / 3, 1e-300, 12.8):
        assert float(format_value(v)) == v
    assert format_value(True) == "1"


def test_write_read_rows(tmp_path):
    write_rows(tmp_path / "r.csv", ["a", "b"], [{"a": 0.1, "b": "x"}, {"a": 2}])
    rows = read_rows(tmp_path / "r.csv")
    assert rows[0]["a"] == "0.1" and rows[1]["b"] == ""


def test_golden_rows_match_independent_arithmetic():
    rows = evaluate_table(default_table())
    hls = [r for r in rows if r["calc"] == "hls" and r["status"] == "ok"]
    assert len(hls) == 20
    for r in hls:
        n, a, m, e = int(r["n"]), float(r["alpha"]), float(r["mass"]), float(r["eps"])
        assert float(r["bound"]) == 2 ** ((n + 3) / 2) * a ** (n + 1) * m * e
    for r in rows:
        if r["calc"] != "ls" or r["status"] != "ok":
            continue
        eps, D1, D2, lam = (float(r[k]) for k in ("eps", "D_U1", "D_U2", "lam"))
        vols = sum(float(r[k]) for k in ("vol_U1", "vol_U2", "vol_bdry_U1", "vol_bdry_U2"))
        h = (lam * (max(D1, D2) + lam / 4)) ** 0.5
        s = (eps**2 + 2 * eps) ** 0.5
        hb = max(h, s * D1, s * D2)
        b = (2 * hb + float(r["a"])) * vols + float(r["vol_excess_1"]) + float(r["vol_excess_2"])
        assert (float(r["h"]), float(r["h_bar"]), float(r["bound"])) == (h, hb, b)
    assert sum(r["status"].startswith("error") for r in rows) == 2


def test_cli_golden(tmp_path, capsys):
    assert main(["bounds-golden", "--out", str(tmp_path)]) == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True


def test_cli_golden_mismatch(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("row\n")
    cfg = tmp_path / "g.json"
    cfg.write_text(json.dumps({"experiment": "golden", "golden": "bad.csv"}))
    assert main(["bounds-golden", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1


def test_cli_bad_config(tmp_path):
    cfg = tmp_path / "p.json"
    cfg.write_text(json.dumps({"experiment": "pipe", "nope": 1}))
    assert main(["pipe-sweep", "--config", str(cfg)]) == 2
    cfg.write_text("{not json")
    assert main(["pipe-sweep", "--config", str(cfg)]) == 2


def test_cli_slope(tmp_path):
    x = [0.4, 0.2, 0.1]
    write_rows(tmp_path / "d.csv", ["rho", "y"], [{"rho": v, "y": v**2} for v in x])
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"experiment": "slope", "csv": "d.csv", "y": "y",
                               "min_slope": 1.9, "min_r2": 0.99}))
    assert main(["slope", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    cfg.write_text(json.dumps({"experiment": "slope", "csv": "d.csv", "y": "y", "min_slope": 2.5}))
    assert main(["slope", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
