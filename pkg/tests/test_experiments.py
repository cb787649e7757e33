import json

import numpy as np

from surgerylab.experiments import run_net_convergence, run_pipe_convergence, validate_config
from surgerylab.experiments.io import read_rows
from surgerylab.experiments.net import NET_COLUMNS
from surgerylab.experiments.pipe import PIPE_COLUMNS


def test_small_pipe_sweep(tmp_path):
    cfg = validate_config({"resolution": 0.1, "n_ball": 16, "axiom_sample": 40,
                           "sweep": {"values": [0.4, 0.2, 0.1]}}, "pipe")
    summary = run_pipe_convergence(cfg, tmp_path)
    rows = read_rows(tmp_path / "pipe.csv")
    assert list(rows[0]) == PIPE_COLUMNS
    assert all(r["status"] == "ok" for r in rows)
    lam = [float(r["lambda"]) for r in rows]
    assert lam == sorted(lam, reverse=True)
    assert summary["constants"]["A_T1"] > 0
    assert (tmp_path / "pipe.svg").read_text().startswith("<?xml")
    assert json.loads((tmp_path / "summary.json").read_text())["name"] == cfg["name"]


def test_small_net_sweep(tmp_path):
    cfg = validate_config({"resolution": 0.1, "axiom_sample": 60, "x_sources": 8,
                           "sweep": {"values": [0.8, 0.4]}}, "net")
    summary = run_net_convergence(cfg, tmp_path)
    rows = read_rows(tmp_path / "net.csv")
    assert list(rows[0]) == NET_COLUMNS
    assert summary["predicates"]["string_sup"] and summary["predicates"]["ratio"]
    for r in rows:
        assert float(r["string_sup"]) <= 12 * float(r["eps"])
        assert np.isfinite(float(r["total_bound"]))


def test_failed_point_is_flagged(tmp_path):
    # eps below the resolution cannot be netted; the row is flagged, not fatal
    cfg = validate_config({"resolution": 0.1, "axiom_sample": 30, "x_sources": 4,
                           "sweep": {"values": [0.8, 0.05]}}, "net")
    summary = run_net_convergence(cfg, tmp_path)
    rows = read_rows(tmp_path / "net.csv")
    assert rows[0]["status"] == "ok"
    assert rows[1]["status"].startswith("error")
    assert not summary["predicates"]["all_rows_ok"]
