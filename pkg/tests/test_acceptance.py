"""The ten acceptance criteria, each at its stated tolerance.

The pipe and net sweeps are run once per session and shared between the
criteria that read them.
"""
import math
import time

import numpy as np
import pytest

from surgerylab.experiments import run_net_convergence, run_pipe_convergence, validate_config
from surgerylab.experiments.golden import default_table, evaluate_table
from surgerylab.experiments.io import read_rows
from surgerylab.flat_bounds import LakzianSormaniInput, hls_bound, lakzian_sormani_bound
from surgerylab.manifold import sample_manifold
from surgerylab.manifold.curvature import ScalarCurvatureLedger, scale_scalar_curvature
from surgerylab.metric_core import (FiniteMetricSpace, pullback_metric, relabel,
                                    uniform_distance, verify_metric_axioms)
from surgerylab.surgery.model import TunnelModel


@pytest.fixture(scope="session")
def pipe_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("pipe")
    cfg = validate_config({}, "pipe")
    t0 = time.perf_counter()
    summary = run_pipe_convergence(cfg, out, workers=1)
    return cfg, out, summary, time.perf_counter() - t0


@pytest.fixture(scope="session")
def net_run(pipe_run, tmp_path_factory):
    out = tmp_path_factory.mktemp("net")
    cfg = validate_config({"pipe_constants": pipe_run[2]["constants"]}, "net")
    t0 = time.perf_counter()
    summary = run_net_convergence(cfg, out, workers=1)
    rows = [r for r in read_rows(out / "net.csv")]
    return cfg, rows, summary, time.perf_counter() - t0


def test_c01_golden_arithmetic(criterion_log):
    t0 = time.perf_counter()
    rows = evaluate_table(default_table())
    hls_rows = [r for r in rows if r["calc"] == "hls" and r["status"] == "ok"]
    ok = len(hls_rows) == 20
    for r in hls_rows:
        n, a, m, e = int(r["n"]), float(r["alpha"]), float(r["mass"]), float(r["eps"])
        ok &= float(r["bound"]) == 2 ** ((n + 3) / 2) * a ** (n + 1) * m * e
    ok &= hls_bound(3, 1, 1, 0.1) == 0.8 and hls_bound(3, 2, 10, 0.01) == 12.8
    rng = np.random.default_rng(11)
    for _ in range(200):
        eps, D1, D2, lam = rng.uniform(0, 0.3), *rng.uniform(0.1, 3, 2), rng.uniform(0, 0.1)
        v = rng.uniform(0, 5, 6)
        inp = LakzianSormaniInput(3, eps, D1, D2, lam, *v)
        rep = lakzian_sormani_bound(inp)
        h = math.sqrt(lam * (max(D1, D2) + lam / 4))
        s = math.sqrt(eps**2 + 2 * eps)
        hb = max(h, s * D1, s * D2)
        b = (2 * hb + rep.a) * (v[0] + v[1] + v[2] + v[3]) + v[4] + v[5]
        ok &= (rep.h, rep.h_bar, rep.bound) == (h, hb, b)
    dt = time.perf_counter() - t0
    ok &= dt < 1.0
    assert criterion_log(1, ok, f"20 hls rows exact, LS identities bit-for-bit ({dt:.2f} s)")


def _max_rel_error(m, i, j):
    u, inv = np.unique(i, return_inverse=True)
    d = m.distances(u)[inv, j]
    x = m.coords
    exact = 2 * np.arcsin(np.linalg.norm(x[i] - x[j], axis=1) / 2)
    return float(np.max(np.abs(d - exact) / exact))


def _grid_pairs(m, seed):
    rng = np.random.default_rng(seed)
    s = rng.choice(m.n, 40, replace=False)
    t = rng.choice(m.n, 25, replace=False)
    I, J = (a.ravel() for a in np.meshgrid(s, t, indexing="ij"))
    keep = I != J
    return I[keep], J[keep]


def test_c02_geodesic_oracle(criterion_log):
    t0 = time.perf_counter()
    m = sample_manifold({"kind": "round", "radius": 1.0}, 0.05)
    rng = np.random.default_rng(2)
    i, j = rng.integers(0, m.n, (2, 1200))
    keep = i != j
    i, j = i[keep][:1000], j[keep][:1000]
    err = _max_rel_error(m, i, j)
    fine = sample_manifold({"kind": "round", "radius": 1.0}, 0.025)
    e_coarse = _max_rel_error(m, *_grid_pairs(m, 3))
    e_fine = _max_rel_error(fine, *_grid_pairs(fine, 3))
    dt = time.perf_counter() - t0
    ok = err <= 0.02 and e_fine < e_coarse and dt < 30
    assert criterion_log(2, ok, f"max rel error {err:.4f} at h=0.05; {e_coarse:.4f} -> "
                                f"{e_fine:.4f} when h halves ({dt:.1f} s)")


def test_c03_metric_axioms(pipe_run, net_run, criterion_log):
    prow = read_rows(pipe_run[1] / "pipe.csv")
    nrow = net_run[1]
    rows = [r for r in prow + nrow if r["status"] == "ok"]
    ok = len(rows) == len(prow) + len(nrow) and all(r["axioms_ok"] == "1" for r in rows)
    worst = max(float(r["axiom_defect"]) for r in rows)
    assert criterion_log(3, ok, f"{len(rows)} sweep points, worst triangle defect {worst:.2e}")


def test_c04_string_bound(net_run, criterion_log):
    cfg, rows, summary, dt = net_run
    p = summary["predicates"]
    ok = p["all_rows_ok"] and p["string_sup"] and p["ratio"] and dt < 300
    worst = max(float(r["string_sup"]) / float(r["eps"]) for r in rows)
    lo = min(float(r["ratio_min"]) for r in rows)
    hi = max(float(r["ratio_max"]) for r in rows)
    assert criterion_log(4, ok, f"sup/eps <= {worst:.3f} (limit 12), ratio in [{lo:.6f}, {hi:.6f}]"
                                f" ({dt:.0f} s incl. setup)")


def test_c05_pipe_rates(pipe_run, criterion_log):
    cfg, out, summary, dt = pipe_run
    f = summary["fits"]
    ok = summary["passed"] and dt < 600
    assert criterion_log(5, ok, "slopes lambda {:.2f}, eps_rho {:.2f}, C2 {:.2f}; min R2 {:.4f} "
                                "({:.0f} s)".format(f["lambda"]["slope"], f["eps_rho"]["slope"],
                                                    f["c2_deviation"]["slope"],
                                                    min(v["r2"] for v in f.values()), dt))


def test_c06_tunnel_model(criterion_log):
    t0 = time.perf_counter()
    ok = True
    kappa = 2.0
    for delta in np.linspace(0.01, 0.1, 5):
        for ell in np.linspace(0.1, 1.0, 5):
            for j in (1, 3, 10):
                t = TunnelModel(float(delta), float(ell), 3, kappa, j)
                ok &= ell < t.L < t.A_model * delta + ell
                ok &= t.vol < t.A_model * (delta**3 + ell * delta**2)
                led = ScalarCurvatureLedger().add("base", kappa).add("tunnel", t.scalar_floor)
                ok &= led.kappa_floor == kappa - 1 / j
    dt = time.perf_counter() - t0
    ok &= dt < 1.0
    assert criterion_log(6, ok, f"25 (delta, ell) models within bounds, floor exact ({dt:.3f} s)")


def test_c07_composite(net_run, criterion_log):
    cfg, rows, summary, dt = net_run
    p = summary["predicates"]
    ok = p["finite_total"] and p["decrease"] and p["normalized_constant"] and dt < 300
    fac = ", ".join(f"{x:.2f}" for x in summary["decrease_factors"])
    assert criterion_log(7, ok, f"halving factors [{fac}], normalized spread "
                                f"{summary['normalized_spread']:.2e}")


def test_c08_pullback_isometry(criterion_log):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    ok = True
    for k in range(100):
        x = rng.normal(size=(50, 3))
        d = np.linalg.norm(x[:, None] - x[None], axis=2)
        target = FiniteMetricSpace(tuple(f"t{i}" for i in range(50)), d)
        perm = rng.permutation(50)
        F = {f"s{i}": f"t{perm[i]}" for i in range(50)}
        pb = pullback_metric(target, F)
        ok &= verify_metric_axioms(pb, tol=0.0).passed
        ok &= uniform_distance(pb, relabel(target, {v: u for u, v in F.items()})) == 0.0
    dt = time.perf_counter() - t0
    ok &= dt < 5
    assert criterion_log(8, ok, f"100 random bijections isometric, zero tolerance ({dt:.2f} s)")


def test_c09_scalar_bookkeeping(criterion_log):
    ok = all(scale_scalar_curvature(n * (n - 1), C) == n * (n - 1) / C**2
             for n, C in ((3, 1), (3, 2), (4, 3)))
    ok &= all(scale_scalar_curvature(-0.5, C) == -1 / (2 * C**2) >= -0.5
              for C in (1.0, 1.5, 2.0, 10.0))
    assert criterion_log(9, ok, "n(n-1)/C^2 exact; -1/(2C^2) >= -1/2")


def test_c10_determinism(pipe_run, tmp_path, criterion_log):
    cfg, out, _, _ = pipe_run
    run_pipe_convergence(cfg, tmp_path, workers=2)
    same = (tmp_path / "pipe.csv").read_bytes() == (out / "pipe.csv").read_bytes()
    assert criterion_log(10, same, "pipe.csv byte-identical for workers=1 and workers=2")
