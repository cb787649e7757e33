import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from surgerylab.flat_bounds import (LakzianSormaniInput, PreconditionError, a_floor, fit_constant,
                                    hls_bound, lakzian_sormani_bound, pipe_bound,
                                    string_limit_bound, tunnels_to_strings_bound)
from surgerylab.manifold.curvature import ScalarCurvatureLedger, scale_scalar_curvature
from surgerylab.surgery.model import TunnelModel, sphere_area, tunnel_make


def test_hls_examples():
    assert hls_bound(3, 1, 1, 0.1) == 0.8
    assert hls_bound(3, 2, 10, 0.01) == 12.8
    with pytest.raises(PreconditionError):
        hls_bound(3, 0.9, 1, 0.1)


def test_ls_worked_example():
    inp = LakzianSormaniInput(3, 0.0, 1.0, 1.0, 0.01, 4 * math.pi, 4 * math.pi)
    rep = lakzian_sormani_bound(inp, a=1e-6)
    assert rep.h == pytest.approx(math.sqrt(0.01 * 1.0025))
    assert rep.h_bar == rep.h
    assert rep.bound == pytest.approx(5.032, abs=1e-3)


def test_ls_default_a_and_floor():
    inp = LakzianSormaniInput(3, 0.05, 2.0, 2.5, 0.02, 3.0, 3.5)
    fl = a_floor(inp)
    assert fl == pytest.approx(math.acos(1 / 1.05) / math.pi * 2.5)
    assert lakzian_sormani_bound(inp).a == 1.0001 * fl
    with pytest.raises(PreconditionError):
        lakzian_sormani_bound(inp, a=fl)
    zero = LakzianSormaniInput(3, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0)
    assert lakzian_sormani_bound(zero).a > 0
    with pytest.raises(PreconditionError):
        LakzianSormaniInput(3, 0.0, 1.0, 1.0, -1.0, 1.0, 1.0)


def test_string_limit_is_hls_of_twelve_eps():
    assert string_limit_bound(0.1, 2 / 3, 4.0, 3) == hls_bound(3, 1.5, 4.0, 12 * 0.1)
    with pytest.raises(PreconditionError):
        string_limit_bound(0.1, 1.0, 1.0, 3)


def test_pipe_bound_dominant_term():
    pb = pipe_bound(0.01, 1.0, 1.0, 1.0)
    assert pb.value == pytest.approx(0.1 + 0.01 + 1e-4)
    assert pb.dominant == "sqrt_rho"
    assert pipe_bound(0.01, 0.0, 1.0, 0.0).dominant == "rho"


@given(st.floats(1e-4, 1.0), st.integers(2, 200))
def test_tunnel_sum_normalization_is_eps_free(eps, N):
    K = N * (N - 1) // 2
    per = 0.7 * math.sqrt(eps / N**4)
    rep = tunnels_to_strings_bound(eps, K, per, N)
    assert rep.raw == K * per
    assert rep.normalized == pytest.approx(0.7, rel=1e-12)


def test_tunnel_sum_checks_pair_count():
    with pytest.raises(PreconditionError):
        tunnels_to_strings_bound(0.1, 5, 1.0, N=4)


def test_fit_constant_is_a_certificate():
    xs = np.array([0.4, 0.2, 0.1])
    ys = np.array([1.0, 0.6, 0.2])
    A = fit_constant(xs, ys, 0.5)
    assert np.all(ys <= A * xs**0.5 * (1 + 1e-15))


@pytest.mark.parametrize("delta", np.linspace(0.01, 0.1, 5))
@pytest.mark.parametrize("ell", np.linspace(0.1, 1.0, 5))
def test_tunnel_model_bounds(delta, ell):
    t = tunnel_make(delta, ell, n=3, kappa=2.0, j=7)
    assert ell < t.L < t.A_model * delta + ell
    assert t.vol < t.A_model * (delta**3 + ell * delta**2)
    assert t.scalar_floor == 2.0 - 1.0 / 7


def test_tunnel_model_volume_identity():
    t = TunnelModel(0.05, 0.5, n=4)
    assert t.vol == pytest.approx(t.A_model / 4 * (t.ell + 2 * t.delta) * t.delta**3)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    with pytest.raises(ValueError):
        TunnelModel(0.1, 0.5, n=2)


@pytest.mark.parametrize("n,C", [(3, 1), (3, 2), (4, 3)])
def test_scaled_round_curvature(n, C):
    assert scale_scalar_curvature(n * (n - 1), C) == n * (n - 1) / C**2


def test_negative_background_is_bounded():
    for C in (1.0, 1.5, 4.0):
        assert scale_scalar_curvature(-0.5, C) == -1 / (2 * C**2) >= -0.5


def test_ledger_floor():
    led = ScalarCurvatureLedger().add("base", 2.0).add("tunnel", 2.0 - 1 / 3)
    assert led.kappa_floor == 2.0 - 1 / 3
    assert len(led.merged(led)) == 4
    with pytest.raises(ValueError):
        ScalarCurvatureLedger().kappa_floor
