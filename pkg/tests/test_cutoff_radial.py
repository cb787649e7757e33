import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from surgerylab.manifold import (DomainError, RadialMetric, bump, cutoff_phi, cutoff_psi,
                                 geodesic_sphere_check, metric_c2_deviation,
                                 mollify_ball_metric)


def phi_quad(t):
    num = quad(lambda s: float(bump(s)), 0.25, min(max(t, 0.25), 0.75), epsabs=0, epsrel=1e-13)[0]
    den = quad(lambda s: float(bump(s)), 0.25, 0.75, epsabs=0, epsrel=1e-13)[0]
    return num / den


@pytest.mark.parametrize("t", [0.0, 0.1, 0.25, 0.3, 0.5, 0.62, 0.75, 0.9, 1.0])
def test_phi_matches_adaptive_quadrature(t):
    assert cutoff_phi(t) == pytest.approx(phi_quad(t), abs=1e-12)


def test_phi_anchor_values():
    assert cutoff_phi(0.5) == pytest.approx(0.5, abs=1e-15)
    assert cutoff_phi(0.1) == 0.0
    assert cutoff_phi(0.9) == 1.0


@given(st.floats(0.0, 1.0))
def test_phi_symmetry_and_range(t):
    v = cutoff_phi(t)
    assert 0.0 <= v <= 1.0
    assert v + cutoff_phi(1.0 - t) == pytest.approx(1.0, abs=1e-13)


def test_phi_monotone():
    v = cutoff_phi(np.linspace(0, 1, 2001))
    assert np.all(np.diff(v) >= -1e-15)


def test_domains():
    with pytest.raises(DomainError):
        cutoff_phi(1.2)
    with pytest.raises(DomainError):
        cutoff_psi(0.5, 1.0)
    assert cutoff_psi(0.9, 1.0) == 0.0
    assert cutoff_psi(1.0, 1.0) == 1.0
    assert cutoff_psi(0.95, 1.0) == pytest.approx(0.5, abs=1e-14)


def test_mollified_round_metric_is_unchanged():
    g = RadialMetric.round()
    gm = mollify_ball_metric(g, 0.3)
    r = np.linspace(0.01, 1.2, 50)
    assert np.allclose(gm.g(r), g.g(r), atol=1e-15)


def test_mollification_is_round_inside_and_exact_outside():
    g = RadialMetric.warped(lambda r: (np.sin(r) * (1 + 0.2 * r**2)) ** 2)
    rho = 0.4
    gm = mollify_ball_metric(g, rho)
    inner = np.linspace(0.01, 0.9 * rho, 20)
    assert np.allclose(gm.g(inner)[:, 0, 0], np.sin(inner) ** 2, rtol=0, atol=1e-15)
    outer = np.linspace(rho, 1.0, 20)
    assert np.array_equal(gm.g(outer), g.g(outer))
    with pytest.raises(ValueError):
        mollify_ball_metric(g, 2.0)


def test_c2_deviation_rate_for_quadratic_perturbation():
    # g_r = sin^2 r (1 + c r^2)^2 differs from round by O(r^4) in the scaled norm
    g = RadialMetric.warped(lambda r: (np.sin(r) * (1 + 0.3 * r**2)) ** 2)
    rhos = np.array([0.4, 0.2, 0.1, 0.05])
    dev = [metric_c2_deviation(g, mollify_ball_metric(g, r), (0.0, r)) for r in rhos]
    slope = np.polyfit(np.log(rhos), np.log(dev), 1)[0]
    assert slope > 3.6


def test_geodesic_sphere_check_round():
    g = RadialMetric.round()
    for eps in (0.05, 0.1, 0.3):
        rep = geodesic_sphere_check(g, eps)
        assert rep.passed
        assert rep.deviation == pytest.approx(1 - np.sin(eps) ** 2 / eps**2)
