import numpy as np
import pytest

from surgerylab.manifold import ConformalSphere, RoundSphere, sample_manifold
from surgerylab.manifold.sampled import ResolutionError
from surgerylab.metric_core import GRAPH_REL_TOL, FiniteMetricSpace, verify_metric_axioms
from surgerylab.surgery import (ConstructionError, GluedSpace, HypothesisError, PipeParameterError,
                                TunnelModel, attach_strings, attach_tunnels, build_epsilon_net,
                                build_pipe_spaces, choose_tunnel_radii, place_ports)


@pytest.fixture(scope="module")
def sphere():
    m = sample_manifold({"kind": "round"}, 0.1)
    return m, m.all_pairs


def test_epsilon_net_covers_and_separates(sphere):
    m, D = sphere
    net = build_epsilon_net(m, 0.5, D)
    assert net.covering_radius <= 0.5
    assert net.min_separation > 0.5
    assert np.all(D[:, net.centers].min(axis=1) <= 0.5)
    with pytest.raises(ResolutionError):
        build_epsilon_net(m, 0.05, D)


@pytest.mark.parametrize("mode", ["shell", "exact"])
def test_strings_are_close_and_sandwiched(sphere, mode):
    m, D = sphere
    eps = 0.5
    net = build_epsilon_net(m, eps, D)
    ports = place_ports(m, net, mode, D)
    target = FiniteMetricSpace(m.ids, D / 1.5)
    Y = attach_strings(m, ports, target, D=D)
    DY = Y.distances(np.arange(m.n))[:, :m.n]
    assert np.abs(DY - target.dist).max() <= 12 * eps
    off = ~np.eye(m.n, dtype=bool)
    ratio = DY[off] / target.dist[off]
    assert ratio.min() >= 1 - 1e-6 and ratio.max() <= 1.5 + 1e-6
    sub = np.arange(0, m.n, 7)
    assert verify_metric_axioms(Y.metric_space(sub), rel_tol=GRAPH_REL_TOL).passed


def test_strings_need_a_shorter_target(sphere):
    m, D = sphere
    net = build_epsilon_net(m, 0.5, D)
    ports = place_ports(m, net, "exact", D)
    with pytest.raises(HypothesisError):
        attach_strings(m, ports, FiniteMetricSpace(m.ids, D * 1.1), D=D)


def test_tunnels_glue_and_stay_connected(sphere):
    m, D = sphere
    eps = 0.5
    net = build_epsilon_net(m, eps, D)
    ports = place_ports(m, net, "exact", D)
    Y = attach_strings(m, ports, FiniteMetricSpace(m.ids, D / 1.5), D=D)
    radii = choose_tunnel_radii(net, ports, None, D=D)
    assert np.all(radii.rho <= eps / net.N**4)
    models = [TunnelModel(0.25 * r, l, 3, 2.0, 2) for r, l in zip(radii.rho, Y.attachments.ell)]
    X = attach_tunnels(m, ports, radii, models, kappa=2.0)
    assert X.ledger.kappa_floor == 2.0 - 0.5
    dx = X.distances([0])[0, :m.n]
    dy = Y.distances([0])[0, :m.n]
    assert np.all(np.isfinite(dx[X.keep]))
    # tunnels and strings differ by O(rho) per crossing
    assert np.abs(dx[X.keep] - dy[X.keep]).max() <= 10 * radii.rho.max() * net.N


def test_glued_space_validates_endpoints(sphere):
    m, _ = sphere
    keep = np.ones(m.n, dtype=bool)
    keep[0] = False
    with pytest.raises(ConstructionError):
        GluedSpace(m, keep, edges=np.array([[0, 1]]), lengths=np.array([1.0]))
    with pytest.raises(ConstructionError):
        GluedSpace(m, np.ones(m.n, dtype=bool), edges=np.array([[0, m.n + 3]]),
                   lengths=np.array([1.0]))


@pytest.fixture(scope="module")
def pipe():
    return build_pipe_spaces(ConformalSphere(0.1), 0.4, 1.0, h=0.1, n_ball=20)


def test_pipe_spaces_share_the_base(pipe):
    assert set(pipe.spaces) >= {"M_rho", "Mt_rho", "M_0", "Mt_0rho"}
    assert pipe.tunnel.L == pytest.approx(pipe.ell + 2 * pipe.delta)
    assert pipe.W.sum() < pipe.base.n
    assert pipe.base.ids == pipe.base_mollified.ids


def test_pipe_string_shortcut(pipe):
    d = pipe.M_0.distances([pipe.p])[0]
    assert d[pipe.q] == pytest.approx(pipe.ell)
    assert not pipe.M_rho.keep[pipe.p] and not pipe.M_rho.keep[pipe.q]


def test_pipe_parameter_checks():
    with pytest.raises(PipeParameterError):
        build_pipe_spaces(RoundSphere(), 0.6, 1.0, h=0.1)
    with pytest.raises(PipeParameterError):
        build_pipe_spaces(RoundSphere(), 0.2, 4.0, h=0.1)
