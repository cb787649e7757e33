import numpy as np
import pytest

from surgerylab.manifold import (ConformalSphere, RoundSphere, injectivity_radius_proxy,
                                 metric_from_description, sample_manifold, warped_cylinder)
from surgerylab.manifold.sampled import SampledManifold, graded_nodes


@pytest.fixture(scope="module")
def sphere():
    return sample_manifold({"kind": "round", "radius": 1.0}, 0.1)


def test_round_sphere_volume_and_distances(sphere):
    assert sphere.total_volume == pytest.approx(4 * np.pi, rel=1e-9)
    rng = np.random.default_rng(1)
    src = rng.choice(sphere.n, 10, replace=False)
    d = sphere.distances(src)
    x = sphere.coords
    exact = 2 * np.arcsin(np.clip(np.linalg.norm(x[src][:, None] - x[None], axis=2) / 2, 0, 1))
    mask = exact > 0.3
    rel = np.abs(d[mask] - exact[mask]) / exact[mask]
    assert rel.max() < 0.05
    # graph paths are never shorter than geodesics
    assert np.all(d >= exact - 1e-9)


def test_conformal_volume_matches_integral():
    g = ConformalSphere(0.1)
    m = sample_manifold(g.description(), 0.1)
    t = np.linspace(0, np.pi, 20001)
    dens = np.exp(2 * 0.1 * np.cos(t)) * np.sin(t) * 2 * np.pi
    exact = np.trapezoid(dens, t)
    assert m.total_volume == pytest.approx(exact, rel=1e-3)


def test_cylinder_axis_length():
    cyl = warped_cylinder(1.0, 0.3)
    m = sample_manifold(cyl, 0.05)
    d = m.distances(["base/r0s0"])[0]
    assert d[m.index(f"base/r{m.layout.n_rings - 1}s0")] == pytest.approx(1.0, rel=1e-9)


def test_graded_nodes_are_increasing():
    r = graded_nodes(2.0, 0.1, fine=[(0, 0.2, 0.01)])
    assert r[0] == 0 and r[-1] == 2.0
    assert np.all(np.diff(r) > 0)
    assert np.diff(r)[:10].max() <= 0.01 + 1e-12


def test_csv_roundtrip(tmp_path, sphere):
    sphere.to_csv(tmp_path)
    back = SampledManifold.from_csv(tmp_path)
    assert back.ids == sphere.ids
    assert np.array_equal(back.lengths, sphere.lengths)
    assert np.array_equal(back.distances([0]), sphere.distances([0]))


def test_injectivity_proxy_round(sphere):
    r = injectivity_radius_proxy(sphere, 0, np.linspace(0.2, 3.0, 15))
    assert 2.5 < r <= 3.0


def test_unknown_kind():
    with pytest.raises(ValueError):
        metric_from_description({"kind": "torus"})
    assert isinstance(metric_from_description({"kind": "round"}), RoundSphere)
