import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.distance import cdist

from surgerylab.metric_core import (FiniteMetricSpace, MalformedInputError,
                                    MismatchedPointsError, NotBijectiveError,
                                    bilipschitz_compare, pullback_metric, relabel,
                                    uniform_distance, verify_metric_axioms)


def euclid_space(n, seed=0, dim=3):
    x = np.random.default_rng(seed).normal(size=(n, dim))
    return FiniteMetricSpace(tuple(f"p{k}" for k in range(n)), cdist(x, x))


def test_construction_rejects_bad_input():
    with pytest.raises(MalformedInputError):
        FiniteMetricSpace(("a", "b"), np.zeros((2, 3)))
    with pytest.raises(MalformedInputError):
        FiniteMetricSpace(("a", "b"), np.array([[0, np.nan], [1, 0]]))
    with pytest.raises(MalformedInputError):
        FiniteMetricSpace(("a", "a"), np.array([[0, 1], [1, 0.0]]))


def test_matrix_is_read_only_copy():
    d = np.array([[0, 1], [1, 0.0]])
    s = FiniteMetricSpace(("a", "b"), d)
    d[0, 1] = 5
    assert s.distance("a", "b") == 1
    with pytest.raises(ValueError):
        s.dist[0, 1] = 2


def test_axioms_detect_triangle_violation():
    d = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0.0]])
    rep = verify_metric_axioms(d)
    assert not rep.passed
    assert rep.triangle_defect == pytest.approx(3.0)
    assert rep.worst_triple in {(0, 1, 2), (2, 1, 0)}


def test_axioms_detect_asymmetry_and_zero_offdiagonal():
    assert not verify_metric_axioms(np.array([[0, 1], [2, 0.0]])).passed
    assert not verify_metric_axioms(np.array([[0, 0], [0, 0.0]])).passed


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 25), st.integers(0, 10_000))
def test_euclidean_spaces_pass_axioms(n, seed):
    assert verify_metric_axioms(euclid_space(n, seed)).passed


def test_bilipschitz_of_scaled_metric():
    s = euclid_space(20)
    rep = bilipschitz_compare(s, s.scaled(2.0))
    assert rep.c_lower == pytest.approx(2.0)
    assert rep.C_upper == pytest.approx(2.0)
    assert rep.alpha == pytest.approx(2.0)
    assert rep.sup_abs_diff == pytest.approx(s.diameter)


def test_uniform_distance_uses_ids_not_positions():
    s = euclid_space(10)
    order = list(reversed(s.points))
    shuffled = FiniteMetricSpace(tuple(order), s.aligned(order))
    assert uniform_distance(s, shuffled) == 0.0
    with pytest.raises(MismatchedPointsError):
        uniform_distance(s, s.restrict(s.points[:5]))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2**32 - 1))
def test_pullback_is_isometric(n, seed):
    rng = np.random.default_rng(seed)
    target = euclid_space(n, seed)
    dom = [f"x{k}" for k in range(n)]
    perm = rng.permutation(n)
    F = {dom[k]: target.points[perm[k]] for k in range(n)}
    pb = pullback_metric(target, F)
    assert verify_metric_axioms(pb, tol=0.0).passed
    back = relabel(target, {v: k for k, v in F.items()})
    assert uniform_distance(pb, back) == 0.0


def test_pullback_rejects_non_bijection():
    t = euclid_space(3)
    with pytest.raises(NotBijectiveError):
        pullback_metric(t, {"a": "p0", "b": "p0", "c": "p1"})


def test_csv_and_binary_roundtrip(tmp_path):
    s = euclid_space(12, seed=3)
    s.to_csv(tmp_path / "d.csv")
    assert FiniteMetricSpace.from_csv(tmp_path / "d.csv") == s or \
        np.array_equal(FiniteMetricSpace.from_csv(tmp_path / "d.csv").dist, s.dist)
    blob = s.to_bytes()
    r = FiniteMetricSpace.from_bytes(blob, s.points)
    assert np.array_equal(r.dist, s.dist)
    s.save_cache(tmp_path / "d.bin")
    assert np.array_equal(FiniteMetricSpace.load_cache(tmp_path / "d.bin", s.points).dist, s.dist)
