import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from distset import geometry as geo
from distset.oracles import grid_project, l1_kkt_project

from strategies import convex_sets, set_and_points, vectors

ALL_FAMILIES = ("l1", "l2", "ellipsoid", "ellipsoid-affine", "point")


# ------------------------------------------------------------ membership

def test_membership_examples():
    B = geo.L1Ball(np.zeros(2), 1.0)
    assert geo.contains(B, [0.5, 0.4])
    assert not geo.contains(B, [2.0, 1.0])
    assert geo.contains(geo.Ellipsoid(np.eye(2), 1.0), [1.0, 0.0])


def test_invalid_sets_rejected():
    with pytest.raises(geo.GeometryError):
        geo.L2Ball(np.zeros(2), -1.0)
    with pytest.raises(geo.GeometryError):
        geo.Ellipsoid(np.array([[1.0, 2.0], [2.0, 1.0]]), 1.0)
    with pytest.raises(geo.GeometryError):
        geo.project(geo.L2Ball(np.zeros(2), 1.0), [1.0, 2.0, 3.0])


# ------------------------------------------------------------ closed forms

def test_l1_examples():
    p = geo.project_l1_ball([0.3, -0.2], np.zeros(2), 1.0)
    assert np.allclose(p.z_hat, [0.3, -0.2]) and p.distance == 0.0 and p.multiplier == 0.0
    # oracle: cvxpy gives z=(1, 0), dist=sqrt(2)
    p = geo.project_l1_ball([2.0, 1.0], np.zeros(2), 1.0)
    assert np.allclose(p.z_hat, [1.0, 0.0], atol=1e-12)
    assert p.distance == pytest.approx(math.sqrt(2.0), rel=1e-12)
    assert p.multiplier == pytest.approx(1.0)
    p = geo.project_l1_ball([3.0, 0.0], np.zeros(2), 1.0)
    assert np.allclose(p.z_hat, [1.0, 0.0]) and p.distance == pytest.approx(2.0)


def test_l2_examples():
    p = geo.project_l2_ball([3.0, 4.0], np.zeros(2), 1.0)
    assert np.allclose(p.z_hat, [0.6, 0.8]) and p.distance == pytest.approx(4.0)
    p = geo.project_l2_ball([1.0, 0.0], [1.0, 0.0], 1.0)
    assert p.distance == 0.0
    p = geo.project_l2_ball([2.0, 0.0], [1.0, 0.0], 0.5)
    assert np.allclose(p.z_hat, [1.5, 0.0]) and p.distance == pytest.approx(0.5)


def test_ellipsoid_examples():
    p = geo.project_ellipsoid([3.0, 4.0], np.eye(2), 1.0)
    assert np.allclose(p.z_hat, [0.6, 0.8], atol=1e-9) and p.distance == pytest.approx(4.0)
    # oracle: cvxpy gives z=(2, 0), dist=2
    p = geo.project_ellipsoid([4.0, 0.0], np.diag([4.0, 1.0]), 1.0)
    assert np.allclose(p.z_hat, [2.0, 0.0], atol=1e-9) and p.distance == pytest.approx(2.0, rel=1e-9)
    p = geo.project_ellipsoid([0.5, 0.1], np.diag([4.0, 1.0]), 1.0)
    assert p.distance == 0.0 and p.multiplier == 0.0


def test_weighted_soft_threshold_examples():
    d, lam = geo.project_weighted_soft_threshold([0.1, -0.1], [10, 10], 1.0)
    assert np.allclose(d, [0.1, -0.1]) and lam == 0.0
    d, lam = geo.project_weighted_soft_threshold([1.0, -1.0], [1, 1], 1.0)
    assert np.allclose(d, [0.5, -0.5]) and lam == pytest.approx(0.5)
    d, lam = geo.project_weighted_soft_threshold([2.0, 0.1], [1, 1], 1.0)
    assert np.allclose(d, [1.0, 0.0]) and lam == pytest.approx(1.0)


def test_weighted_soft_threshold_at_single_group():
    deltas, r, drdl = geo.weighted_soft_threshold_at([1.0], [4.0], 2.0)
    assert deltas[0] == pytest.approx(0.5) and r == pytest.approx(0.5) and drdl == pytest.approx(0.25)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=8), st.floats(0.05, 4.0), st.data())
def test_weighted_threshold_hits_radius(means, radius, data):
    m = np.array(means)
    n = np.array(data.draw(st.lists(st.integers(1, 20), min_size=m.size, max_size=m.size)), float)
    d, lam = geo.project_weighted_soft_threshold(m, n, radius)
    if np.abs(m).sum() > radius:
        assert np.abs(d).sum() == pytest.approx(radius, rel=1e-9, abs=1e-12)
        # KKT: group residual n(m - delta) equals lam sign(delta) on the active set, at most lam elsewhere
        assert np.all(n * np.abs(m - d) <= lam * (1 + 1e-9) + 1e-12)
    else:
        assert np.allclose(d, m) and lam == 0.0


def test_secular_root_solves_equation():
    w, p = np.array([1.0, 4.0, 0.5]), np.array([1.0, 2.0, 3.0])
    lam, _ = geo.secular_root(w, p, 0.05)
    assert np.sum(w / (p + lam) ** 2) == pytest.approx(0.05, rel=1e-9)


def test_support_function_examples():
    assert geo.support_function(geo.L1Ball(np.zeros(2), 2.0), [1.0, 3.0]) == pytest.approx(6.0)
    assert geo.support_function(geo.Ellipsoid(np.eye(2), 4.0), [3.0, 4.0]) == pytest.approx(10.0)
    assert geo.support_function(geo.L2Ball([1.0, 0.0], 1.0), [0.0, 1.0]) == pytest.approx(1.0)


def test_normal_cone_examples():
    B = geo.L2Ball(np.zeros(2), 1.0)
    assert geo.normal_cone_check(B, np.array([1.0, 0.0]), np.array([2.0, 0.0]))
    assert not geo.normal_cone_check(B, np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    assert geo.normal_cone_check(geo.L1Ball(np.zeros(2), 1.0), np.array([1.0, 0.0]), np.array([1.0, 0.5]))
    assert not geo.normal_cone_check(geo.L1Ball(np.zeros(2), 1.0), np.array([1.0, 0.0]), np.array([1.0, 1.5]))


def test_product_set():
    P = geo.ProductSet((geo.L2Ball(np.zeros(2), 1.0), geo.L2Ball(np.zeros(2), 1.0)))
    res = geo.project(P, [[3.0, 4.0], [0.0, 0.0]])
    assert [q.distance for q in res.parts] == pytest.approx([4.0, 0.0])
    assert res.sq_distance == pytest.approx(16.0)


def test_point_set_distance():
    P = geo.Point([1.0, 2.0])
    assert geo.distance(P, [4.0, 6.0]) == pytest.approx(5.0)


def test_batch_distance_matches_scalar(rng):
    for S in (geo.L1Ball(rng.normal(size=3), 1.0), geo.L2Ball(rng.normal(size=3), 0.7),
              geo.Ellipsoid(np.diag([1.0, 2.0, 0.5]), 1.3, rng.normal(size=3))):
        X = 2.0 * rng.normal(size=(50, 3))
        assert np.allclose(geo.batch_distance(S, X), [geo.distance(S, x) for x in X], atol=1e-10)


def test_l1_rows_match_single(rng):
    Y = 3.0 * rng.normal(size=(40, 5))
    c = rng.normal(size=5)
    Z, lam = geo.project_l1_rows(Y, c, 1.5)
    for y, z in zip(Y, Z):
        assert np.allclose(z, geo.project_l1_ball(y, c, 1.5).z_hat, atol=1e-12)


def test_l1_against_kkt_enumeration(rng):
    for _ in range(50):
        y, c = 3.0 * rng.normal(size=4), rng.normal(size=4)
        z, _ = l1_kkt_project(y, c, 1.0)
        assert np.allclose(geo.project_l1_ball(y, c, 1.0).z_hat, z, atol=1e-10)


def test_ellipsoid_against_grid_oracle(rng):
    E = geo.Ellipsoid(np.array([[2.0, 0.5], [0.5, 1.0]]), 1.5, [0.3, -0.2])
    for _ in range(5):
        y = 3.0 * rng.normal(size=2)
        z, dist, h = grid_project(E, y)
        assert np.allclose(geo.project(E, y).z_hat, z, atol=1e-6)


# ------------------------------------------------------------ properties

@given(set_and_points(families=ALL_FAMILIES))
def test_projection_is_feasible_and_idempotent(case):
    S, y = case
    p = geo.project(S, y, tol=1e-12) if isinstance(S, geo.EllipsoidAffine) else geo.project(S, y)
    assert geo.contains(S, p.z_hat, tol=1e-6)
    assert p.distance == pytest.approx(float(np.linalg.norm(y - p.z_hat)), rel=1e-12, abs=1e-14)
    q = geo.project(S, p.z_hat)
    assert q.distance <= 1e-6


@given(set_and_points(k=2))
def test_projection_is_nonexpansive(case):
    S, y1, y2 = case
    z1, z2 = geo.project(S, y1).z_hat, geo.project(S, y2).z_hat
    assert np.linalg.norm(z1 - z2) <= np.linalg.norm(y1 - y2) + 1e-9


@given(set_and_points(), st.data())
def test_translation_equivariance(case, data):
    S, y = case
    s = data.draw(vectors(S.dim))
    p, q = geo.project(S, y), geo.project(geo.translate(S, s), y + s)
    assert abs(q.distance - p.distance) <= 1e-9 * max(1.0, p.distance)
    assert np.allclose(q.z_hat - s, p.z_hat, atol=1e-9)


@given(set_and_points(families=("l1", "l2", "ellipsoid")))
def test_residual_in_normal_cone(case):
    # variational inequality (y - z)^T (zeta - z) <= 0 for sampled members zeta
    S, y = case
    p = geo.project(S, y)
    assert geo.normal_cone_check(S, p.z_hat, y - p.z_hat, n_probe=300, tol=1e-7)


@given(set_and_points(families=("l1", "l2", "ellipsoid")))
def test_distance_lower_bounds_members(case):
    S, y = case
    p = geo.project(S, y)
    for z in (geo.anchor(S), p.z_hat):
        assert p.distance <= np.linalg.norm(y - z) + 1e-9


@given(convex_sets(families=("l1", "l2", "ellipsoid")), st.floats(0.2, 3.0))
def test_support_function_positively_homogeneous(S, t):
    u = np.linspace(-1.0, 1.0, S.dim) + 0.3
    c = geo.anchor(S)
    # h(t u) - t c.u = t (h(u) - c.u)
    assert geo.support_function(S, t * u) - t * c @ u == pytest.approx(t * (geo.support_function(S, u) - c @ u), rel=1e-9, abs=1e-9)


@given(set_and_points(families=("l1", "l2", "ellipsoid")))
def test_batch_distance_zero_inside(case):
    # interior points must report exactly 0, not roundoff, or shell tests admit them
    S, y = case
    z = geo.project(S, y).z_hat
    inner = geo.anchor(S) + 0.5 * (z - geo.anchor(S))
    assert geo.batch_distance(S, inner[None, :])[0] == 0.0
