import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from distset import geometry as geo
from distset.dual import (danskin_grad, dual_from_projection, duality_gap, finite_diff_check,
                          solve_dual_ellipsoid_affine, support_ellipsoid_affine)
from distset.models.monotone import difference_matrix

from strategies import set_and_points

cp = pytest.importorskip("cvxpy")


def cvx_project(S, y):
    z = cp.Variable(S.dim)
    Qinv = np.linalg.inv(S.shape)
    Qinv = 0.5 * (Qinv + Qinv.T)
    cons = [cp.quad_form(z - S.center, Qinv) <= S.level]
    if S.A.shape[0]:
        cons.append(S.A @ (z - S.center) <= S.b)
    cp.Problem(cp.Minimize(cp.sum_squares(y - z)), cons).solve(solver=cp.CLARABEL)
    return z.value


def test_unconstrained_case_matches_ellipsoid():
    sol = solve_dual_ellipsoid_affine(np.array([3.0, 4.0]), np.eye(2), 1.0)
    assert np.allclose(sol.u_hat, [2.4, 3.2], atol=1e-9)
    assert np.allclose(sol.z_hat([3.0, 4.0]), [0.6, 0.8], atol=1e-9)
    assert sol.dual_value == pytest.approx(8.0, abs=1e-4)


def test_interior_point_zero_dual():
    S = geo.EllipsoidAffine(np.eye(2), 1.0, np.array([[1.0, 0.0]]), np.array([0.5]))
    sol = solve_dual_ellipsoid_affine(np.array([0.1, 0.1]), set_=S)
    assert np.allclose(sol.u_hat, 0.0) and abs(sol.dual_value) <= 1e-4
    assert duality_gap(S, np.array([0.1, 0.1]), sol) <= 1e-10


def test_monotone_cone_against_cvxpy():
    S = geo.EllipsoidAffine(np.eye(3), 3.0, difference_matrix(3), np.zeros(2))
    y = np.array([2.0, 0.0, -2.0])
    z = solve_dual_ellipsoid_affine(y, set_=S, tol=1e-12).z_hat(y)
    # cvxpy oracle: the isotonic fit of a decreasing vector is its mean, here 0
    assert np.allclose(z, cvx_project(S, y), atol=1e-5)
    assert np.allclose(z, 0.0, atol=1e-5)


def test_duality_gap_random_spd(rng):
    worst = 0.0
    for _ in range(50):
        M = rng.normal(size=(5, 5))
        S = geo.EllipsoidAffine(M @ M.T / 5 + 0.3 * np.eye(5), 1.0, rng.normal(size=(3, 5)), rng.uniform(0, 0.5, 3))
        y = 3.0 * rng.normal(size=5)
        worst = max(worst, duality_gap(S, y, solve_dual_ellipsoid_affine(y, set_=S, eps=1e-10)))
    assert worst <= 1e-4


@settings(max_examples=25)
@given(set_and_points(families=("ellipsoid-affine",), max_dim=4))
def test_dual_projection_matches_cvxpy(case):
    S, y = case
    z = solve_dual_ellipsoid_affine(y, set_=S, tol=1e-11).z_hat(y)
    assert np.allclose(z, cvx_project(S, y), atol=2e-4)


@settings(max_examples=25)
@given(set_and_points(families=("ellipsoid-affine",), max_dim=4))
def test_weak_duality(case):
    # any dual value (smoothing included) is at most the primal optimum
    S, y = case
    sol = solve_dual_ellipsoid_affine(y, set_=S)
    primal = 0.5 * float(np.sum((y - cvx_project(S, y)) ** 2))
    assert sol.dual_value <= primal + 1e-5


def test_support_function_of_polytope_ellipsoid(rng):
    S = geo.EllipsoidAffine(np.eye(2), 1.0, np.array([[1.0, 0.0]]), np.array([0.0]))
    # half disk x <= 0: support in direction (1, 0) is 0, in (0, 1) is 1
    assert support_ellipsoid_affine(S, np.array([1.0, 0.0])) == pytest.approx(0.0, abs=1e-4)
    assert support_ellipsoid_affine(S, np.array([0.0, 1.0])) == pytest.approx(1.0, abs=1e-4)


def test_ellipsoid_radius_gradient():
    S = geo.Ellipsoid(np.eye(2), 1.0)
    y = np.array([3.0, 4.0])
    dual = dual_from_projection(S, y)
    assert np.allclose(dual.u_hat, [2.4, 3.2])
    assert danskin_grad(S, y, dual) == pytest.approx(-4.0, rel=1e-9)
    f = lambda r: geo.project(geo.with_radius(S, float(r)), y).distance ** 2
    assert finite_diff_check(f, -4.0, 1.0) <= 1e-4


def test_l1_radius_gradient():
    S = geo.L1Ball(np.zeros(3), 1.0)
    y = np.array([2.0, -0.5, 0.8])
    g = danskin_grad(S, y)
    assert g == pytest.approx(-2.0 * np.abs(y - geo.project(S, y).z_hat).max())
    f = lambda r: geo.project(geo.with_radius(S, float(r)), y).distance ** 2
    assert finite_diff_check(f, g, 1.0) <= 1e-6


def test_interior_gradients_zero():
    S = geo.L2Ball(np.zeros(2), 1.0)
    g, flag = danskin_grad(S, np.array([0.1, 0.2]), with_flag=True)
    assert g == 0.0 and flag
    assert np.allclose(danskin_grad(S, np.array([0.1, 0.2]), wrt="center"), 0.0)


def test_center_gradient_finite_difference(rng):
    S = geo.Ellipsoid(np.diag([2.0, 0.5]), 1.0, np.array([0.2, 0.1]))
    y = np.array([2.0, 1.5])
    g = danskin_grad(S, y, wrt="center")
    f = lambda c: geo.project(geo.Ellipsoid(S.shape, 1.0, c), y).distance ** 2
    assert finite_diff_check(f, g, S.center) <= 1e-6


def test_finite_diff_helper():
    assert finite_diff_check(lambda t: t ** 2, 6.0, 3.0, h=1e-5) <= 1e-8
    assert finite_diff_check(lambda t: 1.0, 0.0, 3.0) == 0.0


@given(set_and_points(families=("l1", "l2", "ellipsoid")))
def test_danskin_matches_finite_differences(case):
    S, y = case
    if geo.contains(S, y):
        return
    r0 = S.level if isinstance(S, geo.Ellipsoid) else S.radius
    g = danskin_grad(S, y)
    f = lambda r: geo.project(geo.with_radius(S, float(r)), y).distance ** 2
    assert finite_diff_check(f, g, r0, h=1e-6 * max(1.0, r0)) <= 1e-3
