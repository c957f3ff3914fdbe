"""Projection duals, the ellipsoid-with-halfspaces solver and Danskin gradients.

For a closed convex set C,

    min_{z in C} 0.5 ||y - z||^2  =  max_u  y^T u - 0.5 ||u||^2 - S_C(u),

with S_C the support function and z_hat = y - u_hat.  For
C = {(z-c)^T Q^{-1} (z-c) <= r, A(z-c) <= b} the support function is an
infimal convolution over multipliers v >= 0 of the halfspaces.  Maximizing
over u in closed form (it is a Moreau step onto the ellipsoid) leaves a smooth
concave problem in v alone,

    g(v) = 0.5 dist^2(y - A^T v, E) + v^T A y - 0.5 ||A^T v||^2 - b^T v,
    grad g(v) = A P_E(y - A^T v) - b,

which L-BFGS-B handles with simple bounds.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from . import geometry as geo

DEFAULT_EPS = 1e-10


@dataclass
class DualSolution:
    u_hat: np.ndarray
    v_hat: Optional[np.ndarray]
    dual_value: float
    gradient_norm_at_exit: float
    iterations: int
    smoothing_eps: float = DEFAULT_EPS
    converged: bool = True

    def z_hat(self, y):
        return np.asarray(y, dtype=float) - self.u_hat


def _prep(Q, r, A, b, center):
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    d = Q.shape[0]
    A = np.zeros((0, d)) if A is None else np.asarray(A, dtype=float).reshape(-1, d)
    b = np.zeros(0) if b is None else np.atleast_1d(np.asarray(b, dtype=float))
    return geo.EllipsoidAffine(Q, r, A, b, center)


def _dual_objective(x, u, v, C, eps=0.0):
    """y^T u - 0.5||u||^2 - b^T v - sqrt(r w^T Q w + eps), in center-shifted coordinates."""
    w = u - C.A.T @ v
    return float(x @ u - 0.5 * u @ u - C.b @ v - np.sqrt(max(C.level * w @ C.shape @ w, 0.0) + eps))


def solve_dual_ellipsoid_affine(y, Q=None, r=None, A=None, b=None, eps=DEFAULT_EPS,
                                max_iter=500, tol=1e-8, center=None, memory=10, set_=None):
    """Dual maximizer (u_hat, v_hat) for the projection of y onto ellipsoid-with-halfspaces."""
    C = set_ if set_ is not None else _prep(Q, r, A, b, center)
    y = np.asarray(y, dtype=float)
    x = y - C.center
    E0 = geo.Ellipsoid(C.shape, C.level)  # centered copy
    m = C.A.shape[0]

    def moreau(v):
        xp = x - C.A.T @ v
        return xp, geo._project_ellipsoid(E0, xp).z_hat

    if m == 0 or (geo.contains(C, y, tol=0.0)):
        v = np.zeros(m)
        xp, z = moreau(v)
        u = x - z
        return DualSolution(u, v if m else None, _dual_objective(x, u, v, C), 0.0, 0, eps, True)

    Ax = C.A @ x

    def negg(v):
        xp, z = moreau(v)
        ATv = C.A.T @ v
        g = 0.5 * np.sum((xp - z) ** 2) + v @ Ax - 0.5 * ATv @ ATv - C.b @ v
        return -g, -(C.A @ z - C.b)

    # warm start: multipliers of the halfspaces violated by the ellipsoid projection stay at 0
    res = minimize(negg, np.zeros(m), jac=True, method="L-BFGS-B", bounds=[(0.0, None)] * m,
                   options=dict(maxcor=memory, maxiter=max_iter, gtol=tol, ftol=1e-16))
    v = np.maximum(res.x, 0.0)
    xp, z = moreau(v)
    u = x - z
    grad = -(C.A @ z - C.b)
    pg = np.where((v <= 0) & (grad > 0), 0.0, grad)
    pgn = float(np.abs(pg).max())
    converged = bool(res.nit < max_iter or pgn < tol)
    return DualSolution(u, v, _dual_objective(x, u, v, C), pgn, int(res.nit), eps, converged)


def project_ellipsoid_affine(set_, y, eps=DEFAULT_EPS, max_iter=500, tol=1e-8):
    sol = solve_dual_ellipsoid_affine(y, set_=set_, eps=eps, max_iter=max_iter, tol=tol)
    z = sol.z_hat(y)
    return geo.ProjectionResult(z_hat=z, distance=float(np.linalg.norm(sol.u_hat)),
                                dual_point=sol.u_hat, converged=sol.converged, iterations=sol.iterations,
                                multiplier=None, deltas=sol.v_hat)


def support_ellipsoid_affine(set_, u, eps=DEFAULT_EPS):
    """c^T u + min_{v >= 0} b^T v + sqrt(r (u - A^T v)^T Q (u - A^T v))."""
    C = set_
    u = np.asarray(u, dtype=float)
    m = C.A.shape[0]
    base = float(C.center @ u)
    if m == 0:
        return base + float(np.sqrt(C.level * u @ C.shape @ u))

    def h(v):
        w = u - C.A.T @ v
        Qw = C.shape @ w
        s = np.sqrt(C.level * w @ Qw + eps)
        return C.b @ v + s, C.b - C.A @ (C.level * Qw) / s

    res = minimize(h, np.zeros(m), jac=True, method="L-BFGS-B", bounds=[(0.0, None)] * m,
                   options=dict(maxiter=2000, gtol=1e-12, ftol=1e-16))
    v = np.maximum(res.x, 0.0)
    w = u - C.A.T @ v
    return base + float(C.b @ v + np.sqrt(max(C.level * w @ C.shape @ w, 0.0)))


# ---------------------------------------------------------------- certificates

def dual_from_projection(set_, y, proj=None):
    """Moreau recovery u_hat = y - z_hat for sets with a direct projector."""
    if isinstance(set_, geo.EllipsoidAffine):
        return solve_dual_ellipsoid_affine(y, set_=set_)
    proj = geo.project(set_, y) if proj is None else proj
    yv = geo._point(set_, y)
    u = yv - proj.z_hat
    val = float(yv @ u - 0.5 * u @ u - geo.support_function(set_, u))
    return DualSolution(u, None, val, 0.0, 0, 0.0, True)


def _primal_half_sq(set_, y, start=None):
    """0.5 dist^2 from an independent primal solve."""
    if not isinstance(set_, geo.EllipsoidAffine):
        return 0.5 * geo.project(set_, y).distance ** 2
    C = set_
    y = np.asarray(y, dtype=float)
    e, U = C.ellipsoid.eig
    Qinv = (U / e) @ U.T
    cons = [{"type": "ineq", "fun": lambda z: C.level - (z - C.center) @ Qinv @ (z - C.center),
             "jac": lambda z: -2.0 * Qinv @ (z - C.center)}]
    if C.A.shape[0]:
        cons.append({"type": "ineq", "fun": lambda z: C.b - C.A @ (z - C.center), "jac": lambda z: -C.A})
    z0 = C.center.copy() if start is None else np.asarray(start, dtype=float)
    res = minimize(lambda z: (0.5 * np.sum((y - z) ** 2), z - y), z0, jac=True, method="SLSQP",
                   constraints=cons, options=dict(ftol=1e-15, maxiter=1000))
    z = res.x
    # pull a slightly infeasible answer back along the segment to the center
    if not geo.contains(C, z, tol=0.0):
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if geo.contains(C, C.center + mid * (z - C.center), tol=0.0):
                lo = mid
            else:
                hi = mid
        z = C.center + lo * (z - C.center)
    return 0.5 * float(np.sum((y - z) ** 2))


def duality_gap(set_, y, dual):
    if dual.u_hat is not None and np.all(dual.u_hat == 0) and geo.contains(set_, y, tol=0.0):
        return abs(dual.dual_value)
    primal = _primal_half_sq(set_, y, start=dual.z_hat(y))
    return abs(primal - dual.dual_value)


# ---------------------------------------------------------------- Danskin gradients

def danskin_grad(set_, y, dual=None, wrt="radius", with_flag=False):
    """-2 dS(u)/dtheta at the dual maximizer: the gradient of dist^2(y, set) in theta.

    wrt: "radius" (radius or level), "center" (center or baseline), "shape"
    (the matrix Q) or "b" (halfspace offsets).  A zero dual point on a
    non-smooth support function returns the zero subgradient; with_flag
    reports that selection.
    """
    dual = dual_from_projection(set_, y) if dual is None else dual
    u = dual.u_hat
    flag = False
    if isinstance(set_, geo.ProductSet):
        offs = set_.offsets
        grads, flags = [], []
        for i, p in enumerate(set_.parts):
            ui = u[offs[i]:offs[i + 1]]
            sub = DualSolution(ui, None, 0.0, 0.0, 0, dual.smoothing_eps)
            g, f = danskin_grad(p, None, sub, wrt, with_flag=True)
            grads.append(g)
            flags.append(f)
        flag = any(flags)
        if wrt == "radius":
            out = np.sum(grads)
        else:
            out = np.concatenate([np.ravel(g) for g in grads])
        return (out, flag) if with_flag else out

    if wrt == "center":
        out = -2.0 * u
        return (out, flag) if with_flag else out

    unorm = float(np.linalg.norm(u))
    if isinstance(set_, geo.L1Ball):
        if wrt != "radius":
            raise ValueError(f"L1Ball has no parameter {wrt!r}")
        flag = unorm == 0
        out = -2.0 * float(np.abs(u).max()) if u.size else 0.0
    elif isinstance(set_, geo.L2Ball):
        if wrt != "radius":
            raise ValueError(f"L2Ball has no parameter {wrt!r}")
        flag = unorm == 0
        out = -2.0 * unorm
    elif isinstance(set_, geo.MultiEnvDeviation):
        if wrt != "radius":
            raise ValueError(f"MultiEnvDeviation has no parameter {wrt!r}")
        s = np.bincount(set_.group, weights=u * set_.treated, minlength=set_.n_groups)
        flag = unorm == 0
        out = -2.0 * float(np.abs(s).max())
    elif isinstance(set_, (geo.Ellipsoid, geo.EllipsoidAffine)):
        Q, r = set_.shape, set_.level
        if isinstance(set_, geo.EllipsoidAffine) and dual.v_hat is not None:
            v = dual.v_hat
            w = u - set_.A.T @ v
        else:
            v = np.zeros(getattr(set_, "A", np.zeros((0, 0))).shape[0])
            w = u
        q = float(w @ Q @ w)
        flag = q == 0
        if wrt == "radius":
            # d/dr sqrt(r q) = q / (2 sqrt(r q))
            out = -q / np.sqrt(r * q + dual.smoothing_eps) if q > 0 else 0.0
        elif wrt == "shape":
            out = -r * np.outer(w, w) / np.sqrt(r * q + dual.smoothing_eps) if q > 0 else np.zeros_like(Q)
        elif wrt == "b":
            if not isinstance(set_, geo.EllipsoidAffine):
                raise ValueError("Ellipsoid has no parameter 'b'")
            out = -2.0 * v
        else:
            raise ValueError(f"unknown parameter {wrt!r}")
    elif isinstance(set_, geo.Point):
        raise ValueError(f"Point has no parameter {wrt!r}")
    else:
        raise TypeError(f"unsupported set {type(set_).__name__}")
    return (out, flag) if with_flag else out


def finite_diff_check(f: Callable, grad, theta0, h=1e-5):
    """Max over coordinates of |central difference - grad| / max(1, |grad|)."""
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    grad = np.atleast_1d(np.asarray(grad, dtype=float)).reshape(theta0.shape)
    worst = 0.0
    for k in np.ndindex(theta0.shape):
        tp, tm = theta0.copy(), theta0.copy()
        tp[k] += h
        tm[k] -= h
        fd = (f(tp if tp.size > 1 else tp[0]) - f(tm if tm.size > 1 else tm[0])) / (2 * h)
        worst = max(worst, abs(fd - grad[k]) / max(1.0, abs(grad[k])))
    return float(worst)
