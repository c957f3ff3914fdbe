"""Brute-force projection oracles that share no code path with the closed-form projections.

``grid_project`` minimizes ||y - z|| by grid search using only a vectorized
membership test; it is exact to grid resolution on smooth boundaries.
Faceted sets use active-set enumeration instead (``l1_kkt_project``,
``ellipsoid_affine_kkt_project``).  All are meant for d <= 3.
"""
from __future__ import annotations

import itertools

import numpy as np

from . import geometry as geo


def membership(set_):
    """Vectorized z -> bool for full-dimensional sets, written from the set definitions."""
    if isinstance(set_, geo.L1Ball):
        return lambda Z: np.abs(Z - set_.center).sum(axis=1) <= set_.radius
    if isinstance(set_, geo.L2Ball):
        return lambda Z: np.sum((Z - set_.center) ** 2, axis=1) <= set_.radius ** 2
    if isinstance(set_, (geo.Ellipsoid, geo.EllipsoidAffine)):
        Qinv = np.linalg.inv(set_.shape)

        def inside(Z):
            D = Z - set_.center
            ok = np.einsum("ij,jk,ik->i", D, Qinv, D) <= set_.level
            if isinstance(set_, geo.EllipsoidAffine):
                ok &= np.all(D @ set_.A.T <= set_.b, axis=1)
            return ok
        return inside
    raise TypeError(f"no membership oracle for {type(set_).__name__}")


def _zoom_min(objective, feasible, lo, hi, n=41, rounds=14, shrink=4.0):
    """Minimize objective(P) over feasible P (rows) by repeated grid refinement around the incumbent."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    d = lo.size
    best, best_val = None, np.inf
    for _ in range(rounds):
        axes = [np.linspace(lo[j], hi[j], n) for j in range(d)]
        P = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        ok = feasible(P)
        if ok.any():
            vals = objective(P[ok])
            k = int(np.argmin(vals))
            if vals[k] < best_val:
                best, best_val = P[ok][k], float(vals[k])
        if best is None:
            raise RuntimeError("grid found no feasible point")
        h = (hi - lo) / (n - 1)
        half = shrink * h
        lo, hi = best - half, best + half
    return best, best_val, float(np.max(hi - lo) / (n - 1))


def _directions(angles):
    """Unit vectors from spherical angles (one angle in 2-d, two in 3-d)."""
    if angles.shape[1] == 1:
        t = angles[:, 0]
        return np.column_stack([np.cos(t), np.sin(t)])
    p, t = angles[:, 0], angles[:, 1]
    return np.column_stack([np.sin(p) * np.cos(t), np.sin(p) * np.sin(t), np.cos(p)])


def _radial(inside, origin, dirs, reach, iters=60):
    """Largest t with origin + t * dir in the set, by bisection on membership."""
    lo = np.zeros(len(dirs))
    hi = np.full(len(dirs), reach)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ok = inside(origin + mid[:, None] * dirs)
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    return lo


def _interior_point(inside, c, R, n=25):
    d = c.size
    axes = [np.linspace(-R, R, n)] * d
    P = c + np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    ok = inside(P)
    if not ok.any():
        raise RuntimeError("no interior grid point found")
    return P[ok].mean(axis=0)


def _boundary_project(inside, y, c, R, n_first=181, n=41, rounds=30):
    d = y.size
    origin = _interior_point(inside, c, R)
    reach = 2.0 * R + float(np.linalg.norm(origin - c)) + 1e-9
    if d == 1:
        cands = origin + np.array([[1.0], [-1.0]]) * _radial(inside, origin, np.array([[1.0], [-1.0]]), reach)[:, None]
        k = int(np.argmin(np.abs(cands[:, 0] - y[0])))
        return cands[k], 0.0

    def boundary(A):
        dirs = _directions(A)
        return origin + _radial(inside, origin, dirs, reach)[:, None] * dirs

    lo = np.zeros(d - 1)
    hi = np.array([2 * np.pi] if d == 2 else [np.pi, 2 * np.pi])
    m = n_first
    best, best_val, h = None, np.inf, None
    for _ in range(rounds):
        axes = [np.linspace(lo[j], hi[j], m) for j in range(d - 1)]
        A = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d - 1)
        B = boundary(A)
        vals = np.sum((B - y) ** 2, axis=1)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best, best_val, best_a = B[k], float(vals[k]), A[k]
        h = (hi - lo) / (m - 1)
        lo, hi = best_a - 4 * h, best_a + 4 * h
        m = n
    return best, float(np.max(h))


def grid_project(set_, y, n=41, rounds=30):
    """(z, dist, final grid step) by brute-force search.

    Full-dimensional sets: y itself if it passes the membership test,
    otherwise the nearest boundary point over a zooming grid of directions
    from an interior point (boundary located by bisection on membership).
    Lower-dimensional families search a grid over their parameters.
    """
    y = np.asarray(y, dtype=float)
    if isinstance(set_, geo.Point):
        return set_.center.copy(), float(np.linalg.norm(y - set_.center)), 0.0
    if isinstance(set_, geo.MultiEnvDeviation):
        # z = baseline + D delta with ||delta||_1 <= radius; search delta
        S = set_.n_groups
        D = np.zeros((set_.dim, S))
        D[np.arange(set_.dim), set_.group] = set_.treated
        R = set_.radius
        feas = lambda P: np.abs(P).sum(axis=1) <= R
        obj = lambda P: np.sum((y - set_.baseline - P @ D.T) ** 2, axis=1)
        delta, val, h = _zoom_min(obj, feas, -R * np.ones(S), R * np.ones(S), n, 14)
        z = set_.baseline + D @ delta
        return z, float(np.sqrt(val)), h
    if isinstance(set_, geo.ProductSet):
        zs, d2, hs = [], 0.0, []
        for part, yp in zip(set_.parts, set_.split(y)):
            z, dist, h = grid_project(part, yp, n, rounds)
            zs.append(z)
            d2 += dist ** 2
            hs.append(h)
        return np.concatenate(zs), float(np.sqrt(d2)), max(hs)
    inside = membership(set_)
    if inside(y[None, :])[0]:
        return y.copy(), 0.0, 0.0
    z, h = _boundary_project(inside, y, geo.anchor(set_), geo.bounding_radius(set_), n=n, rounds=rounds)
    return z, float(np.linalg.norm(y - z)), h


def l1_kkt_project(y, center, radius):
    """Projection onto {z : ||z - c||_1 <= radius} by enumerating active supports.

    On support S with signs s = sign(y - c), z_j = c_j + s_j (|y_j - c_j| - lam)
    and lam = (sum_S |y_j - c_j| - radius) / |S|; a support is valid when
    |y_j - c_j| > lam on S and <= lam off S.
    """
    y, c = np.asarray(y, float), np.asarray(center, float)
    a = np.abs(y - c)
    if a.sum() <= radius:
        return y.copy(), 0.0
    d = a.size
    best = None
    for k in range(1, d + 1):
        for S in itertools.combinations(range(d), k):
            S = list(S)
            lam = (a[S].sum() - radius) / k
            off = np.setdiff1d(np.arange(d), S)
            if lam >= 0 and np.all(a[S] > lam) and np.all(a[off] <= lam + 1e-12):
                z = c.copy()
                z[S] = c[S] + np.sign(y - c)[S] * (a[S] - lam)
                dist = float(np.linalg.norm(y - z))
                if best is None or dist < best[1]:
                    best = (z, dist, lam)
    return best[0], best[2]


def _level_at(mu, y, z0, N, Qinv, c):
    if N.shape[1] == 0:
        z = z0
    else:
        M = N.T @ N + mu * N.T @ Qinv @ N
        t = np.linalg.solve(M, N.T @ (y - z0) - mu * N.T @ Qinv @ (z0 - c))
        z = z0 + N @ t
    return z, float((z - c) @ Qinv @ (z - c))


def ellipsoid_affine_kkt_project(set_, y, iters=200):
    """Nearest point of an ellipsoid-with-halfspaces set by enumerating active sets.

    For each subset of active halfspaces (as equalities), with the ellipsoid
    constraint either slack or tight, solve the reduced problem: an affine
    projection, or a monotone 1-d search for the ellipsoid multiplier.  The
    feasible candidate nearest to y is the projection.
    """
    y = np.asarray(y, float)
    c, A, b = set_.center, set_.A, set_.b
    Qinv = np.linalg.inv(set_.shape)
    d, m = y.size, A.shape[0]
    inside = membership(set_)
    if inside(y[None, :])[0]:
        return y.copy(), 0.0
    best, best_d = None, np.inf
    for k in range(0, min(m, d) + 1):
        for S in itertools.combinations(range(m), k):
            S = list(S)
            AS, bS = A[S], b[S]
            if k:
                if np.linalg.matrix_rank(AS) < k:
                    continue
                z0 = c + np.linalg.lstsq(AS, bS, rcond=None)[0]
                _, sv, Vt = np.linalg.svd(AS)
                N = Vt[k:].T
            else:
                z0, N = c.copy(), np.eye(d)
            cands = []
            # ellipsoid slack: plain affine projection of y
            cands.append(z0 + N @ (N.T @ (y - z0)) if N.shape[1] else z0)
            # ellipsoid tight: find mu >= 0 with level(mu) = r
            z, lev = _level_at(0.0, y, z0, N, Qinv, c)
            if lev > set_.level:
                lo, hi = 0.0, 1.0
                while _level_at(hi, y, z0, N, Qinv, c)[1] > set_.level and hi < 1e12:
                    hi *= 2.0
                for _ in range(iters):
                    mid = 0.5 * (lo + hi)
                    if _level_at(mid, y, z0, N, Qinv, c)[1] > set_.level:
                        lo = mid
                    else:
                        hi = mid
                cands.append(_level_at(hi, y, z0, N, Qinv, c)[0])
            for z in cands:
                D = z - c
                feas = D @ Qinv @ D <= set_.level * (1 + 1e-9) and np.all(A @ D <= b + 1e-9)
                dist = float(np.linalg.norm(y - z))
                if feas and dist < best_d:
                    best, best_d = z, dist
    return best, best_d


def oracle_project(set_, y):
    """(z, dist) from the brute-force oracle suited to the family."""
    if isinstance(set_, geo.L1Ball):
        z, _ = l1_kkt_project(y, set_.center, set_.radius)
        return z, float(np.linalg.norm(np.asarray(y, float) - z))
    if isinstance(set_, geo.EllipsoidAffine):
        return ellipsoid_affine_kkt_project(set_, y)
    z, dist, _ = grid_project(set_, y)
    return z, dist
