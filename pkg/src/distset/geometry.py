"""Constraint-set descriptors, Euclidean projections and support functions.

Every set is an immutable dataclass.  ``project`` dispatches on the type and
returns a :class:`ProjectionResult`; ``support_function`` and ``contains`` do
the same for the dual representation and membership.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np

MEMBERSHIP_TOL = 1e-8
SECULAR_TOL = 1e-10


class GeometryError(ValueError):
    pass


class RootFindingError(RuntimeError):
    def __init__(self, msg, bracket):
        super().__init__(f"{msg} (bracket={bracket})")
        self.bracket = bracket


def _vec(x, name):
    a = np.atleast_1d(np.asarray(x, dtype=float))
    if a.ndim != 1:
        raise GeometryError(f"{name} must be a vector")
    if not np.all(np.isfinite(a)):
        raise GeometryError(f"{name} has non-finite entries")
    return a


def _positive(x, name):
    x = float(x)
    if not (x > 0 and np.isfinite(x)):
        raise GeometryError(f"{name} must be strictly positive, got {x}")
    return x


def _spd(Q, name="shape"):
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise GeometryError(f"{name} must be square")
    if not np.allclose(Q, Q.T, rtol=1e-10, atol=1e-12):
        raise GeometryError(f"{name} must be symmetric")
    Q = 0.5 * (Q + Q.T)
    if np.linalg.eigvalsh(Q)[0] <= 0:
        raise GeometryError(f"{name} must be positive definite")
    return Q


def _frozen(obj, **kw):
    for k, v in kw.items():
        if isinstance(v, np.ndarray):
            v.setflags(write=False)
        object.__setattr__(obj, k, v)


@dataclass(frozen=True, eq=False)
class L1Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        _frozen(self, center=_vec(self.center, "center"), radius=_positive(self.radius, "radius"))

    @property
    def dim(self):
        return self.center.size


@dataclass(frozen=True, eq=False)
class L2Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        _frozen(self, center=_vec(self.center, "center"), radius=_positive(self.radius, "radius"))

    @property
    def dim(self):
        return self.center.size


@dataclass(frozen=True, eq=False)
class Point:
    center: np.ndarray

    def __post_init__(self):
        _frozen(self, center=_vec(self.center, "center"))

    @property
    def dim(self):
        return self.center.size


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """{z : (z - c)^T Q^{-1} (z - c) <= level}."""

    shape: np.ndarray
    level: float
    center: Optional[np.ndarray] = None

    def __post_init__(self):
        Q = _spd(self.shape)
        c = np.zeros(Q.shape[0]) if self.center is None else _vec(self.center, "center")
        if c.size != Q.shape[0]:
            raise GeometryError("center and shape dimensions differ")
        _frozen(self, shape=Q, level=_positive(self.level, "level"), center=c)

    @property
    def dim(self):
        return self.center.size

    @cached_property
    def eig(self):
        e, U = np.linalg.eigh(self.shape)
        return e, U


@dataclass(frozen=True, eq=False)
class EllipsoidAffine:
    """{z : (z - c)^T Q^{-1} (z - c) <= level, A (z - c) <= b}."""

    shape: np.ndarray
    level: float
    A: np.ndarray
    b: np.ndarray
    center: Optional[np.ndarray] = None

    def __post_init__(self):
        Q = _spd(self.shape)
        d = Q.shape[0]
        A = np.asarray(self.A, dtype=float).reshape(-1, d)
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if b.shape != (A.shape[0],):
            raise GeometryError("A and b have inconsistent row counts")
        c = np.zeros(d) if self.center is None else _vec(self.center, "center")
        if c.size != d:
            raise GeometryError("center and shape dimensions differ")
        _frozen(self, shape=Q, level=_positive(self.level, "level"), A=A, b=b, center=c)

    @property
    def dim(self):
        return self.center.size

    @cached_property
    def ellipsoid(self):
        return Ellipsoid(self.shape, self.level, self.center)


@dataclass(frozen=True, eq=False)
class MultiEnvDeviation:
    """Records y_j = baseline_j + delta_{group_j} * treated_j with ||delta||_1 <= radius."""

    baseline: np.ndarray
    group: np.ndarray
    treated: np.ndarray
    radius: float
    n_groups: Optional[int] = None

    def __post_init__(self):
        base = _vec(self.baseline, "baseline")
        g = np.asarray(self.group)
        if g.shape != base.shape or not np.issubdtype(g.dtype, np.integer):
            raise GeometryError("group must be an integer vector matching baseline")
        D = np.asarray(self.treated, dtype=float)
        if D.shape != base.shape or not np.all((D == 0) | (D == 1)):
            raise GeometryError("treated must be a 0/1 vector matching baseline")
        if g.size and g.min() < 0:
            raise GeometryError("group indices must be nonnegative")
        S = int(g.max()) + 1 if self.n_groups is None else int(self.n_groups)
        if g.size and g.max() >= S:
            raise GeometryError("group index out of range")
        _frozen(self, baseline=base, group=g.astype(np.int64), treated=D,
                radius=_positive(self.radius, "radius"), n_groups=S)

    @property
    def dim(self):
        return self.baseline.size

    @cached_property
    def group_counts(self):
        return np.bincount(self.group, weights=self.treated, minlength=self.n_groups)

    def group_means(self, resid):
        """Treated-record mean residual per group (0 for groups without treated records)."""
        n = self.group_counts
        tot = np.bincount(self.group, weights=resid * self.treated, minlength=self.n_groups)
        return np.divide(tot, n, out=np.zeros_like(tot), where=n > 0)


@dataclass(frozen=True, eq=False)
class ProductSet:
    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise GeometryError("ProductSet needs at least one component")
        _frozen(self, parts=parts)

    @property
    def dim(self):
        return sum(p.dim for p in self.parts)

    @cached_property
    def offsets(self):
        return np.cumsum([0] + [p.dim for p in self.parts])

    def split(self, y):
        y = np.concatenate([np.ravel(np.asarray(v, dtype=float)) for v in y]) if _is_ragged(y) else np.ravel(np.asarray(y, dtype=float))
        if y.size != self.dim:
            raise GeometryError(f"dimension mismatch: set has {self.dim}, point has {y.size}")
        o = self.offsets
        return [y[o[i]:o[i + 1]] for i in range(len(self.parts))]


SetDescriptor = Union[L1Ball, L2Ball, Point, Ellipsoid, EllipsoidAffine, MultiEnvDeviation, ProductSet]


def _is_ragged(y):
    return isinstance(y, (list, tuple)) and len(y) > 0 and not np.isscalar(y[0])


@dataclass
class ProjectionResult:
    z_hat: np.ndarray
    distance: float
    multiplier: Optional[float] = None
    dual_point: Optional[np.ndarray] = None
    converged: bool = True
    iterations: int = 0
    deltas: Optional[np.ndarray] = None
    parts: tuple = field(default_factory=tuple)

    @property
    def sq_distance(self):
        return self.distance ** 2


def _point(set_, y):
    if isinstance(set_, ProductSet):
        return np.concatenate(set_.split(y))
    y = _vec(y, "y")
    if y.size != set_.dim:
        raise GeometryError(f"dimension mismatch: set has {set_.dim}, point has {y.size}")
    return y


# ---------------------------------------------------------------- membership

def contains(set_, y, tol=MEMBERSHIP_TOL):
    y = _point(set_, y)
    if isinstance(set_, L1Ball):
        return bool(np.abs(y - set_.center).sum() - set_.radius <= tol)
    if isinstance(set_, L2Ball):
        return bool(np.linalg.norm(y - set_.center) - set_.radius <= tol)
    if isinstance(set_, Point):
        return bool(np.abs(y - set_.center).max() <= tol)
    if isinstance(set_, Ellipsoid):
        return bool(_ellipsoid_level(set_, y) - set_.level <= tol)
    if isinstance(set_, EllipsoidAffine):
        x = y - set_.center
        ok_aff = set_.A.shape[0] == 0 or np.max(set_.A @ x - set_.b) <= tol
        return bool(ok_aff and _ellipsoid_level(set_.ellipsoid, y) - set_.level <= tol)
    if isinstance(set_, MultiEnvDeviation):
        R = y - set_.baseline
        untreated = set_.treated == 0
        if np.any(np.abs(R[untreated]) > tol):
            return False
        # treated records of one group must share a deviation
        means = set_.group_means(R)
        if np.any(np.abs(R - means[set_.group] * set_.treated) > tol):
            return False
        return bool(np.abs(means).sum() - set_.radius <= tol)
    if isinstance(set_, ProductSet):
        return all(contains(p, v, tol) for p, v in zip(set_.parts, set_.split(y)))
    raise TypeError(f"unsupported set {type(set_).__name__}")


def _ellipsoid_level(E, y):
    e, U = E.eig
    w = U.T @ (y - E.center)
    return float(np.sum(w * w / e))


# ---------------------------------------------------------------- projections

def soft_threshold(x, lam):
    return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)


def l1_threshold(a, radius):
    """Soft-threshold level lam with sum(max(|a| - lam, 0)) == radius (0 if already inside)."""
    a = np.abs(np.asarray(a, dtype=float))
    if a.sum() <= radius:
        return 0.0
    u = np.sort(a)[::-1]
    css = np.cumsum(u) - radius
    j = np.arange(1, u.size + 1)
    rho = np.nonzero(u * j > css)[0][-1]
    return max(float(css[rho] / (rho + 1)), 0.0)


def project_l1_ball(y, center, radius):
    y, c = _vec(y, "y"), _vec(center, "center")
    radius = _positive(radius, "radius")
    if y.size != c.size:
        raise GeometryError("dimension mismatch")
    lam = l1_threshold(y - c, radius)
    z = y if lam == 0.0 else c + soft_threshold(y - c, lam)
    return ProjectionResult(z_hat=z, distance=float(np.linalg.norm(y - z)), multiplier=lam)


def project_l1_rows(Y, center, radius):
    """Row-wise projection of an (n, d) array onto one l1 ball; returns (Z, lam)."""
    X = np.asarray(Y, dtype=float) - center
    A = np.abs(X)
    lam = np.zeros(X.shape[0])
    out = A.sum(axis=1) > radius
    if out.any():
        U = -np.sort(-A[out], axis=1)
        css = np.cumsum(U, axis=1) - radius
        j = np.arange(1, X.shape[1] + 1)
        cond = U * j > css
        rho = X.shape[1] - 1 - np.argmax(cond[:, ::-1], axis=1)
        lam[out] = np.maximum(css[np.arange(rho.size), rho] / (rho + 1), 0.0)
    Z = center + np.sign(X) * np.maximum(A - lam[:, None], 0.0)
    # interior rows are their own projections; recentring would leave roundoff
    Z[~out] = np.asarray(Y, dtype=float)[~out]
    return Z, lam


def project_l2_ball(y, center, radius):
    y, c = _vec(y, "y"), _vec(center, "center")
    radius = _positive(radius, "radius")
    if y.size != c.size:
        raise GeometryError("dimension mismatch")
    x = y - c
    nx = float(np.linalg.norm(x))
    if nx <= radius:
        return ProjectionResult(z_hat=y, distance=0.0, multiplier=0.0)
    z = c + (radius / nx) * x
    return ProjectionResult(z_hat=z, distance=nx - radius, multiplier=nx / radius - 1.0)


def secular_root(weights, poles, target, tol=SECULAR_TOL, max_iter=100):
    """Solve sum_k w_k / (p_k + lam)^2 = target for lam >= 0.

    phi is convex and decreasing, so Newton on 1/sqrt(phi) - 1/sqrt(target)
    (close to linear in lam) converges fast; bisection guards the bracket.
    Returns (lam, iterations).  Assumes phi(0) > target.
    """
    w = np.asarray(weights, dtype=float)
    p = np.asarray(poles, dtype=float)
    keep = w > 0
    w, p = w[keep], p[keep]
    lo = 0.0
    hi = float(np.sqrt(w.sum() / target))  # phi(hi) <= sum(w)/hi^2 = target
    s_t = 1.0 / np.sqrt(target)
    lam = 0.5 * (lo + hi) if p.min() <= 0 else lo
    for it in range(1, max_iter + 1):
        den = p + lam
        phi = float(np.sum(w / den ** 2))
        if abs(phi - target) <= tol * target:
            return lam, it
        if phi > target:
            lo = lam
        else:
            hi = lam
        dphi = float(-2.0 * np.sum(w / den ** 3))
        g = phi ** -0.5 - s_t
        dg = -0.5 * phi ** -1.5 * dphi
        step = lam - g / dg
        lam = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 1e-15 * max(1.0, hi):
            return lam, it
    raise RootFindingError("secular equation did not converge", (lo, hi))


def project_ellipsoid(y, Q, r, center=None):
    E = Q if isinstance(Q, Ellipsoid) else Ellipsoid(Q, r, center)
    return _project_ellipsoid(E, _vec(y, "y"))


def _project_ellipsoid(E, y):
    if y.size != E.dim:
        raise GeometryError("dimension mismatch")
    e, U = E.eig
    w = U.T @ (y - E.center)
    if np.sum(w * w / e) <= E.level:
        return ProjectionResult(z_hat=y, distance=0.0, multiplier=0.0)
    lam, it = secular_root(e * w * w, e, E.level)
    z = E.center + U @ (e / (e + lam) * w)
    return ProjectionResult(z_hat=z, distance=float(np.linalg.norm(y - z)), multiplier=lam, iterations=it)


def weighted_threshold(abs_means, weights, radius):
    """Exact lam for sum_s (|m_s| - lam / n_s)_+ = radius via the sorted breakpoints n_s |m_s|."""
    a = np.abs(np.asarray(abs_means, dtype=float))
    n = np.asarray(weights, dtype=float)
    if a.sum() <= radius:
        return 0.0
    bp = n * a
    order = np.argsort(bp)
    a_s, inv_s, bp_s = a[order], 1.0 / n[order], bp[order]
    # with lam in [bp_s[k-1], bp_s[k]] the active set is order[k:]
    suf_a = np.cumsum(a_s[::-1])[::-1]
    suf_inv = np.cumsum(inv_s[::-1])[::-1]
    r_at_bp = suf_a - bp_s * suf_inv  # r(lam) evaluated at each breakpoint, from the right segment
    k = int(np.searchsorted(-r_at_bp, -radius, side="left"))
    # r_at_bp is decreasing; k is the first breakpoint where r <= radius
    k = min(k, a.size - 1)
    lam = (suf_a[k] - radius) / suf_inv[k]
    return float(max(lam, 0.0))


def project_weighted_soft_threshold(residual_means, weights, radius):
    m = _vec(residual_means, "residual_means")
    n = np.asarray(weights, dtype=float)
    if n.shape != m.shape:
        raise GeometryError("weights and residual means differ in length")
    if np.any(n < 1):
        raise GeometryError("weights must be >= 1")
    if radius < 0:
        raise GeometryError("radius must be nonnegative")
    lam = weighted_threshold(m, n, radius)
    return np.sign(m) * np.maximum(np.abs(m) - lam / n, 0.0), lam


def weighted_soft_threshold_at(residual_means, weights, lam):
    """Deltas at a fixed multiplier, with r(lam) and |dr/dlam|."""
    m = np.asarray(residual_means, dtype=float)
    n = np.asarray(weights, dtype=float)
    mag = np.abs(m) - lam / n
    active = mag > 0
    deltas = np.where(active, np.sign(m) * mag, 0.0)
    return deltas, float(mag[active].sum()), float(np.sum(1.0 / n[active]))


def _project_multienv(M, y):
    R = y - M.baseline
    n = M.group_counts
    means = M.group_means(R)
    has = n > 0
    deltas = np.zeros(M.n_groups)
    d_has, lam = project_weighted_soft_threshold(means[has], n[has], M.radius)
    deltas[has] = d_has
    z = M.baseline + deltas[M.group] * M.treated
    return ProjectionResult(z_hat=z, distance=float(np.linalg.norm(y - z)), multiplier=lam, deltas=deltas)


def project(set_, y, **dual_opts):
    """Euclidean projection of y onto set_."""
    if isinstance(set_, ProductSet):
        parts = tuple(project(p, v, **dual_opts) for p, v in zip(set_.parts, set_.split(y)))
        z = np.concatenate([p.z_hat for p in parts])
        dist = float(np.sqrt(sum(p.distance ** 2 for p in parts)))
        return ProjectionResult(z_hat=z, distance=dist, converged=all(p.converged for p in parts),
                                iterations=sum(p.iterations for p in parts), parts=parts)
    y = _point(set_, y)
    if isinstance(set_, L1Ball):
        return project_l1_ball(y, set_.center, set_.radius)
    if isinstance(set_, L2Ball):
        return project_l2_ball(y, set_.center, set_.radius)
    if isinstance(set_, Point):
        return ProjectionResult(z_hat=set_.center.copy(), distance=float(np.linalg.norm(y - set_.center)))
    if isinstance(set_, Ellipsoid):
        return _project_ellipsoid(set_, y)
    if isinstance(set_, EllipsoidAffine):
        from .dual import project_ellipsoid_affine
        return project_ellipsoid_affine(set_, y, **dual_opts)
    if isinstance(set_, MultiEnvDeviation):
        return _project_multienv(set_, y)
    raise TypeError(f"unsupported set {type(set_).__name__}")


def distance(set_, y):
    return project(set_, y).distance


# ---------------------------------------------------------------- support functions

def support_function(set_, u):
    """sup_{z in set} u^T z."""
    u = _point(set_, u)
    if isinstance(set_, L1Ball):
        return float(set_.center @ u + set_.radius * np.abs(u).max())
    if isinstance(set_, L2Ball):
        return float(set_.center @ u + set_.radius * np.linalg.norm(u))
    if isinstance(set_, Point):
        return float(set_.center @ u)
    if isinstance(set_, Ellipsoid):
        return float(set_.center @ u + np.sqrt(set_.level * u @ set_.shape @ u))
    if isinstance(set_, EllipsoidAffine):
        from .dual import support_ellipsoid_affine
        return support_ellipsoid_affine(set_, u)
    if isinstance(set_, MultiEnvDeviation):
        s = np.bincount(set_.group, weights=u * set_.treated, minlength=set_.n_groups)
        return float(set_.baseline @ u + set_.radius * np.abs(s).max())
    if isinstance(set_, ProductSet):
        return float(sum(support_function(p, v) for p, v in zip(set_.parts, set_.split(u))))
    raise TypeError(f"unsupported set {type(set_).__name__}")


# ---------------------------------------------------------------- transforms

def translate(set_, shift):
    """The set shifted by ``shift`` (a vector of the set's dimension)."""
    if isinstance(set_, ProductSet):
        return ProductSet(tuple(translate(p, s) for p, s in zip(set_.parts, set_.split(shift))))
    b = _point(set_, shift)
    if isinstance(set_, MultiEnvDeviation):
        return replace(set_, baseline=set_.baseline + b)
    return replace(set_, center=set_.center + b)


def with_radius(set_, radius):
    """Same family and center, new size parameter (radius or level)."""
    if isinstance(set_, (L1Ball, L2Ball, MultiEnvDeviation)):
        return replace(set_, radius=radius)
    if isinstance(set_, (Ellipsoid, EllipsoidAffine)):
        return replace(set_, level=radius)
    raise TypeError(f"{type(set_).__name__} has no size parameter")


def bounding_radius(set_):
    """Radius of a ball around ``anchor(set_)`` containing the set."""
    if isinstance(set_, L1Ball) or isinstance(set_, L2Ball):
        return set_.radius
    if isinstance(set_, Point):
        return 0.0
    if isinstance(set_, (Ellipsoid, EllipsoidAffine)):
        return float(np.sqrt(set_.level * np.linalg.eigvalsh(set_.shape)[-1]))
    if isinstance(set_, MultiEnvDeviation):
        return set_.radius * float(np.sqrt(set_.group_counts.max()))
    if isinstance(set_, ProductSet):
        return float(np.sqrt(sum(bounding_radius(p) ** 2 for p in set_.parts)))
    raise TypeError(f"unsupported set {type(set_).__name__}")


def anchor(set_):
    if isinstance(set_, MultiEnvDeviation):
        return set_.baseline
    if isinstance(set_, ProductSet):
        return np.concatenate([anchor(p) for p in set_.parts])
    return set_.center


# ---------------------------------------------------------------- normal cone

def normal_cone_check(set_, z_hat, v, n_probe=2000, rng_seed=0, tol=1e-9):
    """Is v in the normal cone of set_ at z_hat?

    Balls and ellipsoids use the outward-normal characterization; the other
    variants compare v^T(zeta - z_hat) against zero on probe points zeta drawn
    from the set (projections of random points around it).
    """
    z = _point(set_, z_hat)
    v = _point(set_, v)
    scale = max(1.0, float(np.linalg.norm(v)))
    if not contains(set_, z, tol=1e-7):
        raise GeometryError("z_hat is not a member of the set")
    if isinstance(set_, (L2Ball, Ellipsoid)):
        if isinstance(set_, L2Ball):
            normal = z - set_.center
            on_boundary = abs(np.linalg.norm(normal) - set_.radius) <= 1e-7 * max(1.0, set_.radius)
        else:
            e, U = set_.eig
            normal = U @ ((U.T @ (z - set_.center)) / e)
            on_boundary = abs(_ellipsoid_level(set_, z) - set_.level) <= 1e-7 * max(1.0, set_.level)
        if not on_boundary or np.linalg.norm(normal) == 0:
            return bool(np.linalg.norm(v) <= tol * scale)
        nh = normal / np.linalg.norm(normal)
        along = float(v @ nh)
        return bool(along >= -tol * scale and np.linalg.norm(v - along * nh) <= 1e-7 * scale)
    rng = np.random.default_rng(rng_seed)
    c = anchor(set_)
    R = bounding_radius(set_)
    d = c.size
    worst = -np.inf
    for i in range(n_probe):
        g = rng.standard_normal(d)
        g *= (2.0 * R + 1.0) * rng.uniform() ** (1.0 / d) / np.linalg.norm(g)
        zeta = project(set_, c + g).z_hat
        worst = max(worst, float(v @ (zeta - z)))
    return bool(worst <= tol * scale * max(1.0, R))


# ---------------------------------------------------------------- batched distances

def _ellipsoid_rows(E, X):
    """Row-wise projection onto an ellipsoid; vectorized safeguarded Newton on 1/sqrt(phi)."""
    e, U = E.eig
    W = (X - E.center) @ U
    r = E.level
    lev = np.sum(W * W / e, axis=1)
    out = lev > r
    Z = W.copy()
    if out.any():
        Wo = W[out]
        wt = e * Wo * Wo
        lo = np.zeros(Wo.shape[0])
        hi = np.sqrt(wt.sum(axis=1) / r)
        lam = lo.copy()
        s_t = r ** -0.5
        for _ in range(100):
            den = e + lam[:, None]
            phi = np.sum(wt / den ** 2, axis=1)
            big = phi > r
            lo = np.where(big, lam, lo)
            hi = np.where(big, hi, lam)
            dphi = -2.0 * np.sum(wt / den ** 3, axis=1)
            g = phi ** -0.5 - s_t
            step = lam - g / (-0.5 * phi ** -1.5 * dphi)
            ok = (step > lo) & (step < hi)
            lam = np.where(ok, step, 0.5 * (lo + hi))
            if np.all(np.abs(phi - r) <= SECULAR_TOL * r):
                break
        Z[out] = e / (e + lam[:, None]) * Wo
    Z = E.center + Z @ U.T
    Z[~out] = X[~out]
    return Z


def batch_distance(set_, X):
    """Distances of the rows of X to set_ (vectorized for the closed-form families)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if isinstance(set_, L1Ball):
        Z, _ = project_l1_rows(X, set_.center, set_.radius)
    elif isinstance(set_, L2Ball):
        D = X - set_.center
        return np.maximum(np.linalg.norm(D, axis=1) - set_.radius, 0.0)
    elif isinstance(set_, Point):
        return np.linalg.norm(X - set_.center, axis=1)
    elif isinstance(set_, Ellipsoid):
        Z = _ellipsoid_rows(set_, X)
    else:
        return np.array([project(set_, x).distance for x in X])
    return np.linalg.norm(X - Z, axis=1)


def batch_contains(set_, X, tol=MEMBERSHIP_TOL):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if isinstance(set_, L1Ball):
        return np.abs(X - set_.center).sum(axis=1) <= set_.radius + tol
    if isinstance(set_, L2Ball):
        return np.linalg.norm(X - set_.center, axis=1) <= set_.radius + tol
    if isinstance(set_, Ellipsoid):
        e, U = set_.eig
        W = (X - set_.center) @ U
        return np.sum(W * W / e, axis=1) <= set_.level + tol
    return np.array([contains(set_, x, tol) for x in X])
