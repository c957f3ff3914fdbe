"""Intrinsic volumes: exact formulas for balls and Monte Carlo tube-volume regression."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import nnls
from scipy.special import comb, gammaln

from .. import geometry as geo


def kappa(j):
    """Volume of the unit ball in R^j."""
    return math.exp(0.5 * j * math.log(math.pi) - gammaln(0.5 * j + 1.0))


@dataclass
class IntrinsicVolumes:
    """V_0..V_{d-1} of a convex body in R^d; ``volume`` is V_d when known."""

    dim: int
    V: np.ndarray
    source: str = "exact"
    mc_rel_error: Optional[float] = None
    volume: Optional[float] = None
    se: Optional[np.ndarray] = None
    flags: tuple = field(default_factory=tuple)

    def __post_init__(self):
        self.V = np.asarray(self.V, dtype=float)
        if self.V.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} intrinsic volumes, got {self.V.shape}")
        if np.any(self.V < 0):
            raise ValueError("intrinsic volumes must be nonnegative")

    def full(self):
        """V_0..V_d, with V_d = 0 when the volume is unknown."""
        return np.append(self.V, 0.0 if self.volume is None else self.volume)

    def scaled(self, r):
        """Intrinsic volumes of r * K: V_k r^k."""
        k = np.arange(self.dim + 1)
        f = self.full() * float(r) ** k
        return IntrinsicVolumes(self.dim, f[:-1], self.source, self.mc_rel_error,
                                None if self.volume is None else f[-1],
                                None if self.se is None else self.se * float(r) ** k[: self.se.size],
                                self.flags)


def intrinsic_volumes_l2_ball(d, r=1.0):
    if d < 1 or r <= 0:
        raise ValueError("need d >= 1 and r > 0")
    V = np.array([comb(d, k) * kappa(d) / kappa(d - k) * r ** k for k in range(d + 1)])
    return IntrinsicVolumes(d, V[:-1], "exact", volume=float(V[-1]))


def intrinsic_volumes_point(d):
    V = np.zeros(d)
    V[0] = 1.0
    return IntrinsicVolumes(d, V, "exact", volume=0.0)


def tube_volume(iv, t):
    """Steiner polynomial sum_k kappa_{d-k} V_k t^{d-k}."""
    d = iv.dim
    full = iv.full()
    t = np.asarray(t, dtype=float)
    return sum(kappa(d - k) * full[k] * t ** (d - k) for k in range(d + 1))


def _fit_steiner(d, ts, tube, tube_sd, fixed_volume=None):
    """Least-squares fit of V_1..V_d (V_0 = 1) to tube volumes; returns (V_full, flags)."""
    ks = list(range(1, d + 1 if fixed_volume is None else d))
    X = np.array([[kappa(d - k) * t ** (d - k) for k in ks] for t in ts])
    yv = tube - kappa(d) * ts ** d
    if fixed_volume is not None:
        yv = yv - fixed_volume
    w = 1.0 / np.maximum(tube_sd, 1e-12 * np.maximum(tube, 1e-300))
    Xw, yw = X * w[:, None], yv * w
    flags = []
    # column scaling keeps the conditioning check meaningful across powers of t
    cs = np.linalg.norm(Xw, axis=0)
    cond = np.linalg.cond(Xw / cs)
    if not np.isfinite(cond) or cond > 1e12:
        flags.append("ill-conditioned")
    coef, *_ = np.linalg.lstsq(Xw / cs, yw, rcond=None)
    coef = coef / cs
    if np.any(coef < 0):
        flags.append("negative-clipped")
        coef_s, _ = nnls(Xw / cs, yw)
        coef = coef_s / cs
    full = np.zeros(d + 1)
    full[0] = 1.0
    full[ks] = coef
    if fixed_volume is not None:
        full[d] = fixed_volume
    return full, flags


def _default_radii(scale, n_radii):
    return scale * np.geomspace(0.05, 2.0, n_radii)


def _radial_tubes(set_, center, R, ts, n_dirs, rng, iters=48):
    """kappa_d * rho_t^d per direction, for each t (rows) - rays start inside the body."""
    d = center.size
    th = rng.standard_normal((n_dirs, d))
    th /= np.linalg.norm(th, axis=1, keepdims=True)
    lo = np.zeros(n_dirs)
    hi = np.full(n_dirs, R)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inside = geo.batch_contains(set_, center + mid[:, None] * th, tol=0.0)
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    rho0 = 0.5 * (lo + hi)
    out = np.empty((len(ts) + 1, n_dirs))
    out[0] = kappa(d) * rho0 ** d
    for i, t in enumerate(ts):
        # dist along the ray is increasing past rho0 with dist(rho0 + s) <= s and dist(s) >= s - R
        lo, hi = rho0 + t, np.full(n_dirs, R + t)
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            far = geo.batch_distance(set_, center + mid[:, None] * th) > t
            hi = np.where(far, mid, hi)
            lo = np.where(far, lo, mid)
        out[i + 1] = kappa(d) * (0.5 * (lo + hi)) ** d
    return out


def intrinsic_volumes_mc(set_, d=None, n_samples=10 ** 6, n_radii=12, seed=0, method="hit-or-miss",
                         radii=None, n_boot=200):
    """Monte Carlo intrinsic volumes from tube volumes V(K^t) at several t.

    method="hit-or-miss" draws one uniform sample in a ball covering K^{t_max}
    and counts points within each distance t.  method="radial" measures the
    tube boundary along random rays from the center, which keeps the variance
    manageable in moderate dimension.  V_0 = 1 is imposed; V_1..V_d are fitted.
    """
    if isinstance(set_, geo.Point):
        return intrinsic_volumes_point(set_.dim)
    d = set_.dim if d is None else d
    if d != set_.dim:
        raise ValueError("dimension mismatch")
    rng = np.random.default_rng(seed)
    center = geo.anchor(set_)
    R = geo.bounding_radius(set_)
    ts = np.asarray(_default_radii(R, n_radii) if radii is None else radii, dtype=float)
    if np.ptp(np.log(ts)) < 0.5:
        raise ValueError("radii too clustered for a stable Steiner fit")

    if method == "hit-or-miss":
        big = R + ts.max()
        g = rng.standard_normal((n_samples, d))
        g *= (big * rng.uniform(size=n_samples) ** (1.0 / d) / np.linalg.norm(g, axis=1))[:, None]
        dist = np.empty(n_samples)
        chunk = 200_000
        for s in range(0, n_samples, chunk):
            dist[s:s + chunk] = geo.batch_distance(set_, center + g[s:s + chunk])
        vol_ball = kappa(d) * big ** d
        edges = np.concatenate([[0.0], ts])
        counts = np.array([np.sum(dist <= 0.0)] + [np.sum((dist > a) & (dist <= b)) for a, b in zip(edges[:-1], edges[1:])])
        rest = n_samples - counts.sum()

        def estimate(cnt):
            cum = np.cumsum(cnt) / n_samples * vol_ball
            p = cum[1:] / vol_ball
            sd = vol_ball * np.sqrt(np.maximum(p * (1 - p), 1.0 / n_samples) / n_samples)
            return _fit_steiner(d, ts, cum[1:], sd)

        full, flags = estimate(counts)
        probs = np.append(counts, rest) / n_samples
        boots = np.array([estimate(rng.multinomial(n_samples, probs)[:-1])[0] for _ in range(n_boot)])
    elif method == "radial":
        tubes = _radial_tubes(set_, center, R, ts, n_samples, rng)
        vol = float(tubes[0].mean())
        means = tubes[1:].mean(axis=1)
        sds = tubes[1:].std(axis=1) / np.sqrt(n_samples)
        full, flags = _fit_steiner(d, ts, means, sds, fixed_volume=vol)
        boots = []
        for _ in range(n_boot):
            idx = rng.integers(0, n_samples, n_samples)
            tb = tubes[:, idx]
            boots.append(_fit_steiner(d, ts, tb[1:].mean(axis=1), sds, fixed_volume=float(tb[0].mean()))[0])
        boots = np.array(boots)
    else:
        raise ValueError(f"unknown method {method!r}")
    se = boots.std(axis=0)
    rel = se[1:] / np.maximum(full[1:], 1e-300)
    return IntrinsicVolumes(d, full[:-1], "monte-carlo", float(rel.max()), float(full[-1]), se, tuple(flags))
