"""Ball model with known center: the tractable test bed for the samplers.

Observations live outside B(c, r) with density exp(-dist^2/sigma)/m(r, sigma),
m from the exact intrinsic volumes of the ball.  The radius (and optionally
sigma) is unknown.
"""
from __future__ import annotations

import math

import numpy as np

from .. import geometry as geo
from ..kernel import (InvGaussian, grad_log_prior, intrinsic_volumes_l2_ball, log_prior,
                      log_scaled_normalizer)
from .base import Dataset, ModelSpec, ParamBlock


def sample_ball_exterior(n, center, r, sigma, rng):
    """Exact draws from exp(-dist^2/sigma) on the exterior of B(center, r)."""
    center = np.asarray(center, dtype=float)
    d = center.size
    # t = dist has density proportional to exp(-t^2/sigma) (r + t)^(d-1)
    t_grid = np.linspace(0.0, math.sqrt(40.0 * sigma), 20001)
    dens = np.exp(-t_grid ** 2 / sigma) * (r + t_grid) ** (d - 1)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(t_grid))])
    t = np.interp(rng.uniform(size=n), cdf / cdf[-1], t_grid)
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return center + g * (r + t)[:, None]


def generate_disk(n=50, d=2, r=1.0, sigma=1.0, center=None, seed=0):
    rng = np.random.default_rng(seed)
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    y = sample_ball_exterior(n, c, r, sigma, rng)
    return Dataset({"y": y, "center": c}, meta=dict(model="disk", r=r, sigma=sigma, n=n, d=d, seed=seed))


class DiskModel(ModelSpec):
    name = "disk"
    has_gradient = True

    def __init__(self, data, sigma=None, r_prior=InvGaussian(1.0, 1.0), sigma_prior=InvGaussian(1.0, 1.0),
                 R_max=None, sigma_max=None, normalizer="steiner-exact"):
        self.y = np.asarray(data["y"], dtype=float)
        self.center = np.asarray(data["center"], dtype=float)
        self.n_obs, self.d = self.y.shape
        self.fixed_sigma = sigma
        self.norms = np.linalg.norm(self.y - self.center, axis=1)
        self.R_max = float(3.0 * self.norms.max()) if R_max is None else float(R_max)
        self.sigma_max = (25.0 if sigma is None else float(sigma)) if sigma_max is None else float(sigma_max)
        self.r_prior, self.sigma_prior = r_prior, sigma_prior
        if normalizer not in ("steiner-exact", "ppp"):
            raise ValueError(f"unknown normalizer {normalizer!r}")
        self.normalizer = normalizer
        self.V_unit = intrinsic_volumes_l2_ball(self.d, 1.0)
        blocks = [ParamBlock("r", 1, "log", r_prior)]
        if sigma is None:
            blocks.append(ParamBlock("sigma", 1, "log", sigma_prior))
        super().__init__(data, blocks)

    def _sigma(self, theta):
        return self.fixed_sigma if self.fixed_sigma is not None else theta["sigma"]

    def _in_support(self, r, sigma):
        return 0 < r <= self.R_max and 0 < sigma <= self.sigma_max

    def sq_dist(self, r):
        return np.maximum(self.norms - r, 0.0) ** 2

    def log_normalizer(self, r, sigma, grad=False):
        return log_scaled_normalizer(self.V_unit, r, sigma, grad=grad)

    def normalizer_value(self, x):
        th = self.unpack(x)
        return math.exp(self.log_normalizer(th["r"], self._sigma(th)))

    def log_posterior(self, theta, data=None):
        r, s = theta["r"], self._sigma(theta)
        if not self._in_support(r, s):
            return -math.inf
        lp = self.independent_log_prior(theta) - self.sq_dist(r).sum() / s
        if self.normalizer == "steiner-exact":
            lp -= self.n_obs * self.log_normalizer(r, s)
        return lp

    def value_and_grad_natural(self, theta):
        r, s = theta["r"], self._sigma(theta)
        if not self._in_support(r, s):
            return -math.inf, {}
        g = self.independent_prior_grad(theta)
        d2 = self.sq_dist(r)
        lm, dlr, dls = self.log_normalizer(r, s, grad=True)
        lp = self.independent_log_prior(theta) - d2.sum() / s - self.n_obs * lm
        g["r"] += 2.0 * np.maximum(self.norms - r, 0.0).sum() / s - self.n_obs * dlr / r
        if self.fixed_sigma is None:
            g["sigma"] += d2.sum() / s ** 2 - self.n_obs * dls / s
        return lp, g

    # PPP hooks
    def set_and_sigma(self, x):
        th = self.unpack(x)
        return geo.L2Ball(self.center, th["r"]), self._sigma(th)

    def unnormalized_log_density(self, x):
        th = self.unpack(x)
        r, s = th["r"], self._sigma(th)
        if not self._in_support(r, s):
            return -math.inf
        return self.independent_log_prior(th) - self.sq_dist(r).sum() / s + self.log_jacobian(x)

    def initial(self):
        th = {"r": float(np.clip(np.median(self.norms) * 0.8, 1e-3, 0.9 * self.R_max))}
        if self.fixed_sigma is None:
            th["sigma"] = min(1.0, 0.9 * self.sigma_max)
        return self.pack(th)
