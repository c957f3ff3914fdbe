"""Sparse mixed effects: y_i = mu + gamma_i + noise with gamma_i in an l1 ball of radius r.

The latent effect of observation i is its projection residual
gamma_hat_i = P(y_i) - mu onto the ball {mu + g : ||g||_1 <= r}, which is
soft-thresholded and therefore sparse.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .. import geometry as geo
from ..kernel import (InvGaussian, IntrinsicVolumes, Normal, grad_log_prior, intrinsic_volumes_mc,
                      inv_gaussian_param_grad, log_prior, log_scaled_normalizer)
from .base import Dataset, ModelSpec, ParamBlock

MC_DIRECTIONS = 20_000
MC_SEED = 20240917


@lru_cache(maxsize=None)
def unit_l1_volumes(d, n_dirs=MC_DIRECTIONS, seed=MC_SEED):
    """Intrinsic volumes of the unit l1 ball in R^d (exact for d <= 2, radial MC above)."""
    if d == 1:
        return IntrinsicVolumes(1, [1.0], "exact", volume=2.0)
    if d == 2:
        return IntrinsicVolumes(2, [1.0, 2.0 * math.sqrt(2.0)], "exact", volume=2.0)
    return intrinsic_volumes_mc(geo.L1Ball(np.zeros(d), 1.0), n_samples=n_dirs, seed=seed, method="radial",
                                radii=np.geomspace(0.02, 5.0, 16), n_boot=50)


def generate_mixed_effects(n=1000, d=20, n_nonzero=5, seed=0, mu_sd=10.0, gamma_shape=2.0, gamma_rate=0.2):
    """mu ~ N(0, mu_sd^2 I); the first n_nonzero coordinates of gamma_i are
    Rademacher signs times Gamma(shape, rate) magnitudes, the rest zero;
    unit Gaussian noise."""
    rng = np.random.default_rng(seed)
    mu = rng.normal(0.0, mu_sd, d)
    gamma = np.zeros((n, d))
    k = min(n_nonzero, d)
    gamma[:, :k] = rng.choice([-1.0, 1.0], size=(n, k)) * rng.gamma(gamma_shape, 1.0 / gamma_rate, size=(n, k))
    y = mu + gamma + rng.standard_normal((n, d))
    return Dataset({"y": y}, meta=dict(model="mixed-effects", n=n, d=d, n_nonzero=k, seed=seed,
                                       mu=mu.tolist(), gamma_rate=gamma_rate, gamma_shape=gamma_shape,
                                       gamma=gamma))


class SparseMixedEffects(ModelSpec):
    name = "mixed-effects"
    has_gradient = True

    def __init__(self, data, normalizer="steiner-mc", mu_prior=Normal(0.0, 10.0),
                 sigma_prior=InvGaussian(1.0, 1.0), volumes=None):
        Y = np.asarray(data["y"], dtype=float)
        if Y.ndim != 2 or Y.shape[1] < 1:
            raise ValueError("y must be an n x d array with d >= 1")
        self.Y = Y
        self.n_obs, self.d = Y.shape
        if normalizer not in ("steiner-mc", "none"):
            raise ValueError(f"unknown normalizer {normalizer!r}")
        self.normalizer = normalizer
        self.V_unit = volumes if volumes is not None else (unit_l1_volumes(self.d) if normalizer == "steiner-mc" else None)
        self.sigma_prior = sigma_prior
        super().__init__(data, [ParamBlock("mu", self.d, "identity", mu_prior),
                                ParamBlock("r", 1, "log", conditional="InvGaussian(0.1 sqrt(sigma), 0.1 sqrt(sigma))"),
                                ParamBlock("sigma", 1, "log", sigma_prior)])

    @staticmethod
    def r_prior(sigma):
        a = 0.1 * math.sqrt(sigma)
        return InvGaussian(a, a)

    def project(self, mu, r):
        return geo.project_l1_rows(self.Y, mu, r)

    def log_posterior(self, theta, data=None):
        lp, _ = self._eval(theta, need_grad=False)
        return lp

    def value_and_grad_natural(self, theta):
        return self._eval(theta, need_grad=True)

    def _eval(self, theta, need_grad):
        mu, r, s = theta["mu"], theta["r"], theta["sigma"]
        Z, lam = self.project(mu, r)
        Uh = self.Y - Z
        S = float(np.sum(Uh * Uh))
        rp = self.r_prior(s)
        lp = self.independent_log_prior(theta) + log_prior(rp, r) - S / s
        if self.normalizer == "steiner-mc":
            lm, dlr, dls = log_scaled_normalizer(self.V_unit, r, s, grad=True)
            lp -= self.n_obs * lm
        else:
            dlr = dls = 0.0
        if not need_grad:
            return lp, None
        g = self.independent_prior_grad(theta)
        g["mu"] = g["mu"] + 2.0 * Uh.sum(axis=0) / s
        da, db = inv_gaussian_param_grad(r, rp.a, rp.b)
        g["r"] = grad_log_prior(rp, r) + 2.0 * lam.sum() / s - self.n_obs * dlr / r
        g["sigma"] = g["sigma"] + (da + db) * 0.05 / math.sqrt(s) + S / s ** 2 - self.n_obs * dls / s
        return lp, g

    def latent(self, x):
        th = self.unpack(x)
        Z, _ = self.project(th["mu"], th["r"])
        return Z - th["mu"]

    def set_and_sigma(self, x):
        th = self.unpack(x)
        return geo.L1Ball(th["mu"], th["r"]), th["sigma"]

    def derived(self, x):
        th = self.unpack(x)
        Z, lam = self.project(th["mu"], th["r"])
        return {"n_exterior": float(np.sum(lam > 0))}

    def initial(self):
        mu = np.median(self.Y, axis=0)
        norms = np.abs(self.Y - mu).sum(axis=1)
        return self.pack({"mu": mu, "r": float(max(np.median(norms), 1e-2)), "sigma": 1.0})

    @property
    def proposal_scales(self):
        # mu coordinates move on the data scale / sqrt(n)
        sc = np.ones(self.dim)
        sc[self.blocks["mu"]] = np.maximum(self.Y.std(axis=0), 1e-3) / math.sqrt(self.n_obs)
        return sc
