"""Transfer from a source regression to a target regression.

The target coefficients live in a ball of radius r around the source
coefficients: beta_T in {b : ||b - beta_S|| <= r}.  For fixed beta_S the
projection of y_T onto {X_T b} over that ball is a ridge fit with multiplier
lam, so lam is the sampled quantity and r(lam) = ||beta_T_hat - beta_S|| is
derived.  One eigendecomposition of X_T'X_T serves every evaluation.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .. import geometry as geo
from ..kernel import (Exponential, HalfCauchy, InvGaussian, Normal, intrinsic_volumes_mc, log_prior,
                      log_scaled_normalizer)
from .base import Dataset, ModelSpec, ParamBlock

BETA_S0 = (1.5, 1.2, 1.8, 0.0, 0.0)
MC_RAYS = 8000
MC_SEED = 7


def generate_transfer(alpha=2.0, n_source=200, n_target=30, beta_source=BETA_S0, noise_sd=1.0, seed=0):
    """Source and target regressions with beta_T = beta_S + alpha * eps, eps ~ N(0, I)."""
    rng = np.random.default_rng(seed)
    bS = np.asarray(beta_source, dtype=float)
    p = bS.size
    bT = bS + alpha * rng.standard_normal(p)
    XS = rng.standard_normal((n_source, p))
    XT = rng.standard_normal((n_target, p))
    yS = XS @ bS + noise_sd * rng.standard_normal(n_source)
    yT = XT @ bT + noise_sd * rng.standard_normal(n_target)
    return Dataset({"X_source": XS, "y_source": yS, "X_target": XT, "y_target": yT},
                   meta=dict(model="transfer", alpha=alpha, n_source=n_source, n_target=n_target, p=p,
                             beta_source=bS.tolist(), beta_target=bT.tolist(), noise_sd=noise_sd, seed=seed))


@lru_cache(maxsize=32)
def _unit_image_volumes(singular_values, n_rays=MC_RAYS, seed=MC_SEED):
    s = np.asarray(singular_values)
    E = geo.Ellipsoid(np.diag(s ** 2), 1.0)
    return intrinsic_volumes_mc(E, method="radial", n_samples=n_rays, seed=seed,
                                radii=s.max() * np.geomspace(0.02, 4.0, 16), n_boot=20)


def image_volumes(X, n_rays=MC_RAYS, seed=MC_SEED):
    """Intrinsic volumes of {X b : ||b|| <= 1}, an ellipsoid with semi-axes the nonzero singular values of X."""
    s = np.linalg.svd(np.asarray(X, dtype=float), compute_uv=False)
    s = s[s > 1e-10 * max(s.max(), 1e-300)]
    return _unit_image_volumes(tuple(np.round(s, 12)), n_rays, seed)


def source_posterior(X, y, sigma_s, prior_sd=10.0):
    """Conjugate Gaussian posterior of beta_S from the source data alone: (mean, covariance)."""
    P = X.T @ X / sigma_s ** 2 + np.eye(X.shape[1]) / prior_sd ** 2
    cov = np.linalg.inv(P)
    return cov @ (X.T @ y) / sigma_s ** 2, cov


def ols(X, y):
    return np.linalg.lstsq(X, y, rcond=None)[0]


class TransferModel(ModelSpec):
    """Blocks beta_S, log lam (omitted when r is fixed) and log omega; the
    kernel is exp(-omega * dist^2), i.e. sigma = 1 / omega.

    ``fixed_r`` pins the radius and solves lam from r(lam) = r.
    ``normalizer``: "steiner-mc" (Monte Carlo intrinsic volumes of the design
    image) or "gaussian" (leading term (pi / omega)^{n_T / 2} only).
    """

    name = "transfer"
    has_gradient = False

    def __init__(self, data, normalizer="steiner-mc", fixed_r=None, sigma_s=None, sample_sigma_s=False,
                 beta_prior=Normal(0.0, 10.0), r_prior=HalfCauchy(0.01), omega_prior=Exponential(1.0),
                 sigma_s_prior=InvGaussian(1.0, 1.0)):
        XS, yS = np.asarray(data["X_source"], float), np.asarray(data["y_source"], float)
        XT, yT = np.asarray(data["X_target"], float), np.asarray(data["y_target"], float)
        if XS.ndim != 2 or XT.ndim != 2 or XS.shape[1] != XT.shape[1]:
            raise ValueError("source and target designs must share the feature dimension")
        if yS.shape != (XS.shape[0],) or yT.shape != (XT.shape[0],):
            raise ValueError("response length does not match its design")
        if normalizer not in ("steiner-mc", "gaussian"):
            raise ValueError(f"unknown normalizer {normalizer!r}")
        if fixed_r is not None and not fixed_r > 0:
            raise ValueError("fixed_r must be positive")
        self.XS, self.yS, self.XT, self.yT = XS, yS, XT, yT
        self.p = XS.shape[1]
        self.n_target = XT.shape[0]
        self.n_obs = 1  # y_T enters as one point of R^{n_T}
        self.normalizer = normalizer
        self.fixed_r = fixed_r
        self.r_prior = r_prior
        self.beta_prior_sd = beta_prior.sd
        self.Lam, self.V = np.linalg.eigh(XT.T @ XT)
        self.Lam = np.maximum(self.Lam, 0.0)
        self.XtyT = XT.T @ yT
        self.XtXT = XT.T @ XT
        self.XtyS = XS.T @ yS
        self.XtXS = XS.T @ XS
        self.yS2 = float(yS @ yS)
        self.yT2 = float(yT @ yT)
        if sigma_s is None:
            res = yS - XS @ ols(XS, yS)
            sigma_s = math.sqrt(float(res @ res) / max(XS.shape[0] - self.p, 1))
        self.sigma_s = float(sigma_s)
        self.sample_sigma_s = sample_sigma_s
        self.V_unit = image_volumes(XT) if normalizer == "steiner-mc" else None
        blocks = [ParamBlock("beta_S", self.p, "identity", beta_prior)]
        if fixed_r is None:
            blocks.append(ParamBlock("lam", 1, "log", conditional="r(lam) ~ HalfCauchy"))
        blocks.append(ParamBlock("omega", 1, "log", omega_prior))
        if sample_sigma_s:
            blocks.append(ParamBlock("sigma_S", 1, "log", sigma_s_prior))
        super().__init__(data, blocks)

    # ---- ridge geometry in the eigenbasis of X_T'X_T
    def _g(self, beta_S):
        # V' X_T' e with e = y_T - X_T beta_S
        return self.V.T @ (self.XtyT - self.XtXT @ beta_S)

    def _e2(self, beta_S):
        return float(self.yT2 - 2.0 * beta_S @ self.XtyT + beta_S @ self.XtXT @ beta_S)

    def radius(self, beta_S, lam):
        g = self._g(beta_S)
        return float(np.sqrt(np.sum(g * g / (self.Lam + lam) ** 2)))

    def lam_for_radius(self, beta_S, r):
        """Multiplier with r(lam) = r; 0 if the target least-squares fit is already within r."""
        g = self._g(beta_S)
        g2 = g * g
        if np.all(self.Lam > 0) and float(np.sum(g2 / self.Lam ** 2)) <= r * r:
            return 0.0
        lam, _ = geo.secular_root(g2, self.Lam, r * r)
        return lam

    def ridge(self, beta_S, lam):
        """(beta_T_hat, r, |dr/dlam|, dist^2)."""
        g = self._g(beta_S)
        den = self.Lam + lam
        g2 = g * g
        if lam == 0.0:
            step = self.V @ np.divide(g, den, out=np.zeros_like(g), where=den > 0)
            r = float(np.linalg.norm(step))
            d2 = self._e2(beta_S) - float(np.sum(np.divide(g2, den, out=np.zeros_like(g2), where=den > 0)))
            return beta_S + step, r, math.inf, max(d2, 0.0)
        step = self.V @ (g / den)
        r = float(np.sqrt(np.sum(g2 / den ** 2)))
        drdl = float(np.sum(g2 / den ** 3)) / r if r > 0 else 0.0
        d2 = self._e2(beta_S) - float(np.sum(g2 * (self.Lam + 2.0 * lam) / den ** 2))
        return beta_S + step, r, drdl, max(d2, 0.0)

    def _lam(self, theta):
        return theta["lam"] if self.fixed_r is None else self.lam_for_radius(theta["beta_S"], self.fixed_r)

    def source_loglik(self, beta_S, sigma_s):
        q = self.yS2 - 2.0 * beta_S @ self.XtyS + beta_S @ self.XtXS @ beta_S
        n = self.XS.shape[0]
        return -0.5 * float(q) / sigma_s ** 2 - n * math.log(sigma_s) - 0.5 * n * math.log(2 * math.pi)

    def log_normalizer(self, r, omega):
        if self.normalizer == "gaussian" or r == 0.0:
            return 0.5 * self.n_target * math.log(math.pi / omega)
        return log_scaled_normalizer(self.V_unit, r, 1.0 / omega, ambient=self.n_target)

    def log_posterior(self, theta, data=None):
        bS, om = theta["beta_S"], theta["omega"]
        sig = theta["sigma_S"] if self.sample_sigma_s else self.sigma_s
        lam = self._lam(theta)
        _, r, drdl, d2 = self.ridge(bS, lam)
        if d2 <= 0.0:
            # y_T would sit inside the set
            return -math.inf
        lp = self.independent_log_prior(theta) + self.source_loglik(bS, sig) - om * d2
        lp -= self.log_normalizer(r, om)
        if self.fixed_r is None:
            if not (r > 0 and drdl > 0 and math.isfinite(drdl)):
                return -math.inf
            lp += log_prior(self.r_prior, r) + math.log(drdl)
        return lp

    def derived(self, x):
        th = self.unpack(x)
        lam = self._lam(th)
        bT, r, _, d2 = self.ridge(th["beta_S"], lam)
        out = {"r": r, "lam_value": lam, "dist2": d2}
        out.update({f"beta_T[{j}]": float(v) for j, v in enumerate(bT)})
        return out

    def initial(self):
        bS = source_posterior(self.XS, self.yS, self.sigma_s, self.beta_prior_sd)[0]
        th = {"beta_S": bS}
        res_T = self.yT - self.XT @ ols(self.XT, self.yT)
        if self.fixed_r is None:
            # start halfway, in log scale, between full transfer and the target fit
            th["lam"] = float(np.exp(np.mean(np.log(np.maximum(self.Lam, 1e-6)))))
            lam = th["lam"]
        else:
            lam = self.lam_for_radius(bS, self.fixed_r)
        d2 = self.ridge(bS, lam)[3]
        th["omega"] = 0.5 * self.n_target / max(d2, float(res_T @ res_T), 1e-6)
        if self.sample_sigma_s:
            th["sigma_S"] = self.sigma_s
        return self.pack(th)

    @property
    def proposal_scales(self):
        sc = np.ones(self.dim)
        cov = source_posterior(self.XS, self.yS, self.sigma_s, self.beta_prior_sd)[1]
        sc[self.blocks["beta_S"]] = np.sqrt(np.diag(cov)) * 2.0
        return sc
