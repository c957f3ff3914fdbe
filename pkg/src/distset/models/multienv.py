"""Treatment effect shared across groups up to sparse group deviations.

Records follow y = alpha_grade + eta'x + beta D + delta_{group} D + noise with
||delta||_1 <= r.  The sampler moves the soft-threshold multiplier lam instead
of r: at fixed lam the projected deviations are an explicit weighted
soft-threshold of treated-record residual means, and r(lam) = sum |delta_hat|
is monotone, so the prior on r picks up the Jacobian |dr/dlam|.
"""
from __future__ import annotations

import math

import numpy as np

from .. import geometry as geo
from ..kernel import InvGaussian, Normal, log_prior
from .base import Dataset, ModelSpec, ParamBlock

SPARSE_THRESHOLD = 0.05


def generate_multienv(n_groups=40, per_group=20, sparsity=0.5, beta=2.0, sigma=1.0, eta=(1.0, -0.5),
                      alpha=1.0, treat_prob=0.5, delta_sd=1.0, seed=0):
    """Synthetic schools: exactly round(sparsity * n_groups) deviations are zero, the rest N(0, delta_sd^2)."""
    if not 0.0 <= sparsity <= 1.0:
        raise ValueError("sparsity must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    eta = np.asarray(eta, dtype=float)
    n = n_groups * per_group
    group = np.repeat(np.arange(n_groups), per_group)
    x = rng.standard_normal((n, eta.size))
    D = (rng.uniform(size=n) < treat_prob).astype(float)
    n_zero = int(round(sparsity * n_groups))
    delta = rng.normal(0.0, delta_sd, n_groups)
    delta[rng.permutation(n_groups)[:n_zero]] = 0.0
    y = alpha + x @ eta + (beta + delta[group]) * D + sigma * rng.standard_normal(n)
    return Dataset({"y": y, "x": x, "group": group, "treated": D, "grade": np.zeros(n, dtype=np.int64)},
                   meta=dict(model="multienv", n_groups=n_groups, per_group=per_group, sparsity=sparsity,
                             n_zero=n_zero, beta=beta, sigma=sigma, eta=eta.tolist(), alpha=alpha,
                             delta=delta.tolist(), seed=seed, r=float(np.abs(delta).sum())))


class MultiEnvModel(ModelSpec):
    """Parameters: grade intercepts alpha, covariate slopes eta, shared effect beta,
    multiplier lam > 0 and kernel scale sigma > 0.

    ``normalizer="gaussian"`` keeps the leading (pi sigma)^{N/2} term of the
    normalizer, which carries all of its sigma dependence when r is small
    relative to sqrt(sigma); ``"none"`` drops it.
    """

    name = "multienv"
    has_gradient = False

    def __init__(self, data, normalizer="gaussian", coef_prior=Normal(0.0, 10.0),
                 lam_prior=None, sigma_prior=InvGaussian(1.0, 1.0)):
        self.y = np.asarray(data["y"], dtype=float)
        N = self.y.size
        self.x = np.asarray(data["x"], dtype=float).reshape(N, -1) if "x" in data else np.zeros((N, 0))
        self.group = np.asarray(data["group"]).astype(np.int64)
        self.treated = np.asarray(data["treated"], dtype=float)
        grade = np.asarray(data["grade"]).astype(np.int64) if "grade" in data else np.zeros(N, dtype=np.int64)
        for name, arr in (("group", self.group), ("grade", grade)):
            if arr.shape != (N,) or (N and arr.min() < 0):
                raise ValueError(f"{name} indices must be nonnegative and match y")
        if self.treated.shape != (N,) or not np.all((self.treated == 0) | (self.treated == 1)):
            raise ValueError("treated must be a 0/1 vector matching y")
        if normalizer not in ("gaussian", "none"):
            raise ValueError(f"unknown normalizer {normalizer!r}")
        self.normalizer = normalizer
        self.n_obs = N
        self.n_groups = int(data.meta.get("n_groups", self.group.max() + 1)) if N else 0
        self.n_grades = int(grade.max()) + 1
        self.grade = grade
        self.counts = np.bincount(self.group, weights=self.treated, minlength=self.n_groups)
        self.has_treated = self.counts > 0
        # design for the unconstrained coefficients: grade dummies, covariates, treatment
        G = np.zeros((N, self.n_grades))
        G[np.arange(N), grade] = 1.0
        self.design = np.column_stack([G, self.x, self.treated])
        self.p_x = self.x.shape[1]
        self.lam_prior = lam_prior
        self.rejected_inactive = 0
        super().__init__(data, [ParamBlock("alpha", self.n_grades, "identity", coef_prior),
                                ParamBlock("eta", self.p_x, "identity", coef_prior),
                                ParamBlock("beta", 1, "identity", coef_prior),
                                ParamBlock("lam", 1, "log", lam_prior,
                                           conditional="r(lam) ~ InvGaussian(0.1 sqrt(sigma), 0.1 sqrt(sigma))"),
                                ParamBlock("sigma", 1, "log", sigma_prior)])
        self._merge_coef_blocks()

    def _merge_coef_blocks(self):
        # alpha, eta and beta move together; empty eta blocks are dropped
        s = self._slices
        self._sampler_blocks = {"coef": slice(0, s["beta"].stop), "lam": s["lam"], "sigma": s["sigma"]}

    @property
    def blocks(self):
        return self._sampler_blocks

    def residuals(self, theta):
        coef = np.concatenate([np.atleast_1d(theta["alpha"]), np.atleast_1d(theta["eta"]), [theta["beta"]]])
        return self.y - self.design @ coef

    def group_means(self, R):
        tot = np.bincount(self.group, weights=R * self.treated, minlength=self.n_groups)
        return np.divide(tot, self.counts, out=np.zeros_like(tot), where=self.has_treated)

    def deviations(self, theta):
        """(delta_hat, r, |dr/dlam|, squared distance) at the current multiplier."""
        R = self.residuals(theta)
        means = self.group_means(R)
        deltas = np.zeros(self.n_groups)
        h = self.has_treated
        d_h, r, drdl = geo.weighted_soft_threshold_at(means[h], self.counts[h], theta["lam"])
        deltas[h] = d_h
        fit = R - deltas[self.group] * self.treated
        return deltas, r, drdl, float(fit @ fit)

    @staticmethod
    def r_prior(sigma):
        a = 0.1 * math.sqrt(sigma)
        return InvGaussian(a, a)

    def log_posterior(self, theta, data=None):
        s = theta["sigma"]
        deltas, r, drdl, d2 = self.deviations(theta)
        if r <= 0.0:
            # every group inactive: r = 0 sits outside the r-prior support
            self.rejected_inactive += 1
            return -math.inf
        lp = self.independent_log_prior(theta) + log_prior(self.r_prior(s), r) + math.log(drdl) - d2 / s
        if self.normalizer == "gaussian":
            lp -= 0.5 * self.n_obs * math.log(math.pi * s)
        return lp

    def derived(self, x):
        th = self.unpack(x)
        deltas, r, _, _ = self.deviations(th)
        out = {"r": r, "n_sparse": float(np.sum(np.abs(deltas) < SPARSE_THRESHOLD))}
        out.update({f"delta[{s}]": float(v) for s, v in enumerate(deltas)})
        return out

    def projected_set(self, theta):
        R = self.residuals(theta)
        _, r, _, _ = self.deviations(theta)
        return geo.MultiEnvDeviation(self.y - R, self.group, self.treated, max(r, 1e-300), self.n_groups)

    def initial(self):
        coef, *_ = np.linalg.lstsq(self.design, self.y, rcond=None)
        R = self.y - self.design @ coef
        means = self.group_means(R)
        # start with about half the groups active
        bp = (self.counts * np.abs(means))[self.has_treated]
        lam = float(np.median(bp)) if bp.size else 1.0
        sigma = max(float(R @ R) / max(self.n_obs, 1), 1e-3)
        th = {"alpha": coef[: self.n_grades], "eta": coef[self.n_grades:self.n_grades + self.p_x],
              "beta": coef[-1], "lam": max(lam, 1e-3), "sigma": sigma}
        return self.pack(th)

    @property
    def proposal_scales(self):
        sc = np.ones(self.dim)
        XtX = self.design.T @ self.design
        try:
            cov = np.linalg.inv(XtX + 1e-8 * np.eye(XtX.shape[0]))
            sc[self._sampler_blocks["coef"]] = np.sqrt(np.maximum(np.diag(cov), 1e-12)) * 2.0
        except np.linalg.LinAlgError:
            pass
        return sc
