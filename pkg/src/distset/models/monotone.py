"""Monotone curve fitting: the latent curve lies in a kernel ellipsoid intersected with the monotone cone.

Z = {z : z' Q(rho)^{-1} z <= r, z_j - z_{j+1} <= 0}, Q_jk = exp(-(x_j - x_k)^2 / rho^2).
Projections go through the reduced dual solver.
"""
from __future__ import annotations

import math

import numpy as np

from .. import geometry as geo
from ..dual import solve_dual_ellipsoid_affine
from ..kernel import InvGaussian, log_prior
from .base import Dataset, ModelSpec, ParamBlock

JITTER = 1e-6


def generate_monotone(d=30, noise_var=0.25, seed=0, n_curves=1):
    """Standardized logistic curve on d regular points of [0, 100] plus N(0, noise_var) noise."""
    rng = np.random.default_rng(seed)
    x = np.linspace(0.0, 100.0, d)
    f = 1.0 / (1.0 + np.exp(-(x - 50.0) / 12.0))
    f = (f - f.mean()) / f.std()
    y = f + math.sqrt(noise_var) * rng.standard_normal((n_curves, d))
    return Dataset({"x": x, "y": y, "truth": f}, meta=dict(model="monotone", d=d, noise_var=noise_var,
                                                           seed=seed, n_curves=n_curves))


def difference_matrix(d):
    """Rows e_j - e_{j+1}, so A z <= 0 means z is nondecreasing."""
    A = np.zeros((d - 1, d))
    idx = np.arange(d - 1)
    A[idx, idx] = 1.0
    A[idx, idx + 1] = -1.0
    return A


def kernel_matrix(x, rho, jitter=JITTER):
    D = x[:, None] - x[None, :]
    return np.exp(-(D / rho) ** 2) + jitter * np.eye(x.size)


class MonotoneSmoother(ModelSpec):
    """Blocks log rho, log r, log sigma.  ``normalizer="gaussian"`` keeps the
    (pi sigma)^{d/2} leading term per curve; ``"drop"`` omits m entirely."""

    name = "monotone"
    has_gradient = False

    def __init__(self, data, normalizer="gaussian", rho_prior=InvGaussian(1.0, 1.0),
                 sigma_prior=InvGaussian(1.0, 1.0), jitter=JITTER, dual_tol=1e-8):
        x = np.asarray(data["x"], dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise ValueError("x must be a grid of at least two points")
        if np.any(np.diff(x) <= 0):
            raise ValueError("x must be strictly increasing (duplicate points make Q singular)")
        Y = np.asarray(data["y"], dtype=float).reshape(-1, x.size)
        if normalizer not in ("gaussian", "drop"):
            raise ValueError(f"unknown normalizer {normalizer!r}")
        self.x, self.Y = x, Y
        self.d = x.size
        self.n_obs = Y.shape[0]
        self.normalizer = normalizer
        self.jitter = jitter
        self.dual_tol = dual_tol
        self.A = difference_matrix(self.d)
        self.b = np.zeros(self.d - 1)
        self.nonconverged = 0
        super().__init__(data, [ParamBlock("rho", 1, "log", rho_prior),
                                ParamBlock("r", 1, "log", conditional="InvGaussian(0.1 sqrt(sigma), 0.1 sqrt(sigma))"),
                                ParamBlock("sigma", 1, "log", sigma_prior)])

    def make_set(self, rho, r):
        return geo.EllipsoidAffine(kernel_matrix(self.x, rho, self.jitter), r, self.A, self.b)

    def project_all(self, rho, r):
        """Projections of every curve and their squared distances."""
        C = self.make_set(rho, r)
        Z = np.empty_like(self.Y)
        for i, y in enumerate(self.Y):
            sol = solve_dual_ellipsoid_affine(y, set_=C, tol=self.dual_tol)
            self.nonconverged += int(not sol.converged)
            Z[i] = sol.z_hat(y)
        return Z, np.sum((self.Y - Z) ** 2, axis=1)

    @staticmethod
    def r_prior(sigma):
        a = 0.1 * math.sqrt(sigma)
        return InvGaussian(a, a)

    def log_posterior(self, theta, data=None):
        rho, r, s = theta["rho"], theta["r"], theta["sigma"]
        lp = self.independent_log_prior(theta) + log_prior(self.r_prior(s), r)
        if self.n_obs == 0:
            return lp
        _, d2 = self.project_all(rho, r)
        lp -= float(d2.sum()) / s
        if self.normalizer == "gaussian":
            lp -= self.n_obs * 0.5 * self.d * math.log(math.pi * s)
        return lp

    def derived(self, x):
        if self.n_obs == 0:
            return {}
        th = self.unpack(x)
        Z, d2 = self.project_all(th["rho"], th["r"])
        out = {f"z_hat[{j}]": float(v) for j, v in enumerate(Z[0])}
        out["max_violation"] = float(np.max(self.A @ Z.T))
        return out

    def initial(self):
        rho = 2.0 * float(np.mean(np.diff(self.x)))
        if self.n_obs == 0:
            return self.pack({"rho": 1.0, "r": 0.1, "sigma": 1.0})
        Q = kernel_matrix(self.x, rho, self.jitter)
        ys = np.sort(self.Y, axis=1)
        r = float(max(np.max(np.einsum("ij,ij->i", ys, np.linalg.solve(Q, ys.T).T)), 1e-3))
        return self.pack({"rho": rho, "r": r, "sigma": 1.0})
