"""Predictive draws from the distance kernel by a (u, y) Gibbs sampler with a ball walk.

Augmenting with u > 0, the pair has density proportional to
exp(-u) 1{0 < dist(y) <= sqrt(u sigma)}; its y-marginal is exp(-dist^2/sigma)
on the exterior of the set.  u | y is a shifted exponential and y | u is
uniform on the shell, which a uniform-in-ball Metropolis walk targets.
Many chains run side by side so retained draws are close to independent.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import geometry as geo


@dataclass
class PredictiveDraws:
    y: np.ndarray
    u: np.ndarray
    dist: np.ndarray
    acceptance: float
    alpha: float


def _uniform_ball(rng, n, d):
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * rng.uniform(size=(n, 1)) ** (1.0 / d)


def predictive_sample(set_, sigma, n_draws, walk_alpha=0.5, rng=None, n_chains=None, warmup=300, thin=10,
                      adapt_target=0.4):
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(rng)
    d = set_.dim
    if n_draws == 0:
        return PredictiveDraws(np.empty((0, d)), np.empty(0), np.empty(0), float("nan"), walk_alpha)
    n_chains = min(n_draws, 2000) if n_chains is None else n_chains
    per_chain = -(-n_draws // n_chains)
    c = geo.anchor(set_)
    start = c.copy()
    start[0] += geo.bounding_radius(set_) + 0.5 * np.sqrt(sigma)
    if geo.distance(set_, start) <= 0:
        raise ValueError("degenerate set: could not find an exterior starting point")
    Y = np.tile(start, (n_chains, 1))
    D = geo.batch_distance(set_, Y)
    alpha = float(walk_alpha)
    out_y, out_u, out_d = [], [], []
    acc_total = n_total = 0
    n_steps = warmup + per_chain * thin
    for step in range(n_steps):
        U = rng.exponential(size=n_chains) + D ** 2 / sigma
        rad = np.sqrt(U * sigma)
        prop = Y + alpha * rad[:, None] * _uniform_ball(rng, n_chains, d)
        Dp = geo.batch_distance(set_, prop)
        ok = (Dp > 0) & (Dp < rad)
        Y[ok] = prop[ok]
        D[ok] = Dp[ok]
        rate = ok.mean()
        if step < warmup:
            alpha *= np.exp((step + 1) ** -0.6 * (rate - adapt_target))
        else:
            acc_total += ok.sum()
            n_total += n_chains
            if (step - warmup + 1) % thin == 0:
                out_y.append(Y.copy())
                out_u.append(U.copy())
                out_d.append(D.copy())
    y = np.concatenate(out_y)[:n_draws]
    u = np.concatenate(out_u)[:n_draws]
    dist = np.concatenate(out_d)[:n_draws]
    return PredictiveDraws(y, u, dist, acc_total / max(n_total, 1), alpha)
