"""Poisson-point-process augmentation that removes m^{-n} from the posterior.

With mu0(dx, du) = exp(-u) dx du, the shell region
A = {(x, u): 0 < dist(x, Z) <= sqrt(u sigma)} has mu0-mass m.  A Poisson
process of intensity psi * mu0 on D = {(x, u): |x - c| <= R_max + sqrt(u sigma_max)}
avoids A with probability exp(-psi m), and a Gamma mixture over psi turns
that into m^{-n}.  The Gibbs sweep is:

1. regenerate the points of D outside A given (theta, psi),
2. psi ~ Gamma(n + |Phi|, rate C0) with C0 = mu0(D),
3. Metropolis on theta with the normalizer-free likelihood and the
   indicator that no point falls in A.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import quad

from .. import geometry as geo
from ..kernel import kappa
from .mcmc import Trace, chain_rng


@dataclass
class AugmentedState:
    psi: float
    points: np.ndarray
    u: np.ndarray

    @property
    def size(self):
        return self.u.size


@dataclass(frozen=True)
class PPPDomain:
    center: np.ndarray
    R_max: float
    sigma_max: float
    u_max: float = 60.0
    n_grid: int = 4096

    def radius(self, u):
        return self.R_max + np.sqrt(np.asarray(u) * self.sigma_max)

    @cached_property
    def C0(self):
        d = self.center.size
        f = lambda u: math.exp(-u) * (self.R_max + math.sqrt(u * self.sigma_max)) ** d
        val, _ = quad(f, 0.0, np.inf, limit=200, epsabs=0.0, epsrel=1e-12)
        return kappa(d) * val

    @cached_property
    def _u_table(self):
        d = self.center.size
        u = np.concatenate([[0.0], np.geomspace(1e-10, self.u_max, self.n_grid - 1)])
        dens = np.exp(-u) * self.radius(u) ** d
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(u))])
        return u, cdf / cdf[-1]

    def sample_u(self, rng, k):
        u, cdf = self._u_table
        return np.interp(rng.uniform(size=k), cdf, u)

    def sample_points(self, rng, k):
        d = self.center.size
        u = self.sample_u(rng, k)
        g = rng.standard_normal((k, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        rad = self.radius(u) * rng.uniform(size=k) ** (1.0 / d)
        return self.center + g * rad[:, None], u

    def contains_set(self, set_, sigma):
        """Z^{sqrt(u sigma)} inside the u-ball for all u: needs sigma <= sigma_max and Z within R_max."""
        off = float(np.linalg.norm(geo.anchor(set_) - self.center))
        return sigma <= self.sigma_max and off + geo.bounding_radius(set_) <= self.R_max


def in_shell(set_, sigma, X, U):
    """Mask of points (x, u) with 0 < dist(x, Z) <= sqrt(u sigma)."""
    if len(U) == 0:
        return np.zeros(0, dtype=bool)
    dist = geo.batch_distance(set_, X)
    return (dist > 0) & (dist <= np.sqrt(U * sigma))


def regenerate(domain, set_, sigma, psi, rng):
    k = rng.poisson(psi * domain.C0)
    X, U = domain.sample_points(rng, k)
    keep = ~in_shell(set_, sigma, X, U)
    return X[keep], U[keep]


def ppp_gibbs_step(x, aug, model, domain, rng, step_sizes, n_obs=None):
    """One sweep over (Phi, psi, theta) for a model exposing the PPP hooks.

    The model provides ``set_and_sigma(x)`` (the set and kernel scale),
    ``unnormalized_log_density(x)`` (prior, Jacobian and -sum dist^2 / sigma)
    and ``blocks``.  Returns (x', aug', accepted per block, bound rejections).
    """
    n = model.n_obs if n_obs is None else n_obs
    set_, sigma = model.set_and_sigma(x)
    X, U = regenerate(domain, set_, sigma, aug.psi, rng)
    psi = rng.gamma(n + U.size, 1.0 / domain.C0)
    lp = model.unnormalized_log_density(x)
    accepted = {}
    bound_rejects = 0
    for b, sl in model.blocks.items():
        y = x.copy()
        y[sl] = x[sl] + step_sizes[b] * rng.standard_normal(x[sl].shape)
        ok = False
        lq = model.unnormalized_log_density(y)
        if math.isfinite(lq):
            set_y, sigma_y = model.set_and_sigma(y)
            if not domain.contains_set(set_y, sigma_y):
                bound_rejects += 1
            elif math.log(rng.uniform()) < lq - lp and not in_shell(set_y, sigma_y, X, U).any():
                x, lp, ok = y, lq, True
        accepted[b] = ok
    return x, AugmentedState(psi, X, U), accepted, bound_rejects


def run_ppp_chain(model, domain, n_iter, burn_in, thin=1, step_sizes=None, seed=0, adapt_target=0.4,
                  adapt_window=25, chain_id=0):
    """PPP-augmented chain; returns a Trace with psi and |Phi| as derived columns."""
    rng = chain_rng(seed, chain_id)
    x = model.initial()
    set_, sigma = model.set_and_sigma(x)
    if not domain.contains_set(set_, sigma):
        raise ValueError("initial set is not inside the PPP domain")
    psi0 = model.n_obs / max(model.normalizer_value(x), 1e-300) if hasattr(model, "normalizer_value") else 1.0
    aug = AugmentedState(psi0, np.empty((0, domain.center.size)), np.empty(0))
    steps = {b: 0.5 for b in model.blocks}
    steps.update(step_sizes or {})
    log_steps = {b: math.log(v) for b, v in steps.items()}
    n_keep = (n_iter - burn_in) // thin
    draws = np.empty((n_keep, model.dim))
    lps = np.empty(n_keep)
    its = np.empty(n_keep, dtype=np.int64)
    psis = np.empty(n_keep)
    sizes = np.empty(n_keep)
    acc = {b: 0 for b in model.blocks}
    prop = {b: 0 for b in model.blocks}
    win = {b: 0 for b in model.blocks}
    rejects = 0
    t0 = time.perf_counter()
    k = 0
    for i in range(n_iter):
        x, aug, ok, br = ppp_gibbs_step(x, aug, model, domain, rng,
                                        {b: math.exp(v) for b, v in log_steps.items()})
        rejects += br
        for b in model.blocks:
            if i >= burn_in:
                prop[b] += 1
                acc[b] += int(ok[b])
            else:
                win[b] += int(ok[b])
        if i < burn_in and (i + 1) % adapt_window == 0:
            j = (i + 1) // adapt_window
            for b in model.blocks:
                log_steps[b] += 2.0 * j ** -0.6 * (win[b] / adapt_window - adapt_target)
                win[b] = 0
        if i >= burn_in and (i - burn_in + 1) % thin == 0:
            draws[k] = x
            lps[k] = model.unnormalized_log_density(x)
            its[k] = i
            psis[k] = aug.psi
            sizes[k] = aug.size
            k += 1
    return Trace(names=list(model.names), draws=draws, log_post=lps, iterations=its, accepted=acc,
                 proposed=prop, wall_seconds=time.perf_counter() - t0, kernel="ppp", seed=seed,
                 step_sizes={b: math.exp(v) for b, v in log_steps.items()},
                 derived={"psi": psis, "n_points": sizes, "bound_rejections": np.full(n_keep, rejects)},
                 config=dict(n_iter=n_iter, burn_in=burn_in, thin=thin, seed=seed, R_max=domain.R_max,
                             sigma_max=domain.sigma_max))
