"""Normalizing constants of the Gaussian distance kernel exp(-dist^2 / sigma).

The integral of the kernel over the exterior of K is

    m = sum_{k=0}^{d-1} pi^{(d-k)/2} V_k(K) sigma^{(d-k)/2}
      = int_0^inf exp(-t^2 / sigma) A(dK^t) dt,

where A is the boundary area of the tube K^t.  The first form is evaluated
from intrinsic volumes, the second by Gauss-Legendre quadrature as a check.
"""
from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ellipe, logsumexp

from .. import geometry as geo
from .volumes import IntrinsicVolumes, kappa


def log_distance_kernel(dist, sigma):
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return -np.asarray(dist, dtype=float) ** 2 / sigma


def _coefficients(iv, ambient):
    """V_k for k = 0..min(dim, ambient - 1); bodies of lower dimension than the space keep V_dim."""
    ambient = iv.dim if ambient is None else int(ambient)
    full = iv.full()
    kmax = min(iv.dim, ambient - 1)
    return full[: kmax + 1], ambient


def steiner_normalizer(iv, sigma, ambient=None):
    V, n = _coefficients(iv, ambient)
    k = np.arange(V.size)
    return float(np.sum(math.pi ** ((n - k) / 2) * V * sigma ** ((n - k) / 2)))


def log_scaled_normalizer(V_unit, r, sigma, ambient=None, grad=False):
    """log m for the family r * G at scale sigma, optionally with d/dlog r and d/dlog sigma.

    m = (pi sigma)^{n/2} sum_k V_k(G) (r / sqrt(pi sigma))^k.
    """
    V, n = _coefficients(V_unit, ambient)
    k = np.arange(V.size)
    pos = V > 0
    k, V = k[pos], V[pos]
    lps = math.log(math.pi * sigma)
    terms = np.log(V) + k * (math.log(r) - 0.5 * lps)
    lse = float(logsumexp(terms))
    out = 0.5 * n * lps + lse
    if not grad:
        return out
    w = np.exp(terms - lse)
    ek = float(w @ k)
    return out, ek, 0.5 * n - 0.5 * ek


def normalizer_scaled_family(V_unit, r, sigma, ambient=None):
    return math.exp(log_scaled_normalizer(V_unit, r, sigma, ambient))


def boundary_area(set_, t):
    """Exact boundary area of the tube K^t for the families where it is known."""
    t = float(t)
    d = set_.dim
    if isinstance(set_, geo.L2Ball):
        return d * kappa(d) * (set_.radius + t) ** (d - 1)
    if isinstance(set_, geo.Point):
        return d * kappa(d) * t ** (d - 1)
    if d == 2 and isinstance(set_, geo.L1Ball):
        return 4.0 * math.sqrt(2.0) * set_.radius + 2.0 * math.pi * t
    if d == 2 and isinstance(set_, geo.Ellipsoid):
        a, b = np.sqrt(set_.level * np.linalg.eigvalsh(set_.shape))[::-1]
        return 4.0 * a * ellipe(1.0 - (b / a) ** 2) + 2.0 * math.pi * t
    raise NotImplementedError(f"no closed-form tube boundary for {type(set_).__name__} in d={d}")


def normalizer_quadrature(set_, sigma, t_max=None, n_nodes=200, area=None, rtol=1e-9, max_nodes=1 << 14):
    """int_0^{t_max} exp(-t^2/sigma) A(t) dt with node doubling until the estimate settles."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    A = (lambda t: boundary_area(set_, t)) if area is None else area
    t_max = math.sqrt(40.0 * sigma) if t_max is None else float(t_max)
    prev = None
    n = n_nodes
    while True:
        x, w = leggauss(n)
        t = 0.5 * t_max * (x + 1.0)
        vals = np.array([A(ti) for ti in t])
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite boundary area")
        est = float(0.5 * t_max * np.sum(w * np.exp(-t * t / sigma) * vals))
        if prev is not None and abs(est - prev) <= rtol * abs(est):
            return est
        if n >= max_nodes:
            return est
        prev, n = est, 2 * n


def shell_cdf(set_, sigma, s, area=None):
    """P(dist^2 <= s) for a draw from the kernel on the exterior of set_."""
    A = (lambda t: boundary_area(set_, t)) if area is None else area
    tot = normalizer_quadrature(set_, sigma, area=A)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    x, w = leggauss(200)
    out = np.empty(s.size)
    for i, si in enumerate(s):
        hi = math.sqrt(max(si, 0.0))
        if hi == 0:
            out[i] = 0.0
            continue
        t = 0.5 * hi * (x + 1.0)
        out[i] = 0.5 * hi * np.sum(w * np.exp(-t * t / sigma) * np.array([A(ti) for ti in t])) / tot
    return np.clip(out, 0.0, 1.0)
