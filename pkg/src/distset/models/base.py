"""Shared model plumbing: parameter blocks, transforms and the unconstrained target."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from ..kernel import priors as P


@dataclass(frozen=True)
class ParamBlock:
    name: str
    size: int = 1
    transform: str = "identity"
    prior: Optional[P.PriorSpec] = None
    # conditional priors (e.g. r | sigma) are evaluated by the model itself
    conditional: str = ""

    def __post_init__(self):
        if self.transform not in ("identity", "log"):
            raise ValueError(f"unknown transform {self.transform!r}")
        if self.prior is not None and getattr(self.prior, "support", "unconstrained") == "positive" \
                and self.transform != "log":
            raise ValueError(f"block {self.name}: positive prior needs the log transform")
        if self.prior is None and not self.conditional:
            raise ValueError(f"block {self.name} has no prior")

    @property
    def sampled_name(self):
        return f"log_{self.name}" if self.transform == "log" else self.name


@dataclass
class Dataset:
    """Arrays keyed by role, with generation metadata (true parameters, seed)."""

    arrays: Dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for k, v in self.arrays.items():
            a = np.asarray(v)
            if a.dtype.kind in "fc" and not np.all(np.isfinite(a)):
                raise ValueError(f"dataset column {k!r} has missing or non-finite values")
            a = a.copy()
            a.setflags(write=False)
            self.arrays[k] = a

    def __getitem__(self, k):
        return self.arrays[k]

    def __contains__(self, k):
        return k in self.arrays

    def fingerprint(self):
        import hashlib
        h = hashlib.sha256()
        for k in sorted(self.arrays):
            h.update(k.encode())
            h.update(np.ascontiguousarray(self.arrays[k]).tobytes())
        return h.hexdigest()[:16]


class ModelSpec:
    """Base class: subclasses set ``name``, ``param_blocks`` and implement
    ``log_posterior(theta)`` on the natural scale, plus optionally
    ``grad_natural(theta)`` returning d log posterior / d theta per block.
    """

    name = "model"
    normalizer = "steiner-exact"
    has_gradient = False

    def __init__(self, data: Dataset, blocks):
        self.data = data
        self.param_blocks = list(blocks)
        self._slices = {}
        names = []
        o = 0
        for b in self.param_blocks:
            self._slices[b.name] = slice(o, o + b.size)
            o += b.size
            names += [b.sampled_name] if b.size == 1 else [f"{b.sampled_name}[{i}]" for i in range(b.size)]
        self.dim = o
        self.names = names

    # --- mapping between the sampler vector and natural parameters
    @property
    def blocks(self):
        return self._slices

    def unpack(self, x):
        th = {}
        for b in self.param_blocks:
            v = np.asarray(x[self._slices[b.name]], dtype=float)
            if b.transform == "log":
                v = np.exp(v)
            th[b.name] = float(v[0]) if b.size == 1 else v
        return th

    def pack(self, theta):
        x = np.empty(self.dim)
        for b in self.param_blocks:
            v = np.atleast_1d(np.asarray(theta[b.name], dtype=float))
            x[self._slices[b.name]] = np.log(v) if b.transform == "log" else v
        return x

    def log_jacobian(self, x):
        return float(sum(np.sum(x[self._slices[b.name]]) for b in self.param_blocks if b.transform == "log"))

    def independent_log_prior(self, theta):
        lp = 0.0
        for b in self.param_blocks:
            if b.prior is None:
                continue
            for v in np.atleast_1d(theta[b.name]):
                lp += P.log_prior(b.prior, v)
        return lp

    def independent_prior_grad(self, theta):
        g = {}
        for b in self.param_blocks:
            if b.prior is None:
                g[b.name] = np.zeros(b.size) if b.size > 1 else 0.0
                continue
            v = np.atleast_1d(theta[b.name])
            gv = np.array([P.grad_log_prior(b.prior, t) for t in v])
            g[b.name] = gv if b.size > 1 else float(gv[0])
        return g

    def log_posterior(self, theta, data=None):
        raise NotImplementedError

    def grad_natural(self, theta):
        raise NotImplementedError

    # --- the sampler-facing target on the unconstrained scale
    def log_density(self, x):
        try:
            theta = self.unpack(x)
        except FloatingPointError:
            return -math.inf
        if not all(np.all(np.isfinite(np.atleast_1d(v))) for v in theta.values()):
            return -math.inf
        lp = self.log_posterior(theta)
        return lp + self.log_jacobian(x) if math.isfinite(lp) else -math.inf

    @property
    def value_and_grad(self):
        return self._value_and_grad if self.has_gradient else None

    def _value_and_grad(self, x):
        theta = self.unpack(x)
        if not all(np.all(np.isfinite(np.atleast_1d(v))) for v in theta.values()):
            return -math.inf, np.full(self.dim, np.nan)
        lp, g = self.value_and_grad_natural(theta)
        if not math.isfinite(lp):
            return -math.inf, np.full(self.dim, np.nan)
        out = np.empty(self.dim)
        for b in self.param_blocks:
            gb = np.atleast_1d(np.asarray(g[b.name], dtype=float))
            sl = self._slices[b.name]
            if b.transform == "log":
                out[sl] = gb * np.exp(x[sl]) + 1.0
            else:
                out[sl] = gb
        return lp + self.log_jacobian(x), out

    def value_and_grad_natural(self, theta):
        return self.log_posterior(theta), self.grad_natural(theta)

    def initial(self):
        raise NotImplementedError

    def derived(self, x):
        return {}

    def config_echo(self):
        return {"model": self.name, "normalizer": self.normalizer}
