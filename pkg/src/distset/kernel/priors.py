"""Prior densities with exact normalizing constants."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)


def _pos(x, name):
    if not (x > 0 and math.isfinite(x)):
        raise ValueError(f"{name} must be strictly positive, got {x}")
    return float(x)


@dataclass(frozen=True)
class Normal:
    mean: float = 0.0
    sd: float = 1.0
    support = "unconstrained"

    def __post_init__(self):
        _pos(self.sd, "sd")


@dataclass(frozen=True)
class InvGaussian:
    """Mean a, variance a^3 / b."""

    a: float
    b: float
    support = "positive"

    def __post_init__(self):
        _pos(self.a, "a")
        _pos(self.b, "b")


@dataclass(frozen=True)
class Exponential:
    rate: float = 1.0
    support = "positive"

    def __post_init__(self):
        _pos(self.rate, "rate")


@dataclass(frozen=True)
class HalfCauchy:
    scale: float = 1.0
    support = "positive"

    def __post_init__(self):
        _pos(self.scale, "scale")


@dataclass(frozen=True)
class GammaPrior:
    shape: float
    rate: float
    support = "positive"

    def __post_init__(self):
        _pos(self.shape, "shape")
        _pos(self.rate, "rate")


PriorSpec = Union[Normal, InvGaussian, Exponential, HalfCauchy, GammaPrior]


def inv_gaussian_kernel(s, a, b):
    """Unnormalized log density -1.5 log s - b s / (2 a^2) - b / (2 s)."""
    return -1.5 * math.log(s) - b * s / (2 * a * a) - b / (2 * s)


def log_prior(spec, x):
    """Log density including the normalizing constant; -inf outside the support."""
    x = float(x)
    if isinstance(spec, Normal):
        z = (x - spec.mean) / spec.sd
        return -0.5 * z * z - math.log(spec.sd) - 0.5 * LOG_2PI
    if not x > 0 or not math.isfinite(x):
        return -math.inf
    if isinstance(spec, InvGaussian):
        a, b = spec.a, spec.b
        return 0.5 * math.log(b) - 0.5 * LOG_2PI - 1.5 * math.log(x) - b * (x - a) ** 2 / (2 * a * a * x)
    if isinstance(spec, Exponential):
        return math.log(spec.rate) - spec.rate * x
    if isinstance(spec, HalfCauchy):
        s = spec.scale
        return math.log(2.0 / (math.pi * s)) - math.log1p((x / s) ** 2)
    if isinstance(spec, GammaPrior):
        k, rate = spec.shape, spec.rate
        return k * math.log(rate) - math.lgamma(k) + (k - 1) * math.log(x) - rate * x
    raise TypeError(f"unknown prior {type(spec).__name__}")


def grad_log_prior(spec, x):
    """d/dx log density."""
    x = float(x)
    if isinstance(spec, Normal):
        return -(x - spec.mean) / spec.sd ** 2
    if isinstance(spec, InvGaussian):
        a, b = spec.a, spec.b
        return -1.5 / x - b / (2 * a * a) + b / (2 * x * x)
    if isinstance(spec, Exponential):
        return -spec.rate
    if isinstance(spec, HalfCauchy):
        s = spec.scale
        return -2 * x / (s * s + x * x)
    if isinstance(spec, GammaPrior):
        return (spec.shape - 1) / x - spec.rate
    raise TypeError(f"unknown prior {type(spec).__name__}")


def inv_gaussian_param_grad(x, a, b):
    """(d/da, d/db) of the normalized inverse-Gaussian log density at x."""
    return b * (x - a) / a ** 3, 0.5 / b - (x - a) ** 2 / (2 * a * a * x)


def sample_prior(spec, rng, size=None):
    if isinstance(spec, Normal):
        return rng.normal(spec.mean, spec.sd, size)
    if isinstance(spec, InvGaussian):
        # numpy's wald(mean, scale) is IG with shape parameter = scale
        return rng.wald(spec.a, spec.b, size)
    if isinstance(spec, Exponential):
        return rng.exponential(1.0 / spec.rate, size)
    if isinstance(spec, HalfCauchy):
        return np.abs(spec.scale * rng.standard_cauchy(size))
    if isinstance(spec, GammaPrior):
        return rng.gamma(spec.shape, 1.0 / spec.rate, size)
    raise TypeError(f"unknown prior {type(spec).__name__}")
