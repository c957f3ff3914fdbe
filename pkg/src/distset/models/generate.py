"""Named synthetic scenarios for every model."""
from __future__ import annotations

import numpy as np

from .. import geometry as geo
from .base import Dataset
from .disk import generate_disk
from .mixed_effects import generate_mixed_effects
from .monotone import generate_monotone
from .multienv import generate_multienv
from .transfer import generate_transfer


class PresetError(ValueError):
    pass


def generate_l1_demo(n=500, center=(1.0, 2.0), radius=2.0, sigma=0.1, seed=0):
    """Draws from exp(-dist^2 / sigma) outside a planar l1 ball (the shell-shaped demo cloud)."""
    from ..samplers.predictive import predictive_sample
    c = np.asarray(center, dtype=float)
    draws = predictive_sample(geo.L1Ball(c, radius), sigma, n, rng=np.random.default_rng(seed))
    return Dataset({"y": draws.y, "center": c}, meta=dict(model="l1-ball", n=n, center=c.tolist(),
                                                          radius=radius, sigma=sigma, seed=seed))


GENERATORS = {
    "mixed-effects": generate_mixed_effects,
    "disk": generate_disk,
    "transfer": generate_transfer,
    "multienv": generate_multienv,
    "monotone": generate_monotone,
    "l1-ball": generate_l1_demo,
}

PRESETS = {
    "mixed-effects-desk": ("mixed-effects", dict(n=200, d=10)),
    "mixed-effects-full": ("mixed-effects", dict(n=1000, d=20)),
    "disk": ("disk", dict(n=50, d=2, r=1.0, sigma=1.0)),
    "l1-ball-demo": ("l1-ball", dict(n=500, center=(1.0, 2.0), radius=2.0, sigma=0.1)),
    "monotone": ("monotone", dict(d=30)),
}
for _a in ("0.05", "2.0", "8.0"):
    PRESETS[f"transfer-alpha-{_a}"] = ("transfer", dict(alpha=float(_a)))
for _p in range(10, 100, 10):
    PRESETS[f"multienv-sparsity-{_p}"] = ("multienv", dict(sparsity=_p / 100.0, n_groups=40))


def resolve(name):
    """(generator name, default parameters) for a preset or a bare model name."""
    if name in PRESETS:
        gen, params = PRESETS[name]
        return gen, dict(params)
    if name in GENERATORS:
        return name, {}
    raise PresetError(f"unknown preset or model {name!r}; known presets: {', '.join(sorted(PRESETS))}")


def generate(name, seed=0, **params):
    """Reproducible dataset for a preset (e.g. "transfer-alpha-8.0") or model name, with overrides."""
    gen, base = resolve(name)
    base.update(params)
    data = GENERATORS[gen](seed=seed, **base)
    data.meta["preset"] = name
    data.meta["generator"] = gen
    return data
