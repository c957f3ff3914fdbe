"""Posterior summaries, evaluation metrics and CSV/JSON emission."""
from __future__ import annotations

import csv
import hashlib
import json
import platform
import sys
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .samplers.ess import DegenerateChainWarning, ess

QUANTILES = (0.025, 0.25, 0.5, 0.75, 0.975)
QUANTILE_NAMES = ("q2.5", "q25", "q50", "q75", "q97.5")
SUMMARY_FIELDS = ("param", "mean", "sd", *QUANTILE_NAMES, "ess")


def rmse(pred, truth):
    pred, truth = np.asarray(pred, dtype=float), np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.shape} vs {truth.shape}")
    return float(np.sqrt(np.mean((pred - truth) ** 2)))


def sparsity_count(deltas, threshold=0.05):
    """Number of entries with |delta| < threshold."""
    return int(np.sum(np.abs(np.asarray(deltas, dtype=float)) < threshold))


@dataclass
class ParamSummary:
    param: str
    mean: float
    sd: float
    quantiles: tuple
    ess: float

    def row(self):
        return [self.param, self.mean, self.sd, *self.quantiles, self.ess]


@dataclass
class Summary:
    params: list
    acceptance: dict
    n_draws: int
    extras: dict = field(default_factory=dict)

    def __getitem__(self, name):
        for p in self.params:
            if p.param == name:
                return p
        raise KeyError(name)

    @property
    def names(self):
        return [p.param for p in self.params]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(SUMMARY_FIELDS)
            for p in self.params:
                w.writerow([p.param, *(_fmt(v) for v in p.row()[1:])])


def _fmt(v):
    return f"{float(v):.17g}"


def summarize_column(name, x):
    x = np.asarray(x, dtype=float)
    q = tuple(float(v) for v in np.quantile(x, QUANTILES, method="linear"))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateChainWarning)
        e = ess(x) if x.size >= 100 else float(x.size)
    sd = float(x.std(ddof=1)) if x.size > 1 else 0.0
    if np.ptp(x) == 0.0:
        sd = 0.0
    return ParamSummary(name, float(x.mean()), sd, q, float(min(e, x.size)))


def summarize(trace, model=None, include_derived=True):
    """Mean, sd, type-7 quantiles and ESS for sampled and derived columns.

    Sampled parameters are reported on the natural scale as well when they were
    sampled on the log scale (``log_r`` also yields ``r``).
    """
    if trace.draws.shape[0] == 0:
        raise ValueError("empty trace")
    params = []
    for j, name in enumerate(trace.names):
        col = trace.draws[:, j]
        params.append(summarize_column(name, col))
        if name.startswith("log_"):
            params.append(summarize_column(name[4:], np.exp(col)))
    extras = {}
    if include_derived:
        seen = {p.param for p in params}
        for name, col in trace.derived.items():
            if name not in seen and np.asarray(col).ndim == 1:
                params.append(summarize_column(name, col))
    if model is not None and "n_sparse" in trace.derived:
        extras["n_groups"] = getattr(model, "n_groups", None)
    return Summary(params, trace.acceptance_rates(), int(trace.draws.shape[0]), extras)


def write_derived_csv(trace, path):
    names = list(trace.derived)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", *names])
        for i, it in enumerate(trace.iterations):
            w.writerow([int(it), *(_fmt(trace.derived[n][i]) for n in names)])


def read_table(path):
    """Read any emitted CSV back as (header, rows of strings)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def manifest(config, trace=None, files=None, data_meta=None, extra=None):
    """Plain dict holding everything needed to rerun and audit a run."""
    import numpy
    import scipy
    from . import __version__
    m = {
        "distset_version": __version__,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "python": sys.version.split()[0],
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "platform": platform.platform(),
        "config": config,
    }
    if trace is not None:
        m.update(seed=trace.seed, kernel=trace.kernel, wall_seconds=trace.wall_seconds,
                 acceptance=trace.acceptance_rates(), step_sizes=trace.step_sizes,
                 step_size_snapshots=trace.step_size_snapshots, fallbacks=trace.fallbacks,
                 n_draws=int(trace.draws.shape[0]), chain_config=trace.config)
    if data_meta is not None:
        m["data"] = {k: v for k, v in data_meta.items() if not isinstance(v, np.ndarray)}
    if files:
        m["files"] = {k: {"path": str(p), "sha256": file_sha256(p)} for k, p in files.items()}
    if extra:
        m.update(extra)
    return _jsonable(m)


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def merge_manifests(manifests):
    """One manifest for several chains of the same configuration."""
    if not manifests:
        raise ValueError("nothing to merge")
    base = dict(manifests[0])
    base["chains"] = [{k: m.get(k) for k in ("seed", "wall_seconds", "acceptance", "files")} for m in manifests]
    return base
