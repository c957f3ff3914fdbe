"""Blocked random-walk and Barker Metropolis-Hastings with burn-in step-size adaptation."""
from __future__ import annotations

import csv
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from scipy.special import expit


class SamplerError(RuntimeError):
    pass


@dataclass
class ChainConfig:
    n_iter: int = 10_000
    burn_in: int = 5_000
    thin: int = 1
    step_sizes: Optional[Dict[str, float]] = None
    adapt_target: float = 0.4
    adapt_window: int = 25
    seed: int = 0
    adapt: bool = True

    def __post_init__(self):
        if not 0 <= self.burn_in < self.n_iter:
            raise ValueError("need 0 <= burn_in < n_iter")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if not 0 < self.adapt_target < 1:
            raise ValueError("adapt_target must lie in (0, 1)")
        if self.adapt_window < 1:
            raise ValueError("adapt_window must be >= 1")
        for k, v in (self.step_sizes or {}).items():
            if not v > 0:
                raise ValueError(f"step size for {k} must be positive")

    @property
    def n_kept(self):
        return (self.n_iter - self.burn_in) // self.thin


@dataclass
class Target:
    """A log density on R^dim, optionally with a joint value-and-gradient callable."""

    log_density: Callable
    dim: int
    value_and_grad: Optional[Callable] = None
    names: Optional[Sequence[str]] = None
    blocks: Optional[Dict[str, slice]] = None
    x0: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.names is None:
            self.names = [f"x{i}" for i in range(self.dim)]
        if self.blocks is None:
            self.blocks = {"all": slice(0, self.dim)}
        if self.x0 is None:
            self.x0 = np.zeros(self.dim)

    def initial(self):
        return np.array(self.x0, dtype=float)

    def derived(self, x):
        return {}


@dataclass
class Trace:
    names: list
    draws: np.ndarray
    log_post: np.ndarray
    iterations: np.ndarray
    accepted: Dict[str, int]
    proposed: Dict[str, int]
    wall_seconds: float
    kernel: str
    seed: int
    step_sizes: Dict[str, float]
    step_size_snapshots: list = field(default_factory=list)
    fallbacks: int = 0
    derived: Dict[str, np.ndarray] = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def acceptance_rate(self, block=None):
        """Post-burn-in acceptance rate of one block, or of all blocks pooled."""
        if block is not None:
            p = self.proposed[block]
            return self.accepted[block] / p if p else float("nan")
        p = sum(self.proposed.values())
        return sum(self.accepted.values()) / p if p else float("nan")

    def acceptance_rates(self):
        return {b: self.acceptance_rate(b) for b in self.proposed}

    def column(self, name):
        if name in self.derived:
            return self.derived[name]
        return self.draws[:, self.names.index(name)]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", *self.names, "log_post"])
            for it, row, lp in zip(self.iterations, self.draws, self.log_post):
                w.writerow([int(it), *(f"{v:.17g}" for v in row), f"{lp:.17g}"])

    @classmethod
    def read_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        arr = np.array(body, dtype=float).reshape(len(body), len(header))
        return header[1:-1], arr[:, 0].astype(int), arr[:, 1:-1], arr[:, -1]


def _evaluate(target, x, need_grad):
    if need_grad and target.value_and_grad is not None:
        lp, g = target.value_and_grad(x)
        return float(lp), np.asarray(g, dtype=float)
    return float(target.log_density(x)), None


def rwmh_step(x, lp, log_post, proposal_sds, rng, block=slice(None)):
    """One Gaussian random-walk update of x[block]; returns (x', lp', accepted)."""
    y = x.copy()
    y[block] = x[block] + proposal_sds * rng.standard_normal(x[block].shape)
    lq = float(log_post(y))
    if math.isfinite(lq) and math.log(rng.uniform()) < lq - lp:
        return y, lq, True
    return x, lp, False


def barker_step(x, lp, grad, value_and_grad, step_sizes, rng, block=slice(None)):
    """One Barker update of x[block] given the gradient at x.

    Each coordinate draws z ~ N(0, s^2) and keeps its sign with probability
    1 / (1 + exp(-z g)); the MH correction uses the exact proposal ratio.
    Returns (x', lp', grad', accepted).
    """
    g = grad[block]
    z = step_sizes * rng.standard_normal(g.shape)
    flip = rng.uniform(size=g.shape) >= expit(z * g)
    w = np.where(flip, -z, z)
    y = x.copy()
    y[block] = x[block] + w
    lq, gq = value_and_grad(y)
    lq = float(lq)
    if not math.isfinite(lq) or not np.all(np.isfinite(gq)):
        return x, lp, grad, False
    gy = np.asarray(gq, dtype=float)[block]
    log_ratio = lq - lp + float(np.sum(np.logaddexp(0.0, -w * g) - np.logaddexp(0.0, w * gy)))
    if math.log(rng.uniform()) < log_ratio:
        return y, lq, np.asarray(gq, dtype=float), True
    return x, lp, grad, False


def _default_steps(target, kernel):
    scale = 2.38 if kernel == "rwmh" else 1.5
    return {b: scale / math.sqrt(max(1, len(range(*sl.indices(target.dim))))) * 0.5
            for b, sl in target.blocks.items()}


def chain_rng(seed, chain_id=0):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(chain_id),)))


def run_chain(model, cfg: ChainConfig, kernel="rwmh", chain_id=0, x0=None, progress=None):
    """Run one chain; deterministic given (cfg.seed, chain_id)."""
    if kernel not in ("rwmh", "barker"):
        raise ValueError(f"unknown kernel {kernel!r}")
    if kernel == "barker" and getattr(model, "value_and_grad", None) is None:
        raise ValueError("barker kernel needs a model gradient")
    rng = chain_rng(cfg.seed, chain_id)
    blocks = dict(model.blocks)
    steps = _default_steps(model, kernel)
    steps.update(cfg.step_sizes or {})
    log_steps = {b: math.log(steps[b]) for b in blocks}
    scales = getattr(model, "proposal_scales", None)
    scales = np.ones(model.dim) if scales is None else np.asarray(scales, dtype=float)

    x = model.initial() if x0 is None else np.array(x0, dtype=float)
    use_grad = kernel == "barker"
    lp, grad = _evaluate(model, x, use_grad)
    if not math.isfinite(lp):
        raise SamplerError("initial point has zero posterior density")

    n_keep = cfg.n_kept
    draws = np.empty((n_keep, model.dim))
    lps = np.empty(n_keep)
    its = np.empty(n_keep, dtype=np.int64)
    acc_post = {b: 0 for b in blocks}
    prop_post = {b: 0 for b in blocks}
    win_acc = {b: 0 for b in blocks}
    n_win = 0
    snapshots = [(0, dict(steps))]
    derived_rows = []
    fallbacks = 0
    t0 = time.perf_counter()
    k = 0
    for i in range(cfg.n_iter):
        for b, sl in blocks.items():
            s = math.exp(log_steps[b]) * scales[sl]
            fallback = use_grad and (grad is None or not np.all(np.isfinite(grad)))
            if use_grad and not fallback:
                x, lp, grad, ok = barker_step(x, lp, grad, model.value_and_grad, s, rng, sl)
            else:
                fallbacks += int(fallback)
                x, lp, ok = rwmh_step(x, lp, model.log_density, s, rng, sl)
                if use_grad and ok:
                    lp, grad = _evaluate(model, x, True)
            if i >= cfg.burn_in:
                prop_post[b] += 1
                acc_post[b] += int(ok)
            else:
                win_acc[b] += int(ok)
        if i < cfg.burn_in and cfg.adapt:
            n_win += 1
            if n_win == cfg.adapt_window:
                j = (i + 1) // cfg.adapt_window
                for b in blocks:
                    rate = win_acc[b] / n_win
                    log_steps[b] += j ** -0.6 * (rate - cfg.adapt_target) * 2.0
                    win_acc[b] = 0
                n_win = 0
                snapshots.append((i + 1, {b: math.exp(v) for b, v in log_steps.items()}))
        if i == cfg.burn_in - 1 or (cfg.burn_in == 0 and i == 0):
            snapshots.append((i + 1, {b: math.exp(v) for b, v in log_steps.items()}))
        if i >= cfg.burn_in and (i - cfg.burn_in + 1) % cfg.thin == 0:
            draws[k] = x
            lps[k] = lp
            its[k] = i
            derived_rows.append(model.derived(x))
            k += 1
        if progress is not None:
            progress(i)
    snapshots.append((cfg.n_iter, {b: math.exp(v) for b, v in log_steps.items()}))
    derived = {}
    if derived_rows and derived_rows[0]:
        for name in derived_rows[0]:
            derived[name] = np.array([row[name] for row in derived_rows])
    cfg_echo = asdict(cfg)
    return Trace(names=list(model.names), draws=draws, log_post=lps, iterations=its,
                 accepted=acc_post, proposed=prop_post, wall_seconds=time.perf_counter() - t0,
                 kernel=kernel, seed=cfg.seed, step_sizes={b: math.exp(v) for b, v in log_steps.items()},
                 step_size_snapshots=snapshots, fallbacks=fallbacks, derived=derived, config=cfg_echo)


def _run_one(args):
    model, cfg, kernel, cid = args
    return run_chain(model, cfg, kernel, chain_id=cid)


def run_chains(model, cfg, kernel="rwmh", n_chains=1, workers=1):
    """Independent chains with streams derived from (seed, chain_id)."""
    jobs = [(model, cfg, kernel, c) for c in range(n_chains)]
    if workers <= 1:
        return [_run_one(j) for j in jobs]
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_run_one, jobs))
