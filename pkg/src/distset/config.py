"""Run configuration: one INI file per run, validated against the model's parameter schema.

    [run]
    preset = mixed-effects-desk      ; or model = ..., with [data] overrides
    kernel = barker
    seed = 0
    out = runs/me-desk

    [chain]
    n_iter = 20000
    burn_in = 10000

    [model]
    normalizer = steiner-mc

    [data]
    n = 200                          ; generator overrides, or path = file.csv
    role.y = response                ; CSV column roles when path is set
"""
from __future__ import annotations

import ast
import configparser
import os
from dataclasses import asdict, dataclass, field
from typing import Optional

from .models.generate import GENERATORS, PRESETS, resolve
from .samplers import ChainConfig


class ConfigError(ValueError):
    pass


# generator name -> model that fits it by default
DEFAULT_MODEL = {"mixed-effects": "mixed-effects", "disk": "disk", "transfer": "transfer",
                 "multienv": "multienv", "monotone": "monotone", "l1-ball": "mixed-effects"}

MODEL_PARAMS = {
    "mixed-effects": {"normalizer": ("steiner-mc", "none")},
    "disk": {"normalizer": ("steiner-exact", "ppp"), "sigma": float, "R_max": float, "sigma_max": float},
    "transfer": {"normalizer": ("steiner-mc", "gaussian"), "fixed_r": float, "sigma_s": float,
                 "sample_sigma_s": bool},
    "multienv": {"normalizer": ("gaussian", "none")},
    "monotone": {"normalizer": ("gaussian", "drop"), "jitter": float},
}
GRADIENT_MODELS = {"mixed-effects", "disk"}
KERNELS = ("rwmh", "barker")
CHAIN_KEYS = {"n_iter": int, "burn_in": int, "thin": int, "adapt_target": float, "adapt_window": int,
              "adapt": bool}


@dataclass
class RunConfig:
    model: str
    preset: Optional[str]
    seed: int = 0
    out: str = "runs/latest"
    kernel: str = "rwmh"
    chain: ChainConfig = field(default_factory=ChainConfig)
    model_params: dict = field(default_factory=dict)
    data_params: dict = field(default_factory=dict)
    data_path: Optional[str] = None
    roles: dict = field(default_factory=dict)
    n_chains: int = 1
    workers: int = 1
    ppp_iter: int = 200_000

    def to_dict(self):
        d = asdict(self)
        d["chain"] = asdict(self.chain)
        return d


def _literal(v):
    try:
        return ast.literal_eval(v)
    except (ValueError, SyntaxError):
        return v


def _coerce(key, value, kind):
    if isinstance(kind, tuple):
        if value not in kind:
            raise ConfigError(f"{key} must be one of {', '.join(kind)}, got {value!r}")
        return value
    if kind is bool:
        if isinstance(value, bool):
            return value
        s = str(value).lower()
        if s in ("1", "true", "yes", "on"):
            return True
        if s in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key} must be a boolean")
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be {kind.__name__}, got {value!r}") from exc


def parse_config(text=None, path=None, preset=None, seed=None, out=None, env=None):
    """Build and validate a RunConfig; flags beat environment variables, which beat the file."""
    env = os.environ if env is None else env
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        if path is not None:
            with open(path) as fh:
                cp.read_file(fh)
        elif text is not None:
            cp.read_string(text)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    known = {"run", "chain", "model", "data"}
    extra = set(cp.sections()) - known
    if extra:
        raise ConfigError(f"unknown config sections {sorted(extra)}")
    run = dict(cp["run"]) if cp.has_section("run") else {}
    preset = preset or run.pop("preset", None)
    run.pop("preset", None)
    model = run.pop("model", None)
    gen = None
    if preset is not None:
        try:
            gen, _ = resolve(preset)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    data = dict(cp["data"]) if cp.has_section("data") else {}
    data_path = data.pop("path", None)
    roles = {k[5:]: [c.strip() for c in v.split(",")] if "," in v else v.strip()
             for k, v in data.items() if k.startswith("role.")}
    data = {k: _literal(v) for k, v in data.items() if not k.startswith("role.")}
    if model is None:
        if gen is None:
            raise ConfigError("config needs [run] preset or model")
        model = DEFAULT_MODEL[gen]
    if model not in MODEL_PARAMS:
        raise ConfigError(f"unknown model {model!r}")
    if preset is None and data_path is None and model not in GENERATORS:
        raise ConfigError(f"model {model!r} needs a preset or a data path")
    if data_path is not None and not roles:
        raise ConfigError("[data] path needs role.<name> = column mappings")

    schema = MODEL_PARAMS[model]
    mparams = {}
    for k, v in (dict(cp["model"]) if cp.has_section("model") else {}).items():
        if k not in schema:
            raise ConfigError(f"model {model!r} has no parameter {k!r}; valid: {', '.join(schema)}")
        mparams[k] = _coerce(k, v, schema[k])

    chain_kw = {}
    for k, v in (dict(cp["chain"]) if cp.has_section("chain") else {}).items():
        if k in ("n_chains", "workers", "ppp_iter"):
            continue
        if k not in CHAIN_KEYS:
            raise ConfigError(f"unknown chain option {k!r}")
        chain_kw[k] = _coerce(k, v, CHAIN_KEYS[k])
    ch = dict(cp["chain"]) if cp.has_section("chain") else {}
    n_chains = _coerce("n_chains", ch.get("n_chains", 1), int)
    workers = _coerce("workers", ch.get("workers", 1), int)
    ppp_iter = _coerce("ppp_iter", ch.get("ppp_iter", 200_000), int)
    if n_chains < 1 or workers < 1:
        raise ConfigError("n_chains and workers must be >= 1")

    seed_v = seed if seed is not None else env.get("DISTSET_SEED", run.pop("seed", 0))
    run.pop("seed", None)
    seed_v = _coerce("seed", seed_v, int)
    out_v = out if out is not None else env.get("DISTSET_OUT", run.pop("out", "runs/latest"))
    run.pop("out", None)
    kernel = run.pop("kernel", "barker" if model in GRADIENT_MODELS else "rwmh")
    if kernel not in KERNELS:
        raise ConfigError(f"kernel must be one of {KERNELS}")
    if kernel == "barker" and model not in GRADIENT_MODELS:
        raise ConfigError(f"model {model!r} has no gradient; use kernel = rwmh")
    if run:
        raise ConfigError(f"unknown [run] options {sorted(run)}")
    try:
        chain = ChainConfig(seed=seed_v, **chain_kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid chain settings: {exc}") from exc
    if gen is not None:
        import inspect
        sig = inspect.signature(GENERATORS[gen])
        bad = [k for k in data if k not in sig.parameters]
        if bad:
            raise ConfigError(f"generator {gen!r} has no parameters {bad}")
    return RunConfig(model=model, preset=preset, seed=seed_v, out=str(out_v), kernel=kernel, chain=chain,
                     model_params=mparams, data_params=data, data_path=data_path, roles=roles,
                     n_chains=n_chains, workers=workers, ppp_iter=ppp_iter)


def preset_names():
    return sorted(PRESETS)
