"""``distset`` command line: run | check | predict | generate.

Exit codes: 0 success, 2 invalid configuration or missing inputs, 3 sampler
failure.  Failures also print a one-line JSON error object to stderr (and to
``error.json`` in the output directory when one is known).
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from .config import ConfigError, RunConfig, parse_config
from .models import MODELS, DataError, generate, load_dataset, read_csv_dataset, resolve, save_dataset
from .models.base import Dataset
from .samplers import ChainConfig, PPPDomain, SamplerError, Trace, predictive_sample, run_chains, run_ppp_chain

EXIT_OK, EXIT_CONFIG, EXIT_SAMPLER = 0, 2, 3
MAX_POSTERIOR_ROWS = 200


class CLIError(Exception):
    def __init__(self, code, kind, message):
        super().__init__(message)
        self.code, self.kind, self.message = code, kind, message


def _fail(err, out_dir=None):
    payload = {"error": err.kind, "message": err.message, "exit_code": err.code}
    print(json.dumps(payload), file=sys.stderr)
    if out_dir is not None:
        try:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            diag.write_json(payload, Path(out_dir) / "error.json")
        except OSError:
            pass
    return err.code


# ---------------------------------------------------------------- data / model

def load_data(cfg: RunConfig):
    if cfg.data_path is not None:
        try:
            if cfg.data_path.endswith(".npz"):
                return load_dataset(cfg.data_path)
            return read_csv_dataset(cfg.data_path, cfg.roles)
        except (OSError, DataError) as exc:
            raise CLIError(EXIT_CONFIG, "data", str(exc)) from exc
    try:
        return generate(cfg.preset or cfg.model, seed=cfg.seed, **cfg.data_params)
    except (TypeError, ValueError) as exc:
        raise CLIError(EXIT_CONFIG, "data", f"cannot generate data: {exc}") from exc


def build_model(cfg: RunConfig, data: Dataset):
    try:
        return MODELS[cfg.model](data, **cfg.model_params)
    except (KeyError, TypeError, ValueError) as exc:
        raise CLIError(EXIT_CONFIG, "model", f"cannot build model {cfg.model!r}: {exc}") from exc


def concat_traces(traces):
    if len(traces) == 1:
        return traces[0]
    t0 = traces[0]
    derived = {k: np.concatenate([t.derived[k] for t in traces]) for k in t0.derived}
    return Trace(names=t0.names, draws=np.vstack([t.draws for t in traces]),
                 log_post=np.concatenate([t.log_post for t in traces]),
                 iterations=np.concatenate([t.iterations for t in traces]),
                 accepted={b: sum(t.accepted[b] for t in traces) for b in t0.accepted},
                 proposed={b: sum(t.proposed[b] for t in traces) for b in t0.proposed},
                 wall_seconds=sum(t.wall_seconds for t in traces), kernel=t0.kernel, seed=t0.seed,
                 step_sizes=t0.step_sizes, step_size_snapshots=t0.step_size_snapshots,
                 fallbacks=sum(t.fallbacks for t in traces), derived=derived, config=t0.config)


def sample(cfg: RunConfig, model):
    try:
        if cfg.model == "disk" and cfg.model_params.get("normalizer") == "ppp":
            dom = PPPDomain(model.center, model.R_max, model.sigma_max)
            traces = [run_ppp_chain(model, dom, cfg.ppp_iter, cfg.ppp_iter // 5, thin=cfg.chain.thin,
                                    seed=cfg.seed, chain_id=c) for c in range(cfg.n_chains)]
        else:
            traces = run_chains(model, cfg.chain, cfg.kernel, n_chains=cfg.n_chains, workers=cfg.workers)
    except (SamplerError, FloatingPointError, ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        raise CLIError(EXIT_SAMPLER, "sampler", f"{type(exc).__name__}: {exc}") from exc
    return traces


def execute_run(cfg: RunConfig):
    """Generate or load data, sample, and write the run directory; returns the manifest path."""
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CLIError(EXIT_CONFIG, "output", f"cannot create {out}: {exc}") from exc
    data = load_data(cfg)
    model = build_model(cfg, data)
    traces = sample(cfg, model)
    trace = concat_traces(traces)
    files = {"trace": out / "trace.csv", "summary": out / "summary.csv", "derived": out / "derived.csv"}
    trace.to_csv(files["trace"])
    diag.summarize(trace, model).to_csv(files["summary"])
    diag.write_derived_csv(trace, files["derived"])
    extra = {"model": cfg.model, "preset": cfg.preset, "n_chains": cfg.n_chains,
             "data_fingerprint": data.fingerprint(),
             "chains": [{"chain_id": c, "wall_seconds": t.wall_seconds, "acceptance": t.acceptance_rates(),
                         "step_sizes": t.step_sizes} for c, t in enumerate(traces)]}
    if cfg.data_path is not None:
        extra["data_sha256"] = diag.file_sha256(cfg.data_path)
    man = diag.manifest(cfg.to_dict(), trace, data_meta=data.meta, extra=extra)
    # relative names so a run directory can be moved as a unit
    man["files"] = {k: {"path": p.name, "sha256": diag.file_sha256(p)} for k, p in files.items()}
    path = out / "manifest.json"
    diag.write_json(man, path)
    return path


def cmd_run(args):
    try:
        cfg = parse_config(path=args.config, preset=args.preset, seed=args.seed, out=args.out)
    except ConfigError as exc:
        return _fail(CLIError(EXIT_CONFIG, "config", str(exc)), args.out)
    try:
        path = execute_run(cfg)
    except CLIError as err:
        return _fail(err, cfg.out)
    print(f"wrote {path.parent}/{{trace,summary,derived}}.csv and {path}")
    return EXIT_OK


# ---------------------------------------------------------------- check

def cmd_check(args):
    from .checks import format_table, run_checks
    try:
        results = run_checks(args.suite or None, faults=args.inject_fault or (), quick=args.quick)
    except ValueError as exc:
        return _fail(CLIError(EXIT_CONFIG, "config", str(exc)))
    print(format_table(results))
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("FAILED: " + " ".join(failed), file=sys.stderr)
        return 1
    return EXIT_OK


# ---------------------------------------------------------------- predict

def fixed_manifest_for(preset):
    """Fixed-parameter manifest for presets whose generator states the set outright."""
    try:
        gen, p = resolve(preset)
    except ValueError as exc:
        raise CLIError(EXIT_CONFIG, "config", str(exc)) from exc
    if gen == "l1-ball":
        return {"fixed": {"family": "l1", "center": list(p["center"]), "radius": p["radius"], "sigma": p["sigma"]}}
    if gen == "disk":
        return {"fixed": {"family": "l2", "center": [0.0] * p["d"], "radius": p["r"], "sigma": p["sigma"]}}
    raise CLIError(EXIT_CONFIG, "config", f"preset {preset!r} has no fixed parameters; pass a run manifest")


def _fixed_set(spec):
    from . import geometry as geo
    fam = spec.get("family")
    c = np.asarray(spec["center"], dtype=float)
    if fam == "l1":
        return geo.L1Ball(c, float(spec["radius"]))
    if fam == "l2":
        return geo.L2Ball(c, float(spec["radius"]))
    raise CLIError(EXIT_CONFIG, "manifest", f"unsupported fixed family {fam!r}")


def posterior_sets(man, man_dir):
    """(set, sigma) pairs from the stored draws of a run manifest."""
    cfg_d = man.get("config")
    if not cfg_d:
        raise CLIError(EXIT_CONFIG, "manifest", "manifest has neither 'config' nor 'fixed'")
    chain = ChainConfig(**{k: v for k, v in cfg_d["chain"].items()})
    cfg = RunConfig(**{**cfg_d, "chain": chain})
    data = load_data(cfg)
    model = build_model(cfg, data)
    if not hasattr(model, "set_and_sigma"):
        raise CLIError(EXIT_CONFIG, "model", f"model {cfg.model!r} does not support predictive draws")
    trace_path = man_dir / man["files"]["trace"]["path"]
    if not trace_path.exists():
        raise CLIError(EXIT_CONFIG, "manifest", f"trace file {trace_path} not found")
    names, _, draws, _ = Trace.read_csv(trace_path)
    if names != list(model.names):
        raise CLIError(EXIT_CONFIG, "manifest", "trace columns do not match the model")
    k = min(MAX_POSTERIOR_ROWS, len(draws))
    rows = np.unique(np.linspace(0, len(draws) - 1, k).round().astype(int))
    return [model.set_and_sigma(draws[i]) for i in rows]


def predictive_rows(pairs, n_draws, seed):
    """Split n_draws round-robin over (set, sigma) pairs; each pair gets its own stream."""
    K = len(pairs)
    counts = [len(range(k, n_draws, K)) for k in range(K)]
    ss = np.random.SeedSequence(int(seed))
    out = []
    for (S, s), cnt, child in zip(pairs, counts, ss.spawn(K)):
        if cnt:
            out.append(predictive_sample(S, s, cnt, rng=np.random.default_rng(child)))
    return out


def write_predictive_csv(path, d, results):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["draw_index", *(f"y{j}" for j in range(d)), "dist", "u"])
        i = 0
        for res in results:
            for y, dist, u in zip(res.y, res.dist, res.u):
                w.writerow([i, *(f"{v:.17g}" for v in y), f"{dist:.17g}", f"{u:.17g}"])
                i += 1


def cmd_predict(args):
    try:
        if args.manifest is None:
            if args.preset is None:
                raise CLIError(EXIT_CONFIG, "config", "predict needs --manifest or --preset")
            man, man_dir = fixed_manifest_for(args.preset), Path(".")
        else:
            mp = Path(args.manifest)
            if not mp.is_file():
                raise CLIError(EXIT_CONFIG, "manifest", f"manifest {mp} not found")
            try:
                man = json.loads(mp.read_text())
            except json.JSONDecodeError as exc:
                raise CLIError(EXIT_CONFIG, "manifest", f"manifest is not valid JSON: {exc}") from exc
            man_dir = mp.parent
        if args.n_draws < 0:
            raise CLIError(EXIT_CONFIG, "config", "--n-draws must be >= 0")
        seed = args.seed if args.seed is not None else int(os.environ.get("DISTSET_SEED", 0))
        if "fixed" in man:
            f = man["fixed"]
            pairs = [(_fixed_set(f), float(f["sigma"]))]
        else:
            pairs = posterior_sets(man, man_dir)
        d = pairs[0][0].dim
        results = predictive_rows(pairs, args.n_draws, seed)
        out = Path(args.out) if args.out else Path(os.environ.get("DISTSET_OUT", ".")) / "predictive.csv"
        out.parent.mkdir(parents=True, exist_ok=True)
        write_predictive_csv(out, d, results)
    except CLIError as err:
        return _fail(err)
    except (ValueError, RuntimeError) as exc:
        return _fail(CLIError(EXIT_SAMPLER, "sampler", f"{type(exc).__name__}: {exc}"))
    print(f"wrote {args.n_draws} predictive draws to {out}")
    return EXIT_OK


# ---------------------------------------------------------------- generate

def cmd_generate(args):
    try:
        cfg = parse_config(path=args.config, preset=args.preset, seed=args.seed, out=args.out)
    except ConfigError as exc:
        return _fail(CLIError(EXIT_CONFIG, "config", str(exc)))
    try:
        data = load_data(cfg)
    except CLIError as err:
        return _fail(err)
    out = Path(cfg.out)
    if out.suffix != ".npz":
        out = out / "data.npz"
    out.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(data, out)
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------- entry

def make_parser():
    p = argparse.ArgumentParser(prog="distset", description="Distance-to-set Bayesian models")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="INI run configuration")
        sp.add_argument("--preset", help="named scenario (see README)")
        sp.add_argument("--seed", type=int, help="overrides config and DISTSET_SEED")
        sp.add_argument("--out", help="output directory; overrides config and DISTSET_OUT")

    r = sub.add_parser("run", help="sample a posterior and write trace/summary/derived/manifest")
    common(r)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check", help="run the oracle suites and print a pass/fail table")
    c.add_argument("--suite", action="append", help="run only this suite (repeatable)")
    c.add_argument("--quick", action="store_true", help="smaller instance counts")
    c.add_argument("--inject-fault", action="append", help=argparse.SUPPRESS)
    c.set_defaults(func=cmd_check)

    pr = sub.add_parser("predict", help="posterior-predictive draws from a run manifest")
    pr.add_argument("--manifest", help="manifest.json of a finished run")
    pr.add_argument("--n-draws", type=int, default=1000)
    pr.add_argument("--preset", help="fixed-parameter preset (l1-ball-demo, disk) instead of a manifest")
    pr.add_argument("--seed", type=int)
    pr.add_argument("--out", help="output CSV path")
    pr.set_defaults(func=cmd_predict)

    g = sub.add_parser("generate", help="write a synthetic dataset (.npz)")
    common(g)
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None):
    args = make_parser().parse_args(argv)
    if args.command in ("run", "generate") and args.config is None and args.preset is None:
        return _fail(CLIError(EXIT_CONFIG, "config", f"{args.command} needs --config or --preset"))
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
