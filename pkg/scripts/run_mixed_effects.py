"""Fit the sparse mixed-effects model to a synthetic preset and compare with the truth."""
import argparse
import time

import numpy as np

from distset.diagnostics import summarize
from distset.models import SparseMixedEffects, generate
from distset.samplers import ChainConfig, run_chain


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="mixed-effects-desk", choices=["mixed-effects-desk", "mixed-effects-full"])
    ap.add_argument("--n-iter", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--summary", help="optional path for the summary CSV")
    args = ap.parse_args()

    data = generate(args.preset, seed=args.seed)
    model = SparseMixedEffects(data)
    t0 = time.perf_counter()
    tr = run_chain(model, ChainConfig(n_iter=args.n_iter, burn_in=args.n_iter // 2, seed=args.seed), "barker")
    print(f"{args.preset}: {time.perf_counter() - t0:.1f}s, acceptance {tr.acceptance_rate():.3f}")

    mu = tr.draws[:, model.blocks["mu"]]
    truth = np.asarray(data.meta["mu"])
    print(f"{'coord':>5} {'truth':>8} {'mean':>8} {'sd':>7} {'z':>6}")
    for j, (t, m, s) in enumerate(zip(truth, mu.mean(0), mu.std(0, ddof=1))):
        print(f"{j:>5} {t:>8.3f} {m:>8.3f} {s:>7.3f} {(m - t) / s:>6.2f}")

    G = np.mean([np.abs(model.latent(x)) for x in tr.draws[::20]], axis=0)
    nonzero = np.any(np.asarray(data.meta["gamma"]) != 0, axis=0)
    print(f"mean |gamma| on true-nonzero coords {G[:, nonzero].mean():.3f}, on true-zero {G[:, ~nonzero].mean():.3f}")
    if args.summary:
        summarize(tr, model).to_csv(args.summary)


if __name__ == "__main__":
    main()
