"""Posterior radius of the multi-environment model as the true deviations get sparser."""
import argparse

import numpy as np

from distset.models import MultiEnvModel, generate
from distset.samplers import ChainConfig, run_chain


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, nargs="+", default=[10, 50, 90], help="percent of zero deviations")
    ap.add_argument("--n-iter", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'sparsity':>8} {'median r':>9} {'r q2.5':>8} {'r q97.5':>8} {'mean #sparse':>12} {'true #sparse':>12}")
    for pct in args.levels:
        data = generate(f"multienv-sparsity-{pct}", seed=args.seed)
        model = MultiEnvModel(data)
        tr = run_chain(model, ChainConfig(n_iter=args.n_iter, burn_in=args.n_iter // 2, seed=args.seed), "rwmh")
        r = tr.derived["r"]
        true_sparse = int(np.sum(np.asarray(data.meta["delta"]) == 0))
        print(f"{pct:>7}% {np.median(r):>9.3f} {np.quantile(r, 0.025):>8.3f} {np.quantile(r, 0.975):>8.3f} "
              f"{np.mean(tr.derived['n_sparse']):>12.1f} {true_sparse:>12}")


if __name__ == "__main__":
    main()
