"""K-fold cross-validation on the target rows of a transfer dataset."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..diagnostics import rmse
from ..samplers import ChainConfig, run_chain
from .base import Dataset
from .transfer import TransferModel, ols


def fold_indices(n, k_folds, seed):
    if k_folds < 2:
        raise ValueError("need at least two folds")
    if n < 2 * k_folds:
        raise ValueError("too few rows for the requested folds")
    return np.array_split(np.random.default_rng(seed).permutation(n), k_folds)


@dataclass
class CVResult:
    rmse: dict
    flags: list = field(default_factory=list)

    def mean(self, method):
        return float(np.nanmean(self.rmse[method]))

    def sd(self, method):
        return float(np.nanstd(self.rmse[method], ddof=1))

    def table(self):
        return {m: {"mean": self.mean(m), "sd": self.sd(m), "folds": list(map(float, v))}
                for m, v in self.rmse.items()}


def cv_harness(data, k_folds=5, seed=0, chain=None, kernel="rwmh", **model_kw):
    """Per-fold RMSE of the distance-to-set posterior mean of beta_T and two least-squares baselines.

    "ols_target" fits the training target rows alone; "full_transfer" uses
    the source least-squares fit unchanged.
    """
    chain = chain or ChainConfig(n_iter=6000, burn_in=3000, seed=seed)
    XT, yT = np.asarray(data["X_target"]), np.asarray(data["y_target"])
    XS, yS = np.asarray(data["X_source"]), np.asarray(data["y_source"])
    folds = fold_indices(yT.size, k_folds, seed)
    beta_full = ols(XS, yS)
    out = {"dts": [], "ols_target": [], "full_transfer": []}
    flags = []
    for f, test in enumerate(folds):
        train = np.setdiff1d(np.arange(yT.size), test)
        sub = Dataset({"X_source": XS, "y_source": yS, "X_target": XT[train], "y_target": yT[train]},
                      meta=dict(data.meta, fold=f))
        if np.linalg.matrix_rank(XT[train]) < XT.shape[1]:
            flags.append(f"fold {f}: singular target design")
            out["ols_target"].append(float("nan"))
        else:
            out["ols_target"].append(rmse(XT[test] @ ols(XT[train], yT[train]), yT[test]))
        out["full_transfer"].append(rmse(XT[test] @ beta_full, yT[test]))
        model = TransferModel(sub, **model_kw)
        tr = run_chain(model, chain, kernel, chain_id=f)
        bT = np.array([tr.column(f"beta_T[{j}]").mean() for j in range(XT.shape[1])])
        out["dts"].append(rmse(XT[test] @ bT, yT[test]))
    return CVResult({k: np.array(v) for k, v in out.items()}, flags)
