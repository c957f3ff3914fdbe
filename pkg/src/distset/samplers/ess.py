"""Effective sample size by Geyer's initial monotone positive sequence."""
from __future__ import annotations

import warnings

import numpy as np


class DegenerateChainWarning(UserWarning):
    pass


def autocovariance(x):
    """Biased autocovariance at all lags via zero-padded FFT."""
    x = np.asarray(x, dtype=float)
    n = x.size
    xc = x - x.mean()
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, nfft)
    return np.fft.irfft(f * np.conj(f), nfft)[:n] / n


def ess(x, return_flag=False):
    x = np.asarray(x, dtype=float)
    if x.size < 100:
        raise ValueError("ESS needs at least 100 draws")
    acov = autocovariance(x)
    if not acov[0] > 1e-300 * max(1.0, float(np.mean(x * x))):
        warnings.warn("constant chain: ESS set to 1", DegenerateChainWarning, stacklevel=2)
        return (1.0, True) if return_flag else 1.0
    rho = acov / acov[0]
    n = x.size
    # pair sums Gamma_k = rho_{2k} + rho_{2k+1}, truncated at the first non-positive one
    m = (n - 1) // 2
    pairs = rho[0:2 * m:2] + rho[1:2 * m + 1:2]
    neg = np.nonzero(pairs <= 0)[0]
    pairs = pairs[: neg[0]] if neg.size else pairs
    pairs = np.minimum.accumulate(pairs)
    tau = -1.0 + 2.0 * pairs.sum()
    val = float(min(n / max(tau, 1e-12), n * np.log10(n)))
    return (val, False) if return_flag else val


def mcse(x):
    x = np.asarray(x, dtype=float)
    return float(np.std(x, ddof=1) / np.sqrt(ess(x)))
