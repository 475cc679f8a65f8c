"""Split R-hat and effective sample size for multi-chain MCMC output.

Both follow Gelman et al., Bayesian Data Analysis (3rd ed.), ch. 11: R-hat on
chains split in half, ESS from the multi-chain autocorrelation estimate
truncated with Geyer's initial monotone sequence.
"""

from __future__ import annotations

import numpy as np


def _as_chains(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("expected draws shaped (n_chains, n_draws)")
    return x


def split_rhat(x) -> float:
    x = _as_chains(x)
    half = x.shape[1] // 2
    if half < 2:
        raise ValueError("need at least 4 draws per chain")
    split = np.concatenate([x[:, :half], x[:, -half:]], axis=0)
    n = split.shape[1]
    w = np.mean(np.var(split, axis=1, ddof=1))
    b = n * np.var(np.mean(split, axis=1), ddof=1)
    if w == 0:
        return 1.0 if b == 0 else float("inf")
    var_plus = (n - 1) / n * w + b / n
    return float(np.sqrt(var_plus / w))


def _autocov(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance of each row via FFT."""
    n = x.shape[1]
    centered = x - x.mean(axis=1, keepdims=True)
    size = 2 ** int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(centered, size, axis=1)
    return np.fft.irfft(f * np.conj(f), size, axis=1)[:, :n] / n


def ess(x) -> float:
    x = _as_chains(x)
    m, n = x.shape
    if n < 4:
        raise ValueError("need at least 4 draws per chain")
    acov = _autocov(x)
    chain_var = acov[:, 0] * n / (n - 1)
    w = chain_var.mean()
    if w == 0:
        return float(m * n)
    var_plus = w * (n - 1) / n
    if m > 1:
        var_plus += np.var(x.mean(axis=1), ddof=1)
    rho = 1.0 - (w - acov.mean(axis=0)) / var_plus
    rho[0] = 1.0

    # Geyer: sum adjacent pairs while positive, enforcing monotone decrease
    total = 0.0
    prev = np.inf
    for k in range(0, n - 1, 2):
        pair = rho[k] + rho[k + 1]
        if pair <= 0:
            break
        pair = min(pair, prev)
        total += pair
        prev = pair
    tau = max(-1.0 + 2.0 * total, 1.0 / np.log10(m * n))
    return float(m * n / tau)


def mcse_mean(x) -> float:
    x = _as_chains(x)
    return float(np.std(x, ddof=1) / np.sqrt(ess(x)))


def mcse_sd(x) -> float:
    """Monte-Carlo standard error of the posterior sd (normal approximation)."""
    x = _as_chains(x)
    return float(np.std(x, ddof=1) / np.sqrt(2.0 * ess(x)))
