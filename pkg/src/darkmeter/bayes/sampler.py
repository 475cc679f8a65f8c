"""Metropolis-within-Gibbs sampler for the normal model with Normal/Gamma priors.

The mean is drawn exactly from its conditional normal given the variance.
The variance prior is Gamma (not inverse-gamma), so its conditional is not a
standard family; it is updated by random-walk Metropolis on log-variance with
the step size tuned during warmup and frozen afterwards.  The likelihood
enters only through the sufficient statistics (n, mean, variance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..protocol import DifferenceSeries, SeriesSummary
from .diagnostics import ess, mcse_mean, mcse_sd, split_rhat
from .priors import PriorSpec

RHAT_MAX = 1.01
ESS_MIN = 1000.0
TARGET_ACCEPT = 0.44


@dataclass(frozen=True)
class McmcConfig:
    chains: int = 4
    warmup_draws: int = 1000
    kept_draws: int = 15_000
    seed: int = 0

    def __post_init__(self):
        if self.chains < 2:
            raise ValueError("need at least 2 chains")
        if self.kept_draws < 4 or self.warmup_draws < 0:
            raise ValueError("invalid draw counts")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @classmethod
    def for_total(cls, total: int = 60_000, chains: int = 4, warmup_draws: int = 1000, seed: int = 0) -> McmcConfig:
        if total % chains:
            raise ValueError(f"total kept draws {total} is not divisible by {chains} chains")
        return cls(chains, warmup_draws, total // chains, seed)

    @property
    def target_total_kept(self) -> int:
        return self.chains * self.kept_draws


@dataclass(frozen=True)
class SufficientStats:
    n: int
    mean: float
    variance: float

    @classmethod
    def of(cls, data) -> SufficientStats:
        if isinstance(data, SufficientStats):
            return data
        if isinstance(data, SeriesSummary):
            return cls(data.n, data.mean, data.variance)
        x = np.asarray(data.samples if isinstance(data, DifferenceSeries) else data, dtype=float)
        if x.size < 2:
            raise ValueError("need at least 2 samples")
        return cls(x.size, float(x.mean()), float(x.var(ddof=1)))

    def sum_sq(self, mu: float) -> float:
        """Sum of squared deviations of the data about ``mu``."""
        return (self.n - 1) * self.variance + self.n * (self.mean - mu) ** 2


@dataclass(frozen=True, eq=False)
class PosteriorSamples:
    """Kept draws shaped (chains, draws) plus convergence diagnostics."""

    mu: np.ndarray
    sigma_sq: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    acceptance: tuple[float, ...] = ()

    @property
    def mu_draws(self) -> np.ndarray:
        return self.mu.ravel()

    @property
    def sigma_sq_draws(self) -> np.ndarray:
        return self.sigma_sq.ravel()

    @property
    def converged(self) -> bool:
        return all(d["converged"] for d in self.diagnostics.values())


def _run_chain(stats: SufficientStats, prior: PriorSpec, cfg: McmcConfig, chain: int):
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(chain,)))
    total = cfg.warmup_draws + cfg.kept_draws
    z_mu = rng.standard_normal(total)
    z_step = rng.standard_normal(total)
    log_u = np.log(rng.random(total))
    z_init = rng.standard_normal(2)

    n, xbar = stats.n, stats.mean
    prior_prec = 1.0 / prior.sigma0_sq
    prior_term = prior.mu0 * prior_prec
    a = prior.alpha0 - 0.5 * n
    b = prior.beta0

    # log-variance posterior sd is about 1/sqrt(alpha0 + n/2)
    sd_tau = 1.0 / math.sqrt(prior.alpha0 + 0.5 * n)
    log_step = math.log(2.4 * sd_tau)
    mu = xbar + 2.0 * math.sqrt(stats.variance / n) * z_init[0]
    tau = math.log(stats.variance) + 2.0 * sd_tau * z_init[1]
    var = math.exp(tau)

    mu_out = np.empty(cfg.kept_draws)
    var_out = np.empty(cfg.kept_draws)
    accepted = 0
    for i in range(total):
        prec = prior_prec + n / var
        mu = (prior_term + n * xbar / var) / prec + z_mu[i] / math.sqrt(prec)

        half_ss = 0.5 * stats.sum_sq(mu)
        step = math.exp(log_step) * z_step[i]
        # log target in tau = log(var): (alpha0 - n/2) tau - beta0 e^tau - half_ss e^-tau
        log_ratio = a * step - b * var * math.expm1(step) - half_ss / var * math.expm1(-step)
        ok = log_u[i] < log_ratio
        if ok:
            tau += step
            var = math.exp(tau)
        if i < cfg.warmup_draws:
            log_step += ((1.0 if ok else 0.0) - TARGET_ACCEPT) / (i + 1) ** 0.6
        else:
            j = i - cfg.warmup_draws
            mu_out[j] = mu
            var_out[j] = var
            accepted += ok
    return mu_out, var_out, accepted / cfg.kept_draws


def _diagnose(x: np.ndarray) -> dict:
    rhat = split_rhat(x)
    n_eff = ess(x)
    return {
        "rhat": rhat,
        "ess": n_eff,
        "mcse_mean": mcse_mean(x),
        "mcse_sd": mcse_sd(x),
        "converged": bool(rhat <= RHAT_MAX and n_eff >= ESS_MIN),
    }


def sample_posterior(data, prior: PriorSpec, cfg: McmcConfig = McmcConfig()) -> PosteriorSamples:
    """Draw from p(mu, sigma^2 | data) for the normal model.

    ``data`` may be a DifferenceSeries, an array of samples, or a
    SeriesSummary; only its sufficient statistics are used.  Chains are run
    in chain-index order, each from its own seed derived from
    ``(cfg.seed, chain)``.
    """
    stats = SufficientStats.of(data)
    runs = [_run_chain(stats, prior, cfg, c) for c in range(cfg.chains)]
    mu = np.stack([r[0] for r in runs])
    var = np.stack([r[1] for r in runs])
    diagnostics = {"mu": _diagnose(mu), "sigma_sq": _diagnose(var)}
    return PosteriorSamples(mu, var, diagnostics, tuple(r[2] for r in runs))
