"""Bayesian inference for the mean of the difference distribution."""

from .analysis import (
    Analysis,
    PosteriorSummary,
    analyze,
    default_f_grid,
    powerlaw_fit,
    sensitivity_sweep,
    summarize_posterior,
)
from .diagnostics import ess, split_rhat
from .evidence import density_at, hdi, pd_plus, positive_part, savage_dickey, savage_dickey_gaussian, upper_bound
from .priors import PriorSpec, derive_priors
from .sampler import McmcConfig, PosteriorSamples, SufficientStats, sample_posterior

__all__ = [
    "Analysis",
    "McmcConfig",
    "PosteriorSamples",
    "PosteriorSummary",
    "PriorSpec",
    "SufficientStats",
    "analyze",
    "default_f_grid",
    "density_at",
    "derive_priors",
    "ess",
    "hdi",
    "pd_plus",
    "positive_part",
    "powerlaw_fit",
    "sample_posterior",
    "savage_dickey",
    "savage_dickey_gaussian",
    "sensitivity_sweep",
    "split_rhat",
    "summarize_posterior",
    "upper_bound",
]
