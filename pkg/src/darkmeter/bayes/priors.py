"""Data-dependent priors for the normal model of the difference distribution."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from scipy import stats

from ..common import Support
from ..errors import DegeneratePriorError, InsufficientDataError
from ..protocol import SeriesSummary


@dataclass(frozen=True)
class PriorSpec:
    """Normal prior on the mean and Gamma(shape, rate) prior on the variance."""

    mu0: float
    sigma0_sq: float
    alpha0: float
    beta0: float
    f_mu: float = 1.0
    f_sigma: float = 1.0

    def __post_init__(self):
        if not (self.sigma0_sq > 0 and self.alpha0 > 0 and self.beta0 > 0):
            raise DegeneratePriorError("sigma0_sq, alpha0 and beta0 must all be > 0")
        if not (self.f_mu > 0 and self.f_sigma > 0):
            raise ValueError("broadening factors must be > 0")

    @property
    def sigma0(self) -> float:
        return math.sqrt(self.sigma0_sq)

    @property
    def positive_mass(self) -> float:
        """Prior probability that the mean is positive."""
        return float(stats.norm.sf(0.0, self.mu0, self.sigma0))

    def mu_density(self, x: float, support: Support = Support.FULL) -> float:
        d = float(stats.norm.pdf(x, self.mu0, self.sigma0))
        if support is Support.NON_NEGATIVE:
            return d / self.positive_mass if x >= 0 else 0.0
        return d

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def derive_priors(summary: SeriesSummary, f_mu: float = 10.0, f_sigma: float | None = None) -> PriorSpec:
    """Prior hyperparameters from the sample moments, broadened by ``f_mu``/``f_sigma``.

    The mean prior is centred on the non-negative part of the sample mean
    with the variance of the mean inflated by ``f_mu``; the Gamma prior on
    the variance has mean equal to the sample variance and variance
    ``f_sigma`` times the sampling variance of a normal variance estimate.
    """
    if f_sigma is None:
        f_sigma = f_mu
    if summary.n < 2:
        raise InsufficientDataError("need n >= 2 to derive priors")
    var, n = summary.variance, summary.n
    if not var > 0:
        raise DegeneratePriorError("sample variance is zero; priors are degenerate")
    beta0 = n / (2.0 * f_sigma * var)
    return PriorSpec(
        mu0=max(0.0, summary.mean),
        sigma0_sq=f_mu * var / n,
        alpha0=var * beta0,
        beta0=beta0,
        f_mu=float(f_mu),
        f_sigma=float(f_sigma),
    )
