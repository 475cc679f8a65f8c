"""Evidence measures computed from posterior draws of the mean."""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import stats

from ..common import Side, Support
from ..errors import DomainError, EmptyPositivePartWarning, ExtrapolationWarning, FewDrawsWarning
from .priors import PriorSpec

MIN_DRAWS = 1000


def _draws(draws) -> np.ndarray:
    x = np.asarray(draws, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("no draws")
    if x.size < MIN_DRAWS:
        warnings.warn(f"only {x.size} draws (< {MIN_DRAWS})", FewDrawsWarning, stacklevel=3)
    return x


def hdi(draws, mass: float = 0.95) -> tuple[float, float]:
    """Shortest interval spanning ceil(mass * n) of the sorted draws."""
    if not 0 < mass < 1:
        raise DomainError(f"mass must lie in (0, 1), got {mass}")
    s = np.sort(_draws(draws))
    n = s.size
    # guard against mass * n landing a hair above an integer
    k = max(1, math.ceil(mass * n - 1e-9))
    widths = s[k - 1 :] - s[: n - k + 1]
    i = int(np.argmin(widths))
    return float(s[i]), float(s[i + k - 1])


def upper_bound(draws, mass: float = 0.95) -> float:
    """Smallest draw u with at least ``mass`` of the draws <= u: the zero-anchored interval [0, u]."""
    if not 0 < mass < 1:
        raise DomainError(f"mass must lie in (0, 1), got {mass}")
    s = np.sort(_draws(draws))
    return float(s[max(1, math.ceil(mass * s.size - 1e-9)) - 1])


def pd_plus(draws) -> float:
    """Fraction of draws strictly above zero; draws equal to 0 count as non-positive."""
    return float(np.mean(_draws(draws) > 0))


def positive_part(draws) -> tuple[np.ndarray, float]:
    """Non-negative draws and the fraction of all draws they represent."""
    x = _draws(draws)
    pos = x[x >= 0]
    if pos.size == 0:
        warnings.warn("no non-negative draws; upper limit collapses to 0+", EmptyPositivePartWarning, stacklevel=2)
    return pos, pos.size / x.size


def silverman_bandwidth(x: np.ndarray) -> float:
    sd = np.std(x, ddof=1)
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.349) or sd
    return float(0.9 * spread * x.size ** -0.2)


def density_at(draws, x: float, support: Support = Support.FULL, bandwidth: float | None = None) -> float:
    """Gaussian kernel density estimate at ``x``.

    With ``Support.NON_NEGATIVE`` the draws must be >= 0 and the kernel mass
    that would spill below zero is reflected back, so the estimate at the
    boundary is not halved.
    """
    d = _draws(draws)
    h = silverman_bandwidth(d) if bandwidth is None else bandwidth
    if not h > 0:
        raise DomainError("draws have zero spread; density is undefined")
    if support is Support.NON_NEGATIVE:
        if d.min() < 0:
            raise DomainError("NON_NEGATIVE support requires draws >= 0")
        if x < 0:
            return 0.0
        if x > d.max():
            warnings.warn(f"x={x} beyond the largest draw", ExtrapolationWarning, stacklevel=2)
        k = stats.norm.pdf((x - d) / h) + stats.norm.pdf((x + d) / h)
    else:
        if x < d.min() or x > d.max():
            warnings.warn(f"x={x} outside the range of the draws", ExtrapolationWarning, stacklevel=2)
        k = stats.norm.pdf((x - d) / h)
    return float(k.sum() / (d.size * h))


def savage_dickey(posterior_draws, prior: PriorSpec, variant: Side = Side.POSITIVE_ONLY) -> float:
    """Savage-Dickey ratio p(mu=0 | data) / p(mu=0): Bayes factor for the null.

    ``POSITIVE_ONLY`` compares both densities truncated to mu >= 0, each
    renormalised to its positive mass.  If the posterior has no mass at zero
    the ratio is 0 (decisive evidence against the null) and a warning says so.
    """
    x = _draws(posterior_draws)
    if variant is Side.POSITIVE_ONLY:
        pos = x[x >= 0]
        if pos.size < 2:
            warnings.warn("posterior has no positive part; ratio set to 0", EmptyPositivePartWarning, stacklevel=2)
            return 0.0
        post = density_at(pos, 0.0, Support.NON_NEGATIVE)
        ref = prior.mu_density(0.0, Support.NON_NEGATIVE)
    else:
        post = density_at(x, 0.0, Support.FULL)
        ref = prior.mu_density(0.0, Support.FULL)
    if post <= 0.0 or not math.isfinite(post):
        warnings.warn(
            "posterior density at 0 is numerically zero: decisive evidence against mu = 0",
            ExtrapolationWarning,
            stacklevel=2,
        )
        return 0.0
    return post / ref


def savage_dickey_gaussian(post_mean: float, post_sd: float, prior: PriorSpec, variant: Side = Side.POSITIVE_ONLY) -> float:
    """Closed-form ratio when the posterior of the mean is taken as normal."""
    post = stats.norm.pdf(0.0, post_mean, post_sd)
    ref = prior.mu_density(0.0, Support.FULL)
    if variant is Side.POSITIVE_ONLY:
        post /= stats.norm.sf(0.0, post_mean, post_sd)
        ref = prior.mu_density(0.0, Support.NON_NEGATIVE)
    return float(post / ref)
