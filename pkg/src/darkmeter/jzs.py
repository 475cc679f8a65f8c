"""One-sample Bayes factor with a Cauchy prior on the standardized effect size.

With effect size delta = mu / sigma and the scale-invariant prior
p(sigma) ~ 1/sigma, integrating sigma out leaves a likelihood ratio that
depends on the data only through t and n:

    LR(delta) = exp(-n delta^2 / 2) * E[exp(delta * k * V)],
    k = sqrt(n) t / sqrt(n - 1 + t^2),   V ~ chi distribution with n dof.

BF10 is the prior expectation of LR(delta); with delta = r tan(theta) the
Cauchy(0, r) prior becomes uniform in theta, which maps the infinite range
onto a bounded one for adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre

from .common import Side
from .errors import QuadratureError

DEFAULT_SCALE = 0.707
MAX_REL_ERROR = 1e-6

_GL_X, _GL_W = roots_legendre(200)


@dataclass(frozen=True)
class TTestInput:
    t: float
    n: int
    scale: float = DEFAULT_SCALE
    side: Side = Side.POSITIVE_ONLY

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not self.scale > 0:
            raise ValueError("scale must be > 0")


def t_statistic(mean: float, sd: float, n: int) -> float:
    return mean / (sd / math.sqrt(n))


def _log_quad(a: np.ndarray, n: int, v0: float) -> np.ndarray:
    """log of the integral of exp(h_a(v) - h_0(v0)), h_a(v) = (n-1) log v - v^2/2 + a v."""
    root = np.sqrt(a * a + 4.0 * (n - 1))
    # two algebraically equal forms of the mode; each is stable for one sign of a
    with np.errstate(divide="ignore", invalid="ignore"):
        vstar = np.where(a >= 0, 0.5 * (a + root), 2.0 * (n - 1) / (root - a))
    width = vstar / np.sqrt(n - 1 + vstar**2)
    lo = np.maximum(0.0, vstar - 14.0 * width)
    hi = vstar + 14.0 * width * (4.0 if n < 10 else 1.0)
    half = 0.5 * (hi - lo)
    v = lo[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
    with np.errstate(divide="ignore"):
        h = (n - 1) * np.log(v / v0) - 0.5 * (v - v0) * (v + v0) + a[:, None] * v
    hmax = h.max(axis=1, keepdims=True)
    return hmax[:, 0] + np.log(np.sum(_GL_W * np.exp(h - hmax), axis=1) * half)


def log_chi_mgf(a, n: int) -> np.ndarray:
    """log E[exp(a V)] for V chi-distributed with n degrees of freedom."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    v0 = math.sqrt(n - 1) if n > 1 else 1.0
    return _log_quad(a, n, v0) - _log_quad(np.zeros(1), n, v0)[0]


def log_likelihood_ratio(delta, t: float, n: int) -> np.ndarray:
    """log p(data | delta) / p(data | delta = 0) for the one-sample design."""
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    k = math.sqrt(n) * t / math.sqrt(n - 1 + t * t)
    return -0.5 * n * delta**2 + log_chi_mgf(delta * k, n)


def _peak(t: float, n: int) -> tuple[float, float]:
    """Approximate location and width of the likelihood in delta."""
    return t / math.sqrt(n), 1.0 / math.sqrt(n)


def jzs_bf01(inp: TTestInput) -> float:
    """Bayes factor for delta = 0 against a Cauchy(0, scale) effect-size prior.

    ``Side.POSITIVE_ONLY`` truncates the prior to delta >= 0.
    """
    t, n, r = inp.t, inp.n, inp.scale

    def integrand(theta: float) -> float:
        return math.exp(log_likelihood_ratio(r * math.tan(theta), t, n)[0])

    lo = 0.0 if inp.side is Side.POSITIVE_ONLY else -0.5 * math.pi
    hi = 0.5 * math.pi
    weight = (2.0 if inp.side is Side.POSITIVE_ONLY else 1.0) / math.pi
    centre, width = _peak(t, n)
    breaks = sorted(
        {
            math.atan((centre + j * width) / r)
            for j in (-8, -3, -1, 0, 1, 3, 8)
            if lo < math.atan((centre + j * width) / r) < hi
        }
    )
    value, abserr, info = integrate.quad(
        integrand, lo, hi, points=breaks or None, epsabs=0.0, epsrel=1e-10, limit=500, full_output=True
    )[:3]
    bf10 = weight * value
    if not (bf10 > 0 and math.isfinite(bf10)) or abserr > MAX_REL_ERROR * value:
        raise QuadratureError(
            "JZS quadrature did not converge",
            {"value": value, "abserr": abserr, "neval": info.get("neval"), "t": t, "n": n, "scale": r},
        )
    return 1.0 / bf10


def jzs_bf01_riemann(inp: TTestInput, nodes: int = 100_000) -> float:
    """Brute-force midpoint sum over delta, for checking :func:`jzs_bf01`."""
    t, n, r = inp.t, inp.n, inp.scale
    # extend the range until the likelihood ratio is negligible
    centre, width = _peak(t, n)
    dmax = abs(centre) + 10.0 * width
    while log_likelihood_ratio(dmax, t, n)[0] > -700 or log_likelihood_ratio(-dmax, t, n)[0] > -700:
        dmax *= 2.0
    lo = 0.0 if inp.side is Side.POSITIVE_ONLY else -dmax
    step = (dmax - lo) / nodes
    delta = lo + step * (np.arange(nodes) + 0.5)
    prior = 1.0 / (math.pi * r * (1.0 + (delta / r) ** 2))
    if inp.side is Side.POSITIVE_ONLY:
        prior *= 2.0
    lr = np.empty(nodes)
    for chunk in np.array_split(np.arange(nodes), 50):
        lr[chunk] = np.exp(log_likelihood_ratio(delta[chunk], t, n))
    return 1.0 / float(np.sum(prior * lr) * step)
