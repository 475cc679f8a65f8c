"""Derived quantities: reflected-flash correction, dark-limited interval length,
and rescaling of a detector-area upper limit to a retinal spot."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .common import GaussianEstimate
from .errors import DomainError, SingularityError

Z95 = 1.96
REFERENCE_DIAMETER_MM = 0.180


@dataclass(frozen=True)
class FlashModelInput:
    """Posterior summaries for two shutter surfaces b and m.

    ``q`` is the ratio of mean closed-shutter rates (b over m) and
    ``rho_ratio`` the ratio of effective shutter reflectivities (b over m).
    """

    delta_b: GaussianEstimate
    delta_m: GaussianEstimate
    q: float
    rho_ratio: float

    def __post_init__(self):
        if not self.q > 0:
            raise DomainError("q must be > 0")
        if self.rho_ratio < 0:
            raise DomainError("rho_ratio must be >= 0")

    @property
    def k(self) -> float:
        return self.rho_ratio * self.q


def _check_k(k: float) -> None:
    if math.isclose(k, 1.0, rel_tol=0.0, abs_tol=1e-12):
        raise SingularityError("rho_ratio * q == 1: the two surfaces cannot be separated")


def flash_corrected(inp: FlashModelInput) -> GaussianEstimate:
    """Light-count estimate (delta_b - k delta_m) / (1 - k) with k = rho_ratio * q.

    The two inputs are treated as independent Gaussians, so the propagation
    is exact for this linear map.
    """
    k = inp.k
    _check_k(k)
    if k == 0.0:
        return inp.delta_b
    mean = (inp.delta_b.mean - k * inp.delta_m.mean) / (1.0 - k)
    sd = math.hypot(inp.delta_b.sd, k * inp.delta_m.sd) / abs(1.0 - k)
    return GaussianEstimate(mean, sd)


def flash_corrected_mc(inp: FlashModelInput, n_draws: int = 1_000_000, seed: int = 0) -> GaussianEstimate:
    """Sampling-based version of :func:`flash_corrected` for cross-checks."""
    k = inp.k
    _check_k(k)
    rng = np.random.default_rng(seed)
    b = rng.normal(inp.delta_b.mean, inp.delta_b.sd, n_draws)
    m = rng.normal(inp.delta_m.mean, inp.delta_m.sd, n_draws)
    c = (b - k * m) / (1.0 - k)
    return GaussianEstimate(float(c.mean()), float(c.std(ddof=1)))


def rho_sweep(
    delta_b: GaussianEstimate, delta_m: GaussianEstimate, q: float, rho_ratios
) -> list[tuple[float, GaussianEstimate]]:
    return [(float(r), flash_corrected(FlashModelInput(delta_b, delta_m, q, float(r)))) for r in rho_ratios]


def write_rho_sweep_csv(rows, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rho_ratio", "mean", "sd"])
        for r, est in rows:
            w.writerow([repr(r), repr(est.mean), repr(est.sd)])


def dark_hdi_length(var_rd: float, n: int) -> float:
    """1.96 * sqrt(2 var_rd / n): 0.95 interval length attainable in absolute darkness.

    ``var_rd`` is the per-interval variance of the dark counts; it is doubled
    because two count distributions are subtracted.
    """
    if not var_rd > 0:
        raise DomainError("var_rd must be > 0")
    if n < 1:
        raise DomainError("n must be >= 1")
    return Z95 * math.sqrt(2.0 * var_rd / n)


def retina_scaling(upper_limit: float, spot_diameter_mm: float, reference_mm: float = REFERENCE_DIAMETER_MM) -> float:
    """Scale an upper limit measured on the reference detector diameter to a retinal spot."""
    if not spot_diameter_mm > 0:
        raise DomainError("spot diameter must be > 0")
    return upper_limit * spot_diameter_mm / reference_mm
