"""Full posterior analysis and prior-broadening sensitivity sweeps."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..common import Side
from ..errors import ConvergenceError, InsufficientDataError
from ..protocol import SeriesSummary
from .evidence import hdi, pd_plus, positive_part, savage_dickey, upper_bound
from .priors import PriorSpec, derive_priors
from .sampler import McmcConfig, PosteriorSamples, SufficientStats, sample_posterior

JEFFREYS_SCALE = 0.707
SWEEP_COLUMNS = ("f", "mean", "sd", "hdi_lo", "hdi_hi", "pos_upper", "pd_plus", "rsd_full", "rsd_pos")


def default_f_grid(n: int) -> list[float]:
    """Broadening factors for a sensitivity sweep; the last matches a 0.707-scale Cauchy prior."""
    return [1, 3, 10, 30, 100, 300, 1e3, 1e4, 1e5, JEFFREYS_SCALE * n]


@dataclass(frozen=True)
class PosteriorSummary:
    mean: float
    sd: float
    hdi_full: tuple[float, float]
    # (0, u): u bounds ``mass`` of the non-negative draws
    hdi_pos: tuple[float, float]
    pd_plus: float
    pos_fraction: float
    sd_ratio_full: float
    sd_ratio_pos: float
    f: float
    mass: float = 0.95
    converged: bool = True

    @property
    def pos_upper(self) -> float:
        """Upper limit on the light level from the positive part."""
        return self.hdi_pos[1]

    def as_dict(self) -> dict:
        d = asdict(self)
        d["hdi_full"] = list(self.hdi_full)
        d["hdi_pos"] = list(self.hdi_pos)
        d["pos_upper"] = self.pos_upper
        return d

    def sweep_row(self) -> dict:
        return {
            "f": self.f,
            "mean": self.mean,
            "sd": self.sd,
            "hdi_lo": self.hdi_full[0],
            "hdi_hi": self.hdi_full[1],
            "pos_upper": self.pos_upper,
            "pd_plus": self.pd_plus,
            "rsd_full": self.sd_ratio_full,
            "rsd_pos": self.sd_ratio_pos,
        }


def summarize_posterior(
    samples: PosteriorSamples, prior: PriorSpec, mass: float = 0.95, allow_unconverged: bool = False
) -> PosteriorSummary:
    if not samples.converged and not allow_unconverged:
        raise ConvergenceError(f"MCMC diagnostics failed: {samples.diagnostics}")
    mu = samples.mu_draws
    pos, frac = positive_part(mu)
    hdi_pos = (0.0, upper_bound(pos, mass) if pos.size else 0.0)
    return PosteriorSummary(
        mean=float(mu.mean()),
        sd=float(mu.std(ddof=1)),
        hdi_full=hdi(mu, mass),
        hdi_pos=hdi_pos,
        pd_plus=pd_plus(mu),
        pos_fraction=frac,
        sd_ratio_full=savage_dickey(mu, prior, Side.TWO_SIDED),
        sd_ratio_pos=savage_dickey(mu, prior, Side.POSITIVE_ONLY),
        f=prior.f_mu,
        mass=mass,
        converged=samples.converged,
    )


@dataclass(frozen=True, eq=False)
class Analysis:
    stats: SufficientStats
    prior: PriorSpec
    samples: PosteriorSamples
    summary: PosteriorSummary


def analyze(
    data, f: float = 10.0, cfg: McmcConfig = McmcConfig(), mass: float = 0.95, allow_unconverged: bool = False
) -> Analysis:
    """Priors from the data, posterior draws, and every evidence measure, for f_mu = f_sigma = f."""
    stats = SufficientStats.of(data)
    prior = derive_priors(SeriesSummary.from_stats(stats.mean, stats.variance, stats.n), f, f)
    samples = sample_posterior(stats, prior, cfg)
    return Analysis(stats, prior, samples, summarize_posterior(samples, prior, mass, allow_unconverged))


def sensitivity_sweep(
    data, f_grid=None, cfg: McmcConfig = McmcConfig(), mass: float = 0.95, allow_unconverged: bool = False
) -> list[PosteriorSummary]:
    stats = SufficientStats.of(data)
    grid = default_f_grid(stats.n) if f_grid is None else list(f_grid)
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("f_grid must be sorted ascending")
    return [analyze(stats, f, cfg, mass, allow_unconverged).summary for f in grid]


def powerlaw_fit(f, r, fit_threshold: float = 10.0) -> tuple[float, float]:
    """Least-squares fit of log r = log a + b log f over points with f >= fit_threshold."""
    f = np.asarray(f, dtype=float)
    r = np.asarray(r, dtype=float)
    keep = (f >= fit_threshold) & (f > 0) & (r > 0) & np.isfinite(r)
    if keep.sum() < 3:
        raise InsufficientDataError(f"power-law fit needs >= 3 points with f >= {fit_threshold}, got {int(keep.sum())}")
    design = np.column_stack([np.ones(keep.sum()), np.log(f[keep])])
    (log_a, b), *_ = np.linalg.lstsq(design, np.log(r[keep]), rcond=None)
    return float(math.exp(log_a)), float(b)


def write_sweep_csv(summaries, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for s in summaries:
            writer.writerow({k: repr(float(v)) for k, v in s.sweep_row().items()})


def read_sweep_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Read a sweep table; only ``f`` and at least one ratio column are required."""
    with Path(path).open(encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "f" not in rows[0]:
        raise InsufficientDataError(f"{path}: no rows or no 'f' column")
    return {k: np.array([float(row[k]) for row in rows]) for k in rows[0]}
