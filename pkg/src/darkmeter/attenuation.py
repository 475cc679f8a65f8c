"""Environment-attenuation estimate of chamber darkness.

The bright source is calibrated by log-domain tomography: each measurement is
the source seen through a stack of neutral density filters, so

    log10(rate) = log10(source) - sum(OD_i for filters in the stack),

a linear system solved by ordinary least squares.  The chamber attenuation
is the calibrated source rate over the rate seen through the closed chamber,
and the chamber light level is the lab light level over that attenuation.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .common import GaussianEstimate
from .errors import DomainError, FormatError, IdentifiabilityError

DEFAULT_SATURATION_CUTOFF = 1e6
LN10 = math.log(10.0)


@dataclass(frozen=True)
class StackMeasurement:
    led_on: bool
    filters: tuple[bool, ...]
    log10_rate: float
    log10_sd: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "filters", tuple(bool(f) for f in self.filters))
        if not self.led_on and not any(self.filters):
            raise ValueError("a measurement needs the LED or at least one filter")
        if not math.isfinite(self.log10_rate):
            raise ValueError("log10_rate must be finite (linear rate > 0)")

    @property
    def rate(self) -> float:
        return 10.0**self.log10_rate


@dataclass(frozen=True)
class AttenuationSystem:
    rows: tuple[StackMeasurement, ...]
    saturation_cutoff: float = DEFAULT_SATURATION_CUTOFF

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if not self.rows:
            raise ValueError("empty system")
        widths = {len(r.filters) for r in self.rows}
        if len(widths) != 1:
            raise ValueError(f"rows disagree on the number of filters: {sorted(widths)}")

    @property
    def n_filters(self) -> int:
        return len(self.rows[0].filters)

    @property
    def column_names(self) -> list[str]:
        return ["log10_source"] + [f"od{i + 1}" for i in range(self.n_filters)]

    def usable_rows(self) -> list[StackMeasurement]:
        return [r for r in self.rows if r.rate <= self.saturation_cutoff]

    def design(self, rows=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        rows = self.usable_rows() if rows is None else rows
        a = np.array([[1.0 if r.led_on else 0.0] + [-1.0 if f else 0.0 for f in r.filters] for r in rows])
        y = np.array([r.log10_rate for r in rows])
        sd = np.array([r.log10_sd for r in rows])
        return a.reshape(len(rows), 1 + self.n_filters), y, sd


@dataclass(frozen=True)
class LsSolution:
    log10_source: float
    od: tuple[float, ...]
    errors: tuple[float, ...]
    residuals: tuple[float, ...]
    residual_norm: float
    n_rows_used: int
    loo_fits: tuple[tuple[float, ...], ...] = field(default=())

    @property
    def source_rate(self) -> float:
        return 10.0**self.log10_source

    @property
    def log10_source_sd(self) -> float:
        return self.errors[0]

    def as_dict(self) -> dict:
        return {
            "log10_source": self.log10_source,
            "od": list(self.od),
            "errors": {"log10_source": self.errors[0], "od": list(self.errors[1:])},
            "residuals": list(self.residuals),
            "residual_norm": self.residual_norm,
            "n_rows_used": self.n_rows_used,
            "loo_fits": [list(f) for f in self.loo_fits],
        }


def _unidentifiable(a: np.ndarray, names: list[str]) -> list[str]:
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    tol = max(a.shape) * np.finfo(float).eps * (s[0] if s.size else 1.0)
    rank = int(np.sum(s > tol))
    null = vt[rank:]
    return [names[j] for j in range(a.shape[1]) if null.size and np.any(np.abs(null[:, j]) > 1e-8)]


def _lstsq(a: np.ndarray, y: np.ndarray, sd: np.ndarray | None, names: list[str]) -> np.ndarray:
    bad = _unidentifiable(a, names) if a.shape[0] else names
    if bad or a.shape[0] < a.shape[1]:
        raise IdentifiabilityError(f"system is rank deficient; cannot resolve {bad or names}", bad or names)
    if sd is not None:
        if np.any(sd <= 0):
            raise DomainError("weighted fit needs every log10_sd > 0")
        a, y = a / sd[:, None], y / sd
    return np.linalg.lstsq(a, y, rcond=None)[0]


def solve_ls(system: AttenuationSystem, weighted: bool = False) -> LsSolution:
    """Least-squares source level and filter ODs, with leave-one-filter-out errors.

    Rows brighter than the saturation cutoff are dropped first.  The stated
    per-row uncertainties are ignored unless ``weighted`` is set.  Each
    component's error is the sample sd of its estimates over the refits that
    drop one filter (column and every row using it) at a time; components
    present in fewer than two refits get NaN.
    """
    names = system.column_names
    rows = system.usable_rows()
    a, y, sd = system.design(rows)
    x = _lstsq(a, y, sd if weighted else None, names)
    resid = y - a @ x

    nf = system.n_filters
    loo: list[tuple[float, ...]] = []
    per_component: list[list[float]] = [[] for _ in names]
    for j in range(nf):
        keep_rows = a[:, 1 + j] == 0
        cols = [c for c in range(1 + nf) if c != 1 + j]
        try:
            xj = _lstsq(a[keep_rows][:, cols], y[keep_rows], sd[keep_rows] if weighted else None, [names[c] for c in cols])
        except IdentifiabilityError as exc:
            warnings.warn(f"leave-out refit without filter {j + 1} skipped: {exc}", RuntimeWarning, stacklevel=2)
            continue
        full = [math.nan] * (1 + nf)
        for c, v in zip(cols, xj):
            full[c] = float(v)
            per_component[c].append(float(v))
        loo.append(tuple(full))
    errors = tuple(float(np.std(v, ddof=1)) if len(v) > 1 else math.nan for v in per_component)

    return LsSolution(
        log10_source=float(x[0]),
        od=tuple(float(v) for v in x[1:]),
        errors=errors,
        residuals=tuple(float(r) for r in resid),
        residual_norm=float(np.linalg.norm(resid)),
        n_rows_used=len(rows),
        loo_fits=tuple(loo),
    )


def attenuation(log10_source: GaussianEstimate, closed_rate: GaussianEstimate) -> GaussianEstimate:
    """Chamber attenuation 10**log10_source / closed_rate, first-order error propagation."""
    if closed_rate.mean <= 0:
        raise DomainError("closed-chamber rate must be > 0 to claim an attenuation")
    value = 10.0**log10_source.mean / closed_rate.mean
    rel = math.hypot(LN10 * log10_source.sd, closed_rate.sd / closed_rate.mean)
    return GaussianEstimate(value, value * rel)


def ea_estimate(lab_rate: GaussianEstimate, attenuation_c: GaussianEstimate) -> GaussianEstimate:
    """Chamber light level lab_rate / attenuation, first-order error propagation."""
    if attenuation_c.mean <= 0:
        raise DomainError("attenuation must be > 0")
    a = attenuation_c.mean
    value = lab_rate.mean / a
    sd = math.hypot(lab_rate.sd / a, lab_rate.mean * attenuation_c.sd / a**2)
    return GaussianEstimate(value, sd)


def read_table_csv(path: str | Path) -> list[StackMeasurement]:
    """Read ``led,f1..fn,log10_rate,log10_sd`` rows."""
    with Path(path).open(encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        nf = len(header) - 3
        expected = ["led"] + [f"f{i + 1}" for i in range(nf)] + ["log10_rate", "log10_sd"]
        if nf < 0 or header != expected:
            raise FormatError(f"expected header {','.join(expected)}", line=1)
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or not "".join(rec).strip():
                continue
            try:
                flags = [int(v) for v in rec[: 1 + nf]]
                if any(v not in (0, 1) for v in flags) or len(rec) != len(header):
                    raise ValueError("flags must be 0 or 1")
                rows.append(StackMeasurement(bool(flags[0]), tuple(flags[1:]), float(rec[-2]), float(rec[-1])))
            except ValueError as exc:
                raise FormatError(str(exc), line=lineno) from exc
    return rows


def builtin_table_path() -> Path:
    """Bundled 13-row LED/filter tomography measurement set (5 filters)."""
    return Path(str(resources.files("darkmeter") / "data" / "led_filter_tomography.csv"))


def load_system(path: str | Path | None = None, saturation_cutoff: float = DEFAULT_SATURATION_CUTOFF) -> AttenuationSystem:
    return AttenuationSystem(tuple(read_table_csv(path or builtin_table_path())), saturation_cutoff)
