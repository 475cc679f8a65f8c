"""Synthetic shuttered-counter campaigns with known ground truth.

Each interval's counts are Poisson with a rate frozen for that interval:
the (possibly drifting) dark rate, plus the light rate while the shutter is
open, plus a reflected-flash rate while it is closed.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Union

import numpy as np

from .errors import ConfigError, DomainError
from .protocol import SECONDS_PER_HOUR, CountSeries, SeriesSummary, ShutterProtocol


@dataclass(frozen=True)
class NoDrift:
    kind = "none"


@dataclass(frozen=True)
class RandomWalk:
    step_sd_per_hour: float
    kind = "random_walk"


@dataclass(frozen=True)
class Sinusoid:
    amplitude: float
    period_hours: float
    kind = "sinusoid"


Drift = Union[NoDrift, RandomWalk, Sinusoid]


@dataclass(frozen=True)
class DarkRateModel:
    """Dark count rate law.

    ``hold_intervals`` sets how many consecutive intervals share one
    evaluation of the drift law; the default re-evaluates every interval.
    """

    base_rate: float = 200.0
    drift: Drift = NoDrift()
    clamp_min: float = 0.0
    hold_intervals: int = 1

    def __post_init__(self):
        if self.base_rate < 0 or self.clamp_min < 0:
            raise ValueError("dark rates must be >= 0")
        if self.hold_intervals < 1:
            raise ValueError("hold_intervals must be >= 1")


@dataclass(frozen=True)
class SimConfig:
    dark: DarkRateModel = DarkRateModel()
    light_rate: float = 0.0
    flash_closed_rate: float = 0.0
    duration_hours: float = 1.0
    protocol: ShutterProtocol = ShutterProtocol()
    seed: int = 0
    start_open: bool = True

    def __post_init__(self):
        if self.light_rate < 0 or self.flash_closed_rate < 0:
            raise ValueError("rates must be >= 0")
        if not self.duration_hours > 0:
            raise ValueError("duration_hours must be > 0")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")

    @property
    def n_intervals(self) -> int:
        return int(round(self.duration_hours * SECONDS_PER_HOUR / self.protocol.interval_len))

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["dark"]["drift"] = {"kind": self.dark.drift.kind, **asdict(self.dark.drift)}
        return d


def dark_rate_trace(model: DarkRateModel, n_intervals: int, interval_len: float, rng: np.random.Generator) -> np.ndarray:
    hold = model.hold_intervals
    n_steps = -(-n_intervals // hold)
    t_hours = np.arange(n_steps) * hold * interval_len / SECONDS_PER_HOUR
    drift = model.drift
    if isinstance(drift, RandomWalk):
        sd = drift.step_sd_per_hour * math.sqrt(hold * interval_len / SECONDS_PER_HOUR)
        steps = rng.normal(0.0, sd, size=n_steps)
        steps[0] = 0.0
        rates = model.base_rate + np.cumsum(steps)
    elif isinstance(drift, Sinusoid):
        rates = model.base_rate + drift.amplitude * np.sin(2 * np.pi * t_hours / drift.period_hours)
    else:
        rates = np.full(n_steps, float(model.base_rate))
    rates = np.maximum(rates, model.clamp_min)
    return np.repeat(rates, hold)[:n_intervals]


def simulate_campaign_detail(config: SimConfig) -> tuple[CountSeries, np.ndarray, np.ndarray]:
    """Simulate a campaign; also return the per-interval dark and total rates."""
    rng = np.random.default_rng(config.seed)
    proto = config.protocol
    n = config.n_intervals
    dark = dark_rate_trace(config.dark, n, proto.interval_len, rng)
    block_parity = (np.arange(n) // proto.block_len) % 2 == 1
    is_open = block_parity != config.start_open
    total = dark + np.where(is_open, config.light_rate, config.flash_closed_rate)
    counts = rng.poisson(total * proto.interval_len)
    t = np.round(np.arange(n) * proto.interval_len).astype(np.int64)
    return CountSeries(t, is_open, counts), dark, total


def simulate_campaign(config: SimConfig) -> CountSeries:
    return simulate_campaign_detail(config)[0]


def estimate_q(closed_summary_b: SeriesSummary, closed_summary_m: SeriesSummary) -> float:
    """Ratio of mean closed-shutter count rates between two campaigns."""
    if closed_summary_b.mean <= 0 or closed_summary_m.mean <= 0:
        raise DomainError("closed-shutter mean count rates must be > 0")
    return closed_summary_b.mean / closed_summary_m.mean


# --- JSON configuration -------------------------------------------------

_SCHEMA: dict[str, Any] = {
    "dark": {
        "base_rate": float,
        "drift": {"kind": str, "step_sd_per_hour": float, "amplitude": float, "period_hours": float},
        "clamp_min": float,
        "hold_intervals": int,
    },
    "light_rate": float,
    "flash_closed_rate": float,
    "duration_hours": float,
    "protocol": {"block_len": int, "interval_len": float, "discard_first": bool},
    "seed": int,
    "start_open": bool,
}


def _line_of(text: str, key: str) -> int | None:
    if not text:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _check(obj: Any, schema: dict, path: str, text: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError("expected a JSON object", field=path or "<root>", line=_line_of(text, path.rsplit(".", 1)[-1]))
    for key, value in obj.items():
        fpath = f"{path}.{key}" if path else key
        line = _line_of(text, key)
        if key not in schema:
            raise ConfigError("unknown field", field=fpath, line=line)
        expected = schema[key]
        if isinstance(expected, dict):
            _check(value, expected, fpath, text)
            continue
        ok = (
            isinstance(value, bool)
            if expected is bool
            else (not isinstance(value, bool) and isinstance(value, int))
            if expected is int
            else (not isinstance(value, bool) and isinstance(value, (int, float)))
            if expected is float
            else isinstance(value, expected)
        )
        if not ok:
            raise ConfigError(f"expected {expected.__name__}, got {value!r}", field=fpath, line=line)


def config_from_dict(d: dict[str, Any], text: str = "") -> SimConfig:
    _check(d, _SCHEMA, "", text)
    if "duration_hours" not in d:
        raise ConfigError("required field missing", field="duration_hours")

    dark = dict(d.get("dark", {}))
    drift_d = dict(dark.pop("drift", {"kind": "none"}))
    kind = drift_d.pop("kind", "none")
    try:
        if kind == "none":
            if drift_d:
                raise ConfigError(f"drift kind 'none' takes no parameters, got {sorted(drift_d)}", field="dark.drift")
            drift: Drift = NoDrift()
        elif kind == "random_walk":
            drift = RandomWalk(**drift_d)
        elif kind == "sinusoid":
            drift = Sinusoid(**drift_d)
        else:
            raise ConfigError(f"unknown drift kind {kind!r}", field="dark.drift.kind", line=_line_of(text, "kind"))
    except TypeError as exc:
        raise ConfigError(str(exc), field="dark.drift", line=_line_of(text, "drift")) from exc

    def build(cls, kwargs, fpath):
        try:
            return cls(**kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc), field=fpath, line=_line_of(text, fpath.rsplit(".", 1)[-1])) from exc

    top = {k: v for k, v in d.items() if k not in ("dark", "protocol")}
    return build(
        SimConfig,
        dict(
            dark=build(DarkRateModel, dict(dark, drift=drift), "dark"),
            protocol=build(ShutterProtocol, d.get("protocol", {}), "protocol"),
            **top,
        ),
        "<root>",
    )


def load_config(path: str | Path) -> SimConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from exc
    return config_from_dict(d, text)
