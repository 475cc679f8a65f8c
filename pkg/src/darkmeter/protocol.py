"""Shuttered count series and the open-minus-closed difference distribution.

A campaign is recorded as consecutive fixed-length counting intervals grouped
into blocks of ``block_len`` intervals with the shutter alternately open and
closed.  The shutter moves during the first interval of each block, so that
interval is dropped.  Each remaining interval of an open block is paired with
the interval at the same within-block index of the adjacent closed block,
which cancels slow drifts of the detector dark rate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np
import pandas as pd

from .errors import EmptyResultError, FormatError, InsufficientDataError, StructureError

SECONDS_PER_HOUR = 3600
COUNTS_HEADER = ("t_start_s", "shutter", "counts")
DELTA_HEADER = "delta_cnt_per_s"


class Shutter(enum.Enum):
    OPEN = "O"
    CLOSED = "C"


@dataclass(frozen=True)
class CountInterval:
    t_start: int
    shutter: Shutter
    counts: int


@dataclass(frozen=True)
class ShutterProtocol:
    block_len: int = 10
    interval_len: float = 1.0
    discard_first: bool = True

    def __post_init__(self):
        if self.block_len < 1:
            raise ValueError("block_len must be >= 1")
        if self.discard_first and self.block_len < 2:
            raise ValueError("block_len must be >= 2 when the first interval is discarded")
        if not self.interval_len > 0:
            raise ValueError("interval_len must be > 0")

    @property
    def first_kept(self) -> int:
        return 1 if self.discard_first else 0

    @property
    def kept_per_block(self) -> int:
        return self.block_len - self.first_kept


@dataclass(frozen=True, eq=False)
class CountSeries:
    """Columnar record of a counting campaign.

    ``is_open`` is True for intervals measured with the shutter open.
    """

    t_start: np.ndarray
    is_open: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_start, dtype=np.int64)
        o = np.asarray(self.is_open, dtype=bool)
        c = np.asarray(self.counts, dtype=np.int64)
        if not (t.ndim == o.ndim == c.ndim == 1) or not (len(t) == len(o) == len(c)):
            raise ValueError("t_start, is_open and counts must be 1-D arrays of equal length")
        if np.any(c < 0):
            bad = int(np.flatnonzero(c < 0)[0])
            raise StructureError(f"negative count at interval {bad}", index=bad, t_start=int(t[bad]))
        steps = np.diff(t)
        if np.any(steps <= 0):
            bad = int(np.flatnonzero(steps <= 0)[0]) + 1
            raise StructureError(
                f"t_start not strictly increasing at interval {bad}", index=bad, t_start=int(t[bad])
            )
        for name, arr in (("t_start", t), ("is_open", o), ("counts", c)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_intervals(cls, intervals) -> CountSeries:
        intervals = list(intervals)
        return cls(
            t_start=np.array([iv.t_start for iv in intervals], dtype=np.int64),
            is_open=np.array([iv.shutter is Shutter.OPEN for iv in intervals], dtype=bool),
            counts=np.array([iv.counts for iv in intervals], dtype=np.int64),
        )

    @classmethod
    def from_blocks(cls, blocks, start_open: bool = True, interval_len: int = 1) -> CountSeries:
        """Build a series from consecutive blocks of counts, alternating shutter state."""
        counts, is_open = [], []
        state = start_open
        for block in blocks:
            counts.extend(block)
            is_open.extend([state] * len(block))
            state = not state
        t = np.arange(len(counts), dtype=np.int64) * int(interval_len)
        return cls(t, np.array(is_open, dtype=bool), np.array(counts, dtype=np.int64))

    def __len__(self) -> int:
        return len(self.counts)

    def __getitem__(self, i: int) -> CountInterval:
        return CountInterval(
            int(self.t_start[i]),
            Shutter.OPEN if self.is_open[i] else Shutter.CLOSED,
            int(self.counts[i]),
        )

    def __iter__(self) -> Iterator[CountInterval]:
        for i in range(len(self)):
            yield self[i]

    def equals(self, other: CountSeries) -> bool:
        return (
            np.array_equal(self.t_start, other.t_start)
            and np.array_equal(self.is_open, other.is_open)
            and np.array_equal(self.counts, other.counts)
        )


@dataclass(frozen=True, eq=False)
class DifferenceSeries:
    """Paired open-minus-closed differences in counts per second.

    ``pair_index`` numbers the open/closed block pair a sample came from and
    ``interval_index`` is the 1-based position inside the block.  ``t_pair``
    holds the pair's start time relative to the first interval of the
    campaign, which is what the hourly partition keys on.
    """

    samples: np.ndarray
    pair_index: np.ndarray
    interval_index: np.ndarray
    t_pair: np.ndarray
    open_counts: np.ndarray
    closed_counts: np.ndarray
    interval_len: float = 1.0
    span_s: float = 0.0

    @property
    def n(self) -> int:
        return len(self.samples)

    @property
    def pairing_index(self) -> np.ndarray:
        return np.column_stack([self.pair_index, self.interval_index])

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class HourlyStat:
    hour: int
    n: int
    mean: float
    sd: float
    partial: bool = False


@dataclass(frozen=True)
class SeriesSummary:
    mean: float
    variance: float
    n: int
    hourly: tuple[HourlyStat, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be >= 0")

    @classmethod
    def from_stats(cls, mean: float, variance: float, n: int) -> SeriesSummary:
        """Summary from published moments, without an hourly breakdown."""
        return cls(float(mean), float(variance), int(n))

    @property
    def sd(self) -> float:
        return float(np.sqrt(self.variance))

    @property
    def std_error(self) -> float:
        return float(np.sqrt(self.variance / self.n))


def _expected_open(n: int, block_len: int, start_open: bool) -> np.ndarray:
    block_parity = (np.arange(n) // block_len) % 2 == 1
    return block_parity != start_open


def build_differences(series: CountSeries, protocol: ShutterProtocol = ShutterProtocol()) -> DifferenceSeries:
    n = len(series)
    if n == 0:
        raise EmptyResultError("count series is empty")

    steps = np.diff(series.t_start)
    bad = np.flatnonzero(steps != protocol.interval_len)
    if bad.size:
        i = int(bad[0]) + 1
        raise StructureError(
            f"interval {i} starts {int(steps[bad[0]])} s after its predecessor, "
            f"expected {protocol.interval_len:g} s (missing or repeated interval)",
            index=i,
            t_start=int(series.t_start[i]),
        )

    bl = protocol.block_len
    start_open = bool(series.is_open[0])
    mismatch = np.flatnonzero(series.is_open != _expected_open(n, bl, start_open))
    if mismatch.size:
        i = int(mismatch[0])
        raise StructureError(
            f"shutter state at interval {i} (t_start={int(series.t_start[i])}) breaks the "
            f"alternating {bl}-interval block structure",
            index=i,
            t_start=int(series.t_start[i]),
        )

    n_pairs = n // (2 * bl)
    k0 = protocol.first_kept
    if n_pairs == 0 or protocol.kept_per_block == 0:
        raise EmptyResultError("no complete open/closed block pair in the series")

    blocks = series.counts[: n_pairs * 2 * bl].reshape(n_pairs, 2, bl)
    open_slot = 0 if start_open else 1
    open_c = blocks[:, open_slot, k0:]
    closed_c = blocks[:, 1 - open_slot, k0:]
    kept = bl - k0

    samples = ((open_c - closed_c) / protocol.interval_len).ravel()
    pair_index = np.repeat(np.arange(n_pairs), kept)
    interval_index = np.tile(np.arange(k0, bl) + 1, n_pairs)
    t0 = series.t_start[0]
    pair_start = series.t_start[: n_pairs * 2 * bl : 2 * bl] - t0
    return DifferenceSeries(
        samples=samples,
        pair_index=pair_index,
        interval_index=interval_index,
        t_pair=np.repeat(pair_start, kept),
        open_counts=open_c.ravel().copy(),
        closed_counts=closed_c.ravel().copy(),
        interval_len=float(protocol.interval_len),
        span_s=float(n_pairs * 2 * bl * protocol.interval_len),
    )


def _summarize_values(values: np.ndarray, t: np.ndarray, span_s: float) -> SeriesSummary:
    n = len(values)
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {n}")
    hours = (t // SECONDS_PER_HOUR).astype(np.int64)
    hourly = []
    # samples are time-ordered, so each hour is a contiguous run
    edges = np.flatnonzero(np.diff(hours)) + 1
    for chunk, hour_vals in zip(np.split(hours, edges), np.split(values, edges)):
        h = int(chunk[0])
        m = len(hour_vals)
        sd = float(np.std(hour_vals, ddof=1)) if m > 1 else float("nan")
        hourly.append(HourlyStat(h, m, float(np.mean(hour_vals)), sd, (h + 1) * SECONDS_PER_HOUR > span_s))
    return SeriesSummary(float(np.mean(values)), float(np.var(values, ddof=1)), n, tuple(hourly))


def summarize(diff: DifferenceSeries) -> SeriesSummary:
    """Unbiased mean and variance of the differences plus an hourly breakdown."""
    return _summarize_values(np.asarray(diff.samples, dtype=float), diff.t_pair, diff.span_s)


def shutter_summary(diff: DifferenceSeries, shutter: Shutter) -> SeriesSummary:
    """Summary of the retained open or closed count rates (cnt/s)."""
    counts = diff.open_counts if shutter is Shutter.OPEN else diff.closed_counts
    return _summarize_values(counts / diff.interval_len, diff.t_pair, diff.span_s)


def combine_hourly(hourly) -> tuple[float, float, int]:
    """Pool per-hour (n, mean, sd) into global (mean, unbiased variance, n)."""
    ns = np.array([h.n for h in hourly], dtype=float)
    means = np.array([h.mean for h in hourly])
    sds = np.nan_to_num(np.array([h.sd for h in hourly]))
    total = ns.sum()
    mean = float(np.sum(ns * means) / total)
    ss = np.sum((ns - 1) * sds**2) + np.sum(ns * (means - mean) ** 2)
    return mean, float(ss / (total - 1)), int(total)


def read_counts_csv(path: str | Path) -> CountSeries:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().strip()
    if tuple(h.strip() for h in header.split(",")) != COUNTS_HEADER:
        raise FormatError(f"expected header '{','.join(COUNTS_HEADER)}', got '{header}'", line=1)
    try:
        df = pd.read_csv(path, dtype={"t_start_s": "int64", "shutter": str, "counts": "int64"})
    except (ValueError, pd.errors.ParserError) as exc:
        raise FormatError(f"cannot parse {path}: {exc}") from exc
    shutter = df["shutter"].str.strip()
    bad = ~shutter.isin(["O", "C"])
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise FormatError(f"shutter must be O or C, got {shutter.iloc[row]!r}", line=row + 2)
    return CountSeries(
        df["t_start_s"].to_numpy(np.int64),
        (shutter == "O").to_numpy(),
        df["counts"].to_numpy(np.int64),
    )


def write_counts_csv(series: CountSeries, path: str | Path) -> None:
    df = pd.DataFrame(
        {
            "t_start_s": series.t_start,
            "shutter": np.where(series.is_open, "O", "C"),
            "counts": series.counts,
        }
    )
    df.to_csv(path, index=False, lineterminator="\n")


def write_differences_csv(diff: DifferenceSeries, path: str | Path) -> None:
    pd.DataFrame({DELTA_HEADER: diff.samples}).to_csv(
        path, index=False, lineterminator="\n", float_format="%.17g"
    )


def read_differences_csv(path: str | Path) -> np.ndarray:
    df = pd.read_csv(path)
    if list(df.columns) != [DELTA_HEADER]:
        raise FormatError(f"expected single column '{DELTA_HEADER}'", line=1)
    return df[DELTA_HEADER].to_numpy(float)
