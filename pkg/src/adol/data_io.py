"""Hourly load-series ingestion, synthesis, splitting, and normalization.

CSV files carry a header row with an ISO-8601 timestamp column plus
named numeric columns; a mapping dict adapts foreign headers (for
example a public dataset's own column names) to the canonical
timestamp/load names.  Gaps in the hourly grid fail ingestion by
default; short gaps can be linearly interpolated on request.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

HOUR = np.timedelta64(1, "h")


class ParseError(ValueError):
    """Malformed file; the message pinpoints row and column."""


class NonMonotonicTime(ParseError):
    """Timestamps are not strictly increasing."""


class TimeGapError(ParseError):
    """Missing hours in the series; .missing_hours lists them."""

    def __init__(self, message, missing_hours):
        super().__init__(message)
        self.missing_hours = missing_hours


@dataclass
class RawSeries:
    timestamps: np.ndarray  # datetime64, hourly, strictly increasing
    load: np.ndarray
    extras: dict = field(default_factory=dict)
    filled_hours: list = field(default_factory=list)

    def __len__(self):
        return self.timestamps.size


def find_gaps(timestamps):
    """Missing hourly stamps between consecutive entries."""
    gaps = []
    deltas = np.diff(timestamps)
    for i, d in enumerate(deltas):
        steps = int(d / HOUR)
        for k in range(1, steps):
            gaps.append(timestamps[i] + k * HOUR)
    return gaps


def ingest_csv(path, schema=None, interpolate_gaps=False):
    """Parse an hourly series.

    schema maps canonical names to file headers, e.g.
    {"timestamp": "datetime", "load": "nat_demand", "extras": ["T2M_toc"]};
    None means the canonical names themselves with every other numeric
    column ingested as an extra.

    Raises ParseError (row/column pinpointed), NonMonotonicTime, or
    TimeGapError; with interpolate_gaps=True, gaps of at most three
    hours are filled linearly and reported in .filled_hours.
    """
    ts_col = (schema or {}).get("timestamp", "timestamp")
    load_col = (schema or {}).get("load", "load")
    with open(path, newline="") as fh:
        reader = csv.reader(row for row in fh if not row.startswith("#"))
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file")
        header = [h.strip() for h in header]
        for required in (ts_col, load_col):
            if required not in header:
                raise ParseError(f"{path}: missing column {required!r}")
        if schema and "extras" in schema:
            extra_cols = list(schema["extras"])
            for c in extra_cols:
                if c not in header:
                    raise ParseError(f"{path}: missing column {c!r}")
        else:
            extra_cols = [c for c in header if c not in (ts_col, load_col)]
        idx = {c: header.index(c) for c in [ts_col, load_col] + extra_cols}

        stamps, loads = [], []
        extras = {c: [] for c in extra_cols}
        for rownum, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                stamps.append(np.datetime64(row[idx[ts_col]].strip()))
            except ValueError:
                raise ParseError(
                    f"{path}:{rownum}: bad timestamp {row[idx[ts_col]]!r}"
                )
            for col, dest in [(load_col, loads)] + [
                (c, extras[c]) for c in extra_cols
            ]:
                cell = row[idx[col]].strip()
                try:
                    dest.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}:{rownum}: column {col!r} is not numeric: {cell!r}"
                    )

    if not stamps:
        raise ParseError(f"{path}: no data rows")
    timestamps = np.array(stamps, dtype="datetime64[s]")
    if np.any(np.diff(timestamps) <= np.timedelta64(0, "s")):
        raise NonMonotonicTime(f"{path}: timestamps are not strictly increasing")
    load = np.asarray(loads, dtype=float)
    if np.any(load <= 0):
        bad = int(np.argmax(load <= 0))
        raise ParseError(f"{path}: nonpositive load at {timestamps[bad]}")

    gaps = find_gaps(timestamps)
    filled = []
    if gaps:
        if not interpolate_gaps:
            raise TimeGapError(
                f"{path}: {len(gaps)} missing hour(s), first at {gaps[0]}", gaps
            )
        widths = np.diff(timestamps) / HOUR
        if np.any(widths > 4):
            raise TimeGapError(
                f"{path}: gap longer than 3 hours cannot be interpolated", gaps
            )
        full = np.arange(timestamps[0], timestamps[-1] + HOUR, HOUR)
        base = timestamps.astype("datetime64[s]").astype(float)
        grid = full.astype("datetime64[s]").astype(float)
        load = np.interp(grid, base, load)
        extras = {
            c: np.interp(grid, base, np.asarray(v, dtype=float))
            for c, v in extras.items()
        }
        filled = gaps
        timestamps = full.astype("datetime64[s]")
    else:
        extras = {c: np.asarray(v, dtype=float) for c, v in extras.items()}

    return RawSeries(timestamps, load, extras, filled)


def export_csv(series, path):
    """Inverse of ingest_csv for well-formed series (lossless round trip)."""
    extra_cols = sorted(series.extras)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "load"] + extra_cols)
        for i in range(len(series)):
            row = [
                np.datetime_as_string(series.timestamps[i], unit="s"),
                repr(float(series.load[i])),
            ]
            row += [repr(float(series.extras[c][i])) for c in extra_cols]
            writer.writerow(row)


def typical_profile(series, window=None, mode="scalar"):
    """Typical load: the mean over a window.

    mode "scalar" gives one number; "hour_of_day" gives a 24-vector of
    per-hour means.  window is an optional (start, end) timestamp pair,
    end exclusive.
    """
    mask = np.ones(len(series), dtype=bool)
    if window is not None:
        start, end = (np.datetime64(w) for w in window)
        mask = (series.timestamps >= start) & (series.timestamps < end)
    if not mask.any():
        raise ValueError("window selects no samples")
    loads = series.load[mask]
    if mode == "scalar":
        return float(loads.mean())
    if mode == "hour_of_day":
        hours = (
            series.timestamps[mask].astype("datetime64[h]")
            - series.timestamps[mask].astype("datetime64[D]")
        ).astype(int)
        out = np.zeros(24)
        for h in range(24):
            sel = hours == h
            if not sel.any():
                raise ValueError(f"window has no samples for hour {h}")
            out[h] = loads[sel].mean()
        return out
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class SynthSpec:
    """Synthetic hourly load: a base level with daily and weekly cycles
    plus Gaussian noise (amplitudes as fractions of base, noise in MW)."""

    base: float = 1000.0
    daily_amplitude: float = 0.15
    weekly_amplitude: float = 0.05
    noise_std: float = 20.0
    phase: float = -np.pi / 2  # daily trough in the early morning
    start: str = "2015-01-01T00:00"
    hours: int = 24 * 400


def synthesize(spec, seed=0):
    """load(t) = base*(1 + a_d*sin(2*pi*t/24 + phase) + a_w*sin(2*pi*t/168))
    + noise; deterministic under seed."""
    rng = np.random.default_rng(seed)
    t = np.arange(spec.hours, dtype=float)
    load = spec.base * (
        1.0
        + spec.daily_amplitude * np.sin(2 * np.pi * t / 24.0 + spec.phase)
        + spec.weekly_amplitude * np.sin(2 * np.pi * t / 168.0)
    )
    if spec.noise_std > 0:
        load = load + rng.normal(0.0, spec.noise_std, size=spec.hours)
    if np.any(load <= 0):
        raise ValueError("synthesis produced nonpositive loads; lower the noise")
    start = np.datetime64(spec.start, "s")
    timestamps = start + np.arange(spec.hours) * HOUR
    return RawSeries(timestamps.astype("datetime64[s]"), load)


def split(series, boundary):
    """Split at a timestamp: train strictly before, test from it on."""
    boundary = np.datetime64(boundary)
    before = series.timestamps < boundary
    def take(mask):
        return RawSeries(
            series.timestamps[mask].copy(),
            series.load[mask].copy(),
            {k: v[mask].copy() for k, v in series.extras.items()},
        )
    return take(before), take(~before)


class MinMaxNormalizer:
    """Per-column min-max scaling; fit on the training split only and
    reuse the same statistics everywhere else."""

    def __init__(self):
        self.mins_ = None
        self.maxs_ = None

    def fit(self, values):
        values = np.atleast_2d(np.asarray(values, dtype=float))
        self.mins_ = values.min(axis=0)
        self.maxs_ = values.max(axis=0)
        return self

    def _check(self):
        if self.mins_ is None:
            raise RuntimeError("normalizer is not fitted")

    def transform(self, values):
        self._check()
        span = np.where(self.maxs_ > self.mins_, self.maxs_ - self.mins_, 1.0)
        return (np.asarray(values, dtype=float) - self.mins_) / span

    def inverse_transform(self, values):
        self._check()
        span = np.where(self.maxs_ > self.mins_, self.maxs_ - self.mins_, 1.0)
        return np.asarray(values, dtype=float) * span + self.mins_

    def to_dict(self):
        self._check()
        return {"mins": self.mins_.tolist(), "maxs": self.maxs_.tolist()}

    @classmethod
    def from_dict(cls, data):
        norm = cls()
        norm.mins_ = np.asarray(data["mins"], dtype=float)
        norm.maxs_ = np.asarray(data["maxs"], dtype=float)
        return norm
