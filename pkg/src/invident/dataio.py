"""Dataset ingestion and preprocessing.

CSV files carry one column per channel under a header row. A dataset is
reduced to per-level segments: synchronisation start-up removed, each
segment's settling transient dropped, moving-median filtered, de-meaned and
split chronologically into a training prefix and a test suffix.

Column layouts seen in practice (names are mapped through ``column_map``)::

    Volt-VAr, 9 columns : time, v_a, v_b, v_c, i_a, i_b, i_c, q, level
    Volt-Watt / Freq-Watt, 3 columns : time, input, output
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .exceptions import ConfigurationError, IngestionError, ParameterError, PipelineError
from .series import SampledSeries
from .signals import ProbingSpec, staircase_schedule

log = logging.getLogger(__name__)

DT_TOL = 1e-6
UNITS = ("pu", "volt", "hz")
DEFAULT_COLUMNS = {"time": "time", "input": "excitation", "output": "current", "level": "amplitude_level"}


@dataclass
class DatasetConfig:
    """How to read and cut a dataset.

    ``column_map`` names the CSV columns for ``time``, ``input``, ``output``
    and optionally ``level`` (the slow operating point). ``schedule`` is a
    :class:`ProbingSpec`, a list of ``(start_time, level)`` pairs, or
    ``None``; with ``None`` segments follow runs of the level channel, or
    the whole record is one segment. Schedule times are shifted by
    ``schedule_offset`` seconds. ``median_window`` counts samples.
    """

    column_map: dict = field(default_factory=lambda: dict(DEFAULT_COLUMNS))
    input_unit: str = "pu"
    voltage_base: float = 120.0 * math.sqrt(2.0)
    frequency_base: float = 60.0
    sync_trim: float = 110.0
    segment_transient_trim: float = 0.5
    median_window: int = 200
    split_fraction: float = 0.7
    schedule: object = None
    schedule_offset: float = 0.0

    def __post_init__(self):
        if self.input_unit not in UNITS:
            raise ConfigurationError(f"input_unit must be one of {UNITS}")
        if not 0 < self.split_fraction < 1:
            raise ConfigurationError("0 < split_fraction < 1 violated")
        if int(self.median_window) != self.median_window or self.median_window < 1:
            raise ConfigurationError("median_window must be an integer >= 1")
        self.median_window = int(self.median_window)
        if self.sync_trim < 0 or self.segment_transient_trim < 0:
            raise ConfigurationError("trims must be >= 0")
        if not (self.voltage_base > 0 and self.frequency_base > 0):
            raise ConfigurationError("unit bases must be positive")
        cmap = dict(DEFAULT_COLUMNS)
        cmap.update(self.column_map or {})
        self.column_map = cmap

    @property
    def unit_base(self) -> float:
        return {"pu": 1.0, "volt": self.voltage_base, "hz": self.frequency_base}[self.input_unit]

    def schedule_points(self) -> list[tuple[float, float]] | None:
        sched = self.schedule
        if sched is None:
            return None
        if isinstance(sched, ProbingSpec):
            pts = staircase_schedule(sched)
        elif isinstance(sched, dict):
            pts = staircase_schedule(ProbingSpec.from_dict(sched))
        else:
            pts = [(float(t), float(v)) for t, v in sched]
        return [(t + self.schedule_offset, v) for t, v in pts]

    def to_dict(self) -> dict:
        d = asdict(self)
        if isinstance(self.schedule, ProbingSpec):
            d["schedule"] = self.schedule.to_dict()
        elif self.schedule is not None and not isinstance(self.schedule, dict):
            d["schedule"] = [list(p) for p in self.schedule]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)


# -- CSV -------------------------------------------------------------------------------


def _numeric_column(df: pd.DataFrame, name: str) -> np.ndarray:
    try:
        # numpy's string parse is correctly rounded; pandas' fast path is not
        values = df[name].to_numpy(dtype=str).astype(float)
    except ValueError:
        values = None
    else:
        if np.all(np.isfinite(values)):
            return values
    col = pd.to_numeric(df[name], errors="coerce").to_numpy(dtype=float)
    bad = np.flatnonzero(~np.isfinite(col) if values is None else ~np.isfinite(values))
    # file line number: header is line 1
    raise IngestionError(f"non-numeric value {df[name].iloc[bad[0]]!r} in column {name!r}", row=int(bad[0]) + 2)


def load_csv(path, config: DatasetConfig | None = None) -> SampledSeries:
    """Read a CSV into a series with ``time``, ``input``, ``output`` (and ``level``).

    The input (and level) channel is divided by the configured unit base so
    it is in p.u.; ``dt`` comes from the time column, which must be uniform
    to within ``DT_TOL`` seconds.
    """
    config = config or DatasetConfig()
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"{path}: no such file")
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False)
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise IngestionError(f"{path}: cannot parse CSV ({exc})") from None
    cmap = config.column_map
    for role in ("time", "input", "output"):
        if cmap[role] not in df.columns:
            raise IngestionError(f"{path}: missing column {cmap[role]!r} (for {role})")
    t = _numeric_column(df, cmap["time"])
    if len(t) < 2:
        raise IngestionError(f"{path}: need at least two rows")
    steps = np.diff(t)
    dt = float((t[-1] - t[0]) / (len(t) - 1))
    off = np.flatnonzero(np.abs(steps - dt) > DT_TOL)
    if not dt > 0:
        raise IngestionError(f"{path}: time column is not increasing")
    if off.size:
        raise IngestionError(f"non-uniform time step {steps[off[0]]:.9g} s (expected {dt:.9g})", row=int(off[0]) + 3)
    base = config.unit_base
    chans = {
        "time": t[0] + dt * np.arange(len(t)),
        "input": _numeric_column(df, cmap["input"]) / base,
        "output": _numeric_column(df, cmap["output"]),
    }
    if cmap.get("level") and cmap["level"] in df.columns:
        chans["level"] = _numeric_column(df, cmap["level"]) / base
    return SampledSeries(float(t[0]), dt, chans, {"time": "s", "input": "p.u.", "output": "A"}, {"source": str(path)})


def save_csv(series: SampledSeries, path, columns: list[str] | None = None) -> None:
    """Write channels as CSV with shortest round-trip float formatting."""
    cols = columns or list(series.channels)
    df = pd.DataFrame({c: series[c] for c in cols})
    df.to_csv(path, index=False, lineterminator="\n")


# -- preprocessing ------------------------------------------------------------------------


def moving_median(x, window: int) -> np.ndarray:
    """Centred moving median; edge windows shrink to the available samples.

    Sample ``i`` uses ``x[i - w//2 : i + w - w//2]`` clipped to the record.
    """
    if window < 1:
        raise ParameterError("window must be >= 1")
    x = np.asarray(x, dtype=float)
    if window == 1 or x.size == 0:
        return x.copy()
    return pd.Series(x).rolling(window, center=True, min_periods=1).median().to_numpy()


@dataclass
class Segment:
    label: str
    level: float
    train: SampledSeries
    test: SampledSeries
    input_mean: float
    output_mean: float

    @property
    def experiment(self):
        return self.train["input"], self.train["output"]


@dataclass
class SegmentedDataset:
    segments: list[Segment]
    dt: float
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    @property
    def levels(self) -> np.ndarray:
        return np.array([s.level for s in self.segments])

    @property
    def span(self) -> tuple[float, float]:
        lv = self.levels
        return float(lv.min()), float(lv.max())

    def select(self, lo: float, hi: float, closed: bool = False, tol: float = 1e-9) -> list[Segment]:
        """Segments whose level lies in ``[lo, hi)`` (``[lo, hi]`` if ``closed``)."""
        out = []
        for s in self.segments:
            if s.level < lo - tol:
                continue
            if s.level < hi - tol or (closed and s.level <= hi + tol):
                out.append(s)
        return out


def _boundaries(series: SampledSeries, config: DatasetConfig, keep: np.ndarray):
    """Yield ``(start, stop, level)`` index ranges over the kept samples."""
    t = series.time
    pts = config.schedule_points()
    if pts is not None:
        # schedule times snap to samples with a relative slack
        edges = [p[0] - 1e-9 * max(1.0, abs(p[0])) for p in pts] + [np.inf]
        for k, (_, level) in enumerate(pts):
            idx = np.flatnonzero(keep & (t >= edges[k]) & (t < edges[k + 1]))
            if idx.size:
                yield idx[0], idx[-1] + 1, level
        return
    idx = np.flatnonzero(keep)
    if idx.size == 0:
        return
    if "level" in series:
        lv = series["level"][idx]
        cuts = np.flatnonzero(np.diff(lv) != 0) + 1
        edges = np.concatenate([[0], cuts, [idx.size]])
        for a, b in zip(edges[:-1], edges[1:]):
            yield idx[a], idx[b - 1] + 1, float(lv[a])
    else:
        yield idx[0], idx[-1] + 1, float(np.mean(series["input"][idx]))


def preprocess(series: SampledSeries, config: DatasetConfig | None = None) -> SegmentedDataset:
    """Trim, segment, filter, de-mean and split a raw record.

    Segments shorter than the transient trim plus the median window (or too
    short to split) are skipped with a warning.

    Raises
    ------
    PipelineError
        If the record is not longer than ``sync_trim`` or no segment survives.
    """
    config = config or DatasetConfig()
    for ch in ("input", "output"):
        if ch not in series:
            raise PipelineError(f"series has no {ch!r} channel")
    t = series.time
    if len(series) == 0 or t[-1] < config.sync_trim:
        raise PipelineError(f"record ({series.duration:.6g} s) not longer than sync_trim {config.sync_trim} s")
    keep = t >= config.sync_trim - 1e-12
    dt = series.dt
    n_trim = int(round(config.segment_transient_trim / dt))
    segments, skipped = [], []
    for k, (a, b, level) in enumerate(_boundaries(series, config, keep)):
        label = f"s{k:03d}"
        if b - a < n_trim + config.median_window or b - a - n_trim < 4:
            log.warning("segment %s at level %.6g skipped: %d samples", label, level, b - a)
            skipped.append(label)
            continue
        a += n_trim
        u = moving_median(series["input"][a:b], config.median_window)
        y = moving_median(series["output"][a:b], config.median_window)
        u_mean, y_mean = float(u.mean()), float(y.mean())
        n = b - a
        n_train = int(round(config.split_fraction * n))
        n_train = min(max(n_train, 2), n - 2)
        seg = SampledSeries(
            t0=series.t0 + a * dt,
            dt=dt,
            channels={"time": t[a:b], "input": u - u_mean, "output": y - y_mean},
            units={"time": "s", "input": "p.u.", "output": "A"},
        )
        segments.append(Segment(label, float(level), seg.slice(0, n_train), seg.slice(n_train), u_mean, y_mean))
    if not segments:
        raise PipelineError("no usable segments after preprocessing")
    return SegmentedDataset(segments, dt, {"skipped": skipped, "config": config.to_dict()})


def series_from_signal(signal: SampledSeries, output: np.ndarray | None = None, output_channel: str = "current") -> SampledSeries:
    """Re-key a generated/simulated series to the ``input``/``output``/``level`` layout."""
    chans = {"time": signal.time, "input": signal["excitation"]}
    out = output if output is not None else signal[output_channel]
    chans["output"] = np.asarray(out, dtype=float)
    if "amplitude_level" in signal:
        chans["level"] = signal["amplitude_level"]
    return SampledSeries(signal.t0, signal.dt, chans, {"time": "s", "input": "p.u.", "output": "A"}, dict(signal.meta))
