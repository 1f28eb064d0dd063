"""Partitioned models: one transfer function per operating-point range.

``fit_fixed`` binds one model to every active region of a prescribed
scheme, fitted on a representative range. ``fit_adaptive`` bisects the
span until every range's model reaches a held-out fit threshold or the
range is one resolution step wide, then merges neighbours whose union still
passes.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gsf
from .dataio import Segment, SegmentedDataset
from .exceptions import (
    ConfigurationError,
    CoverageError,
    EmptyModelError,
    EstimationError,
    ModelError,
    ParameterError,
)
from .series import SampledSeries
from .sysid.estimate import FitReport
from .sysid.sweep import order_sweep
from .sysid.tf import ContinuousTF

log = logging.getLogger(__name__)

MODEL_VERSION = 1
GRID_TOL = 1e-9

SWEEP_KEYS = ("orders", "selector", "n_jobs", "f_max", "svf_bandwidth", "max_iter", "tol", "nuisance", "burn_in")


@dataclass
class RangeModel:
    """One modelled range ``[lo, hi)``; ``tf is None`` marks a hole."""

    lo: float
    hi: float
    tf: ContinuousTF | None = None
    report: FitReport | None = None
    label: str = ""
    note: str = ""

    @property
    def is_hole(self) -> bool:
        return self.tf is None

    def to_dict(self) -> dict:
        d = {"label": self.label, "lo": self.lo, "hi": self.hi}
        if self.tf is not None:
            d.update(self.tf.to_dict())
        d["fit"] = self.report.to_dict() if self.report is not None else None
        if self.note:
            d["note"] = self.note
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RangeModel":
        tf = ContinuousTF.from_dict(d) if "num" in d else None
        fit = d.get("fit")
        rep = FitReport.from_dict(fit) if fit else None
        return cls(float(d["lo"]), float(d["hi"]), tf, rep, d.get("label", ""), d.get("note", ""))


@dataclass
class PartitionedModel:
    """Ordered ranges tiling the modelled span.

    ``base`` holds unit bases of the data (``voltage_base``,
    ``frequency_base``); ``provenance`` records how the partition was made.
    """

    kind: str
    ranges: list[RangeModel]
    resolution: float | None = None
    base: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    curve: gsf.GsfCurve | None = None

    def __post_init__(self):
        if not self.ranges:
            raise EmptyModelError("partitioned model has no ranges")
        for r in self.ranges:
            if not r.hi > r.lo:
                raise ConfigurationError(f"range [{r.lo}, {r.hi}] is empty")
        for a, b in zip(self.ranges, self.ranges[1:]):
            if abs(a.hi - b.lo) > GRID_TOL:
                raise ConfigurationError(f"ranges [{a.lo}, {a.hi}] and [{b.lo}, {b.hi}] do not tile")

    @property
    def span(self) -> tuple[float, float]:
        return self.ranges[0].lo, self.ranges[-1].hi

    @property
    def holes(self) -> list[RangeModel]:
        return [r for r in self.ranges if r.is_hole]

    def locate(self, x: float) -> int:
        """Index of the range holding ``x`` (closed-left, last range closed)."""
        lo, hi = self.span
        if not (lo - GRID_TOL <= x <= hi + GRID_TOL):
            raise CoverageError(f"x={x} outside model span [{lo}, {hi}]", hole=(lo, hi))
        for i, r in enumerate(self.ranges):
            if x < r.hi - GRID_TOL:
                return i
        return len(self.ranges) - 1

    def to_dict(self) -> dict:
        return {
            "version": MODEL_VERSION,
            "gsf": {
                "kind": self.kind,
                "curve": gsf.curve_to_dict(self.curve) if self.curve is not None else None,
            },
            "base": dict(self.base),
            "resolution": self.resolution,
            "provenance": self.provenance,
            "ranges": [r.to_dict() for r in self.ranges],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PartitionedModel":
        if d.get("version") != MODEL_VERSION:
            raise ModelError(f"unsupported model file version {d.get('version')!r}")
        g = d.get("gsf") or {}
        curve = gsf.curve_from_dict(g["curve"]) if g.get("curve") else None
        return cls(
            kind=g.get("kind", ""),
            ranges=[RangeModel.from_dict(r) for r in d["ranges"]],
            resolution=d.get("resolution"),
            base=dict(d.get("base", {})),
            provenance=d.get("provenance", {}),
            curve=curve,
        )


def dumps_model(model: PartitionedModel) -> str:
    return json.dumps(model.to_dict(), indent=2) + "\n"


def save_model(model: PartitionedModel, path) -> None:
    Path(path).write_text(dumps_model(model))


def load_model(path) -> PartitionedModel:
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read model file {path}: {exc}") from None
    try:
        return PartitionedModel.from_dict(d)
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed model file {path}: {exc}") from None


# -- fitting --------------------------------------------------------------------------


def _sweep_options(options: dict) -> dict:
    unknown = set(options) - set(SWEEP_KEYS)
    if unknown:
        raise ParameterError(f"unknown sweep options: {sorted(unknown)}")
    return dict(options)


def _fit_segments(segs: list[Segment], dt: float, options: dict):
    """Order-swept model on ``segs`` with the operating point attached."""
    res = order_sweep([s.train for s in segs], [s.test for s in segs], dt=dt, **options)
    tf = res.tf.with_offsets(
        input_mean=float(np.mean([s.input_mean for s in segs])),
        output_mean=float(np.mean([s.output_mean for s in segs])),
    )
    return tf, res.report


def _representative(ranges, data: SegmentedDataset, choice, closed_hi):
    n = len(ranges)
    if choice is None:
        first = math.ceil(n / 2) - 1
    elif isinstance(choice, str):
        labels = [r.label for r in ranges]
        if choice not in labels:
            raise ConfigurationError(f"representative range {choice!r} not in region")
        first = labels.index(choice)
    else:
        first = int(choice)
    # preferred range first, then the others by distance from it
    order = sorted(range(n), key=lambda j: (abs(j - first), j))
    for j in order:
        r = ranges[j]
        segs = data.select(r.lo, r.hi, closed=closed_hi and j == n - 1)
        if segs:
            if j != first:
                log.warning("range %s has no data; using %s instead", ranges[first].label, r.label)
            return r, segs
    return None, []


def fit_fixed(
    scheme: gsf.RegionScheme,
    data: SegmentedDataset,
    representative: dict | None = None,
    curve: gsf.GsfCurve | None = None,
    base: dict | None = None,
    **options,
) -> PartitionedModel:
    """One model per active region, fitted on its representative range.

    ``representative`` maps a region label to a range label or index; the
    default is the middle range (the first of the two middle ones for an
    even count). Inactive regions, and active regions without data, are
    kept as holes.
    """
    options = _sweep_options(options)
    if not any(scheme.active_flags):
        raise EmptyModelError("every region of the scheme is inactive")
    representative = representative or {}
    ranges, used = [], {}
    last = len(scheme.regions) - 1
    for i, (region, rngs, active) in enumerate(zip(scheme.regions, scheme.ranges, scheme.active_flags)):
        if not active:
            ranges.append(RangeModel(region.lo, region.hi, None, None, region.label, "inactive"))
            continue
        rep, segs = _representative(rngs, data, representative.get(region.label), i == last)
        if rep is None:
            log.warning("region %s has no usable data; omitted", region.label)
            ranges.append(RangeModel(region.lo, region.hi, None, None, region.label, "no data"))
            continue
        try:
            tf, report = _fit_segments(segs, data.dt, options)
        except EstimationError as exc:
            log.warning("region %s could not be fitted (%s); omitted", region.label, exc)
            ranges.append(RangeModel(region.lo, region.hi, None, None, region.label, "fit failed"))
            continue
        used[region.label] = rep.label
        ranges.append(RangeModel(region.lo, region.hi, tf, report, region.label))
    if all(r.is_hole for r in ranges):
        raise EmptyModelError("no region could be fitted")
    return PartitionedModel(
        kind=curve.kind if curve is not None else "",
        ranges=ranges,
        resolution=None,
        base=dict(base or {}),
        provenance={"method": "fixed", "representative": used, "sweep": _jsonable(options)},
        curve=curve,
    )


def _snap(x: float, anchor: float, resolution: float) -> float:
    return anchor + math.floor((x - anchor) / resolution + 0.5) * resolution


def _on_grid(x: float, anchor: float, resolution: float) -> float:
    # round to the grid and to 12 decimals so boundaries print cleanly
    return round(_snap(x, anchor, resolution), 12)


def fit_adaptive(
    data: SegmentedDataset,
    threshold: float = 90.0,
    resolution: float = 0.01,
    span: tuple[float, float] | None = None,
    merge: bool = True,
    curve: gsf.GsfCurve | None = None,
    base: dict | None = None,
    **options,
) -> PartitionedModel:
    """Bisect ``span`` until every range's model passes ``threshold``.

    A range passes when the worst held-out fit over its segments is at
    least ``threshold``. Ranges one ``resolution`` wide are accepted as
    they are; ranges without data become holes. Split points snap to the
    grid ``span[0] + k*resolution``. With ``merge`` on, adjacent passing
    ranges are then joined greedily (left to right) while their union still
    passes.
    """
    options = _sweep_options(options)
    if not 0 < threshold <= 100:
        raise ParameterError("threshold must be in (0, 100]")
    if not resolution > 0:
        raise ParameterError("resolution must be positive")
    lo, hi = span if span is not None else data.span
    lo, hi = float(lo), float(hi)
    if hi - lo < resolution - GRID_TOL:
        raise ParameterError(f"span width {hi - lo} is below the resolution {resolution}")
    cache: dict = {}

    def attempt(a, b):
        key = (round(a, 12), round(b, 12))
        if key not in cache:
            segs = data.select(a, b, closed=abs(b - hi) < GRID_TOL)
            if not segs:
                cache[key] = None
            else:
                try:
                    tf, rep = _fit_segments(segs, data.dt, options)
                except EstimationError as exc:
                    log.info("fit on [%g, %g] failed: %s", a, b, exc)
                    cache[key] = (None, None, False)
                else:
                    ok = rep.test_fitpercent is not None and rep.test_fitpercent >= threshold
                    cache[key] = (tf, rep, ok)
        return cache[key]

    def bisect(a, b):
        res = attempt(a, b)
        if res is None:
            return [RangeModel(a, b, None, None, note="no data")]
        tf, rep, ok = res
        mid = _on_grid(0.5 * (a + b), lo, resolution)
        if ok or b - a <= resolution + GRID_TOL or not (a + GRID_TOL < mid < b - GRID_TOL):
            if tf is None:
                return [RangeModel(a, b, None, None, note="fit failed")]
            return [RangeModel(a, b, tf, rep, note="" if ok else "below threshold")]
        return bisect(a, mid) + bisect(mid, b)

    ranges = bisect(lo, hi)
    if merge:
        ranges = _merge(ranges, attempt)
    for k, r in enumerate(ranges):
        r.label = f"p{k + 1:02d}"
    if all(r.is_hole for r in ranges):
        raise EmptyModelError("no data anywhere in the span")
    return PartitionedModel(
        kind=curve.kind if curve is not None else "",
        ranges=ranges,
        resolution=resolution,
        base=dict(base or {}),
        provenance={
            "method": "adaptive",
            "threshold": threshold,
            "resolution": resolution,
            "span": [lo, hi],
            "merge": merge,
            "sweep": _jsonable(options),
        },
        curve=curve,
    )


def _merge(ranges, attempt):
    out = [ranges[0]]
    for r in ranges[1:]:
        prev = out[-1]
        if not (prev.is_hole or r.is_hole or prev.note or r.note):
            res = attempt(prev.lo, r.hi)
            if res is not None and res[2]:
                out[-1] = RangeModel(prev.lo, r.hi, res[0], res[1])
                continue
        out.append(r)
    return out


def _jsonable(options: dict) -> dict:
    out = {}
    for k, v in options.items():
        if k == "orders" and v is not None:
            out[k] = [list(o) for o in v]
        else:
            out[k] = v
    return out


# -- using a model ---------------------------------------------------------------------


def _range_segments(model: PartitionedModel, data: SegmentedDataset, idx: int) -> list[Segment]:
    r = model.ranges[idx]
    return data.select(r.lo, r.hi, closed=idx == len(model.ranges) - 1)


def adjust_dc_gain(model: PartitionedModel, reference: SegmentedDataset) -> PartitionedModel:
    """Refit each covered range's ``dc_gain_adjust`` to reference data.

    For range ``r`` with segments ``k``, ``alpha = sum <y_k, g_k> / sum <g_k, g_k>``
    where ``g_k`` is the unadjusted model response to the segment's
    (mean-removed) input and ``y_k`` the segment's output. The base model is
    used, so repeating the adjustment gives the same ``alpha``.
    """
    ranges = []
    for i, r in enumerate(model.ranges):
        segs = _range_segments(model, reference, i) if not r.is_hole else []
        if not segs:
            ranges.append(r)
            continue
        num = den = 0.0
        for s in segs:
            u = np.concatenate([s.train["input"], s.test["input"]])
            y = np.concatenate([s.train["output"], s.test["output"]])
            g = r.tf.deviation_response(u, reference.dt)
            num += float(y @ g)
            den += float(g @ g)
        if den == 0 or not np.isfinite(den):
            log.warning("range [%g, %g]: model response is zero, adjustment skipped", r.lo, r.hi)
            ranges.append(r)
            continue
        alpha = num / den
        ranges.append(RangeModel(r.lo, r.hi, r.tf.with_offsets(dc_gain_adjust=alpha), r.report, r.label, r.note))
    prov = dict(model.provenance)
    prov["dc_gain_adjusted"] = True
    return PartitionedModel(model.kind, ranges, model.resolution, dict(model.base), prov, model.curve)


def _channel(series: SampledSeries, names):
    for n in names:
        if n in series:
            return n
    return None


def respond(model: PartitionedModel, series: SampledSeries) -> SampledSeries:
    """Model output for an input series.

    The range is chosen per sample from the level channel (``amplitude_level``
    or ``level``; the input itself when neither exists). Each stretch spent
    in one range starts at rest for its first input value. Levels outside the
    span are clamped and counted in ``meta["clamped"]``.

    Raises
    ------
    CoverageError
        If any sample falls in a range without a model.
    """
    uname = _channel(series, ("excitation", "input"))
    if uname is None:
        raise ParameterError("series has neither an 'excitation' nor an 'input' channel")
    u = series[uname]
    lname = _channel(series, ("amplitude_level", "level"))
    level = series[lname] if lname else u
    lo, hi = model.span
    clamped = int(np.count_nonzero((level < lo - GRID_TOL) | (level > hi + GRID_TOL)))
    x = np.clip(level, lo, hi)
    uniq, inverse = np.unique(x, return_inverse=True)
    idx = np.array([model.locate(float(v)) for v in uniq], dtype=int)[inverse] if len(x) else np.zeros(0, int)
    for i in np.unique(idx):
        r = model.ranges[i]
        if r.is_hole:
            raise CoverageError(f"input enters uncovered range [{r.lo}, {r.hi}] ({r.note or 'hole'})", hole=(r.lo, r.hi))
    y = np.empty_like(u)
    cuts = np.flatnonzero(np.diff(idx)) + 1
    for a, b in zip(np.r_[0, cuts], np.r_[cuts, len(u)]):
        if b <= a:
            continue
        tf = model.ranges[idx[a]].tf
        y[a:b] = tf.response(u[a:b], series.dt, initial="equilibrium")
    if clamped:
        log.warning("%d samples outside the model span were clamped", clamped)
    chans = {"time": series.time, "input": u.copy(), "output": y}
    if lname:
        chans["level"] = series[lname].copy()
    meta = {"clamped": clamped, "ranges": sorted({model.ranges[i].label for i in np.unique(idx)})}
    return SampledSeries(series.t0, series.dt, chans, {"time": "s", "input": "p.u.", "level": "p.u.", "output": "A"}, meta)


def step_series(start: float, stop: float, dt: float, duration: float, step_time: float | None = None) -> SampledSeries:
    """Step from ``start`` to ``stop`` p.u. with the level held at the midpoint.

    Holding the level at the midpoint keeps a step between two boundaries
    inside the range it is meant to exercise.
    """
    if not (dt > 0 and duration > 0):
        raise ParameterError("dt and duration must be positive")
    n = int(round(duration / dt))
    t = np.arange(n) * dt
    t_step = duration / 10 if step_time is None else step_time
    u = np.where(t >= t_step - 1e-12, stop, start).astype(float)
    level = np.full(n, 0.5 * (start + stop))
    return SampledSeries(0.0, dt, {"time": t, "excitation": u, "amplitude_level": level})
