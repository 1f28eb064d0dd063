"""Grid-support characteristic curves and their region/range schemes."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .exceptions import ClassificationError, ConfigurationError, ParameterError

CURVE_KINDS = ("volt_var", "volt_watt", "freq_watt")

# Boundary comparisons tolerate float noise from level arithmetic.
EDGE_TOL = 1e-9

FIXTURES = {
    "fsi_voltvar": "fsi_voltvar.json",
    "sma_voltwatt": "sma_voltwatt.json",
    "sma_freqwatt": "sma_freqwatt.json",
    "sim1p_voltvar": "sim1p_voltvar.json",
    "lvdn_voltvar": "lvdn_voltvar.json",
}


@dataclass(frozen=True)
class GsfCurve:
    """Piecewise-linear characteristic: x in p.u., y in kVA or kW."""

    kind: str
    x_breaks: tuple[float, ...]
    y_values: tuple[float, ...]
    y_rating: float = 1.0

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise ConfigurationError(f"unknown curve kind {self.kind!r}")
        x = tuple(float(v) for v in self.x_breaks)
        y = tuple(float(v) for v in self.y_values)
        object.__setattr__(self, "x_breaks", x)
        object.__setattr__(self, "y_values", y)
        if len(x) == 0:
            raise ConfigurationError("curve has no breakpoints")
        if len(x) != len(y):
            raise ConfigurationError("x_breaks and y_values differ in length")
        if any(b <= a for a, b in zip(x, x[1:])):
            raise ConfigurationError("x_breaks must be strictly increasing")
        if self.kind == "volt_var" and any(b > a for a, b in zip(y, y[1:])):
            raise ConfigurationError("volt_var setpoints must be non-increasing")
        if not self.y_rating > 0:
            raise ConfigurationError("y_rating must be positive")

    @property
    def span(self) -> tuple[float, float]:
        return self.x_breaks[0], self.x_breaks[-1]


def setpoint(curve: GsfCurve, x, flag: dict | None = None):
    """Interpolated setpoint at ``x`` (scalar or array).

    Points outside the breakpoint span are clamped; the number of clamped
    points is added to ``flag["clamped"]`` when a dict is passed.
    """
    if not curve.x_breaks:
        raise ConfigurationError("empty curve")
    xs = np.asarray(x, dtype=float)
    lo, hi = curve.span
    if flag is not None:
        flag["clamped"] = flag.get("clamped", 0) + int(np.count_nonzero((xs < lo) | (xs > hi)))
    y = np.interp(np.clip(xs, lo, hi), curve.x_breaks, curve.y_values)
    return float(y) if np.ndim(y) == 0 else y


def normalized_setpoint(curve: GsfCurve, x):
    return setpoint(curve, x) / curve.y_rating


@dataclass(frozen=True)
class Interval:
    label: str
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)


def uniform_ranges(region: Interval, n: int) -> list[Interval]:
    """Split ``region`` into ``n`` contiguous equal-width ranges."""
    if n < 1:
        raise ParameterError(f"range count must be >= 1, got {n}")
    edges = np.linspace(region.lo, region.hi, n + 1)
    edges[0], edges[-1] = region.lo, region.hi
    suffix = region.label[1:] if region.label.startswith("R") else region.label
    return [Interval(f"r{suffix}{j + 1}", float(edges[j]), float(edges[j + 1])) for j in range(n)]


def _locate(edges, x):
    # closed-left / open-right, last interval closed
    n = len(edges) - 1
    if x >= edges[-1] - EDGE_TOL:
        return n - 1
    for i in range(n):
        if x < edges[i + 1] - EDGE_TOL:
            return i
    return n - 1


@dataclass(frozen=True)
class RegionScheme:
    regions: tuple[Interval, ...]
    ranges: tuple[tuple[Interval, ...], ...]
    active_flags: tuple[bool, ...] = field(default=())

    def __post_init__(self):
        if not self.regions:
            raise ConfigurationError("scheme has no regions")
        flags = self.active_flags or tuple(True for _ in self.regions)
        object.__setattr__(self, "active_flags", tuple(bool(f) for f in flags))
        if not (len(self.regions) == len(self.ranges) == len(self.active_flags)):
            raise ConfigurationError("regions, ranges and active_flags must align")
        for a, b in zip(self.regions, self.regions[1:]):
            if abs(a.hi - b.lo) > EDGE_TOL:
                raise ConfigurationError(f"regions {a.label} and {b.label} do not tile")
        for reg, rngs in zip(self.regions, self.ranges):
            if not rngs:
                raise ConfigurationError(f"region {reg.label} has no ranges")
            if abs(rngs[0].lo - reg.lo) > EDGE_TOL or abs(rngs[-1].hi - reg.hi) > EDGE_TOL:
                raise ConfigurationError(f"ranges do not cover region {reg.label}")
            for a, b in zip(rngs, rngs[1:]):
                if abs(a.hi - b.lo) > EDGE_TOL:
                    raise ConfigurationError(f"ranges {a.label} and {b.label} do not tile")

    @classmethod
    def from_curve(cls, curve: GsfCurve, range_counts=None, active=None) -> "RegionScheme":
        """One region per breakpoint interval, each split into equal ranges."""
        x = curve.x_breaks
        if len(x) < 2:
            raise ConfigurationError("need at least two breakpoints to form a region")
        regions = tuple(Interval(f"R{i + 1}", x[i], x[i + 1]) for i in range(len(x) - 1))
        counts = list(range_counts) if range_counts is not None else [1] * len(regions)
        if len(counts) != len(regions):
            raise ConfigurationError("one range count per region required")
        ranges = tuple(tuple(uniform_ranges(r, c)) for r, c in zip(regions, counts))
        return cls(regions, ranges, tuple(active) if active is not None else ())

    @property
    def span(self) -> tuple[float, float]:
        return self.regions[0].lo, self.regions[-1].hi

    def region(self, label: str) -> Interval:
        for r in self.regions:
            if r.label == label:
                return r
        raise KeyError(label)

    def is_active(self, label: str) -> bool:
        return self.active_flags[[r.label for r in self.regions].index(label)]

    def classify(self, x: float) -> tuple[str, str]:
        return classify(self, x)


def classify(scheme: RegionScheme, x: float) -> tuple[str, str]:
    """Return ``(region label, range label)`` for operating point ``x``."""
    lo, hi = scheme.span
    if not (lo - EDGE_TOL <= x <= hi + EDGE_TOL) or math.isnan(x):
        nearest = scheme.regions[0] if x < lo else scheme.regions[-1]
        raise ClassificationError(
            f"x={x} outside scheme span [{lo}, {hi}] (nearest region {nearest.label})",
            nearest=nearest.label,
        )
    redges = [r.lo for r in scheme.regions] + [scheme.regions[-1].hi]
    i = _locate(redges, x)
    rngs = scheme.ranges[i]
    j = _locate([r.lo for r in rngs] + [rngs[-1].hi], x)
    return scheme.regions[i].label, rngs[j].label


def curve_from_dict(d: dict) -> GsfCurve:
    try:
        return GsfCurve(d["kind"], tuple(d["x_breaks"]), tuple(d["y_values"]), d.get("y_rating", 1.0))
    except KeyError as exc:
        raise ConfigurationError(f"curve definition missing field {exc}") from None


def curve_to_dict(curve: GsfCurve) -> dict:
    return {
        "kind": curve.kind,
        "x_breaks": list(curve.x_breaks),
        "y_values": list(curve.y_values),
        "y_rating": curve.y_rating,
    }


def _read_definition(source) -> dict:
    if isinstance(source, dict):
        return source
    name = str(source)
    if not Path(name).exists() and Path(name).stem in FIXTURES:
        name = Path(name).stem
    if name in FIXTURES:
        text = resources.files("invident.data").joinpath(FIXTURES[name]).read_text()
    else:
        text = Path(source).read_text()
    return json.loads(text)


def load_curve(source) -> GsfCurve:
    """Load a curve from a JSON path, a fixture name or an already-parsed dict."""
    return curve_from_dict(_read_definition(source))


def load_scheme(source) -> RegionScheme:
    """Region scheme from a curve definition's optional ``scheme`` block."""
    d = _read_definition(source)
    curve = curve_from_dict(d)
    block = d.get("scheme", {})
    return RegionScheme.from_curve(curve, block.get("range_counts"), block.get("active"))
