"""Uniformly sampled multi-channel time series."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParameterError

TIME_TOL = 1e-9


@dataclass
class SampledSeries:
    """Named, equal-length channels sampled every ``dt`` seconds from ``t0``.

    A ``"time"`` channel is optional; when present it must agree with
    ``t0 + k * dt``. ``meta`` carries free-form flags produced along the
    pipeline (clamp counts, stability warnings, ...).
    """

    t0: float
    dt: float
    channels: dict[str, np.ndarray]
    units: dict[str, str] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        chans = {k: np.asarray(v, dtype=float) for k, v in self.channels.items()}
        lengths = {len(v) for v in chans.values()}
        if len(lengths) > 1:
            raise ParameterError(f"channels have unequal lengths {sorted(lengths)}")
        self.channels = chans
        if "time" in chans and len(chans["time"]):
            expected = self.t0 + self.dt * np.arange(len(chans["time"]))
            if np.max(np.abs(chans["time"] - expected)) > TIME_TOL * max(1.0, abs(expected[-1])):
                raise ParameterError("time channel does not match t0 + k*dt")

    def __len__(self):
        if not self.channels:
            return 0
        return len(next(iter(self.channels.values())))

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]

    def __contains__(self, name: str) -> bool:
        return name in self.channels

    @property
    def time(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    @property
    def duration(self) -> float:
        return len(self) * self.dt

    def slice(self, start: int, stop: int | None = None) -> "SampledSeries":
        n = len(self)
        start = max(0, start)
        stop = n if stop is None else min(stop, n)
        chans = {k: v[start:stop].copy() for k, v in self.channels.items()}
        return SampledSeries(self.t0 + start * self.dt, self.dt, chans, dict(self.units), dict(self.meta))

    def with_channels(self, **new) -> "SampledSeries":
        chans = dict(self.channels)
        chans.update(new)
        return SampledSeries(self.t0, self.dt, chans, dict(self.units), dict(self.meta))

    @classmethod
    def concatenate(cls, parts: list["SampledSeries"]) -> "SampledSeries":
        """Join contiguous pieces (as produced by :meth:`slice`) back together."""
        if not parts:
            raise ParameterError("nothing to concatenate")
        first = parts[0]
        chans = {k: np.concatenate([p.channels[k] for p in parts]) for k in first.channels}
        return cls(first.t0, first.dt, chans, dict(first.units), dict(first.meta))
