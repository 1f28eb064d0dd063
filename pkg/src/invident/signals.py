"""Probing waveforms: sine, square and their logarithmic chirp variants on an
amplitude staircase."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .exceptions import ParameterError
from .series import SampledSeries

KINDS = ("sine", "square", "sine_chirp", "square_chirp")

# Tolerance used when counting staircase levels, so 0.22 / 0.001 counts 221.
_COUNT_TOL = 1e-9


@dataclass(frozen=True)
class ProbingSpec:
    """Excitation definition.

    The waveform oscillates with peak deviation ``depth`` around the current
    staircase level (or around ``bias`` when given). Each amplitude level is
    held for ``dwell`` seconds and the sweep phase restarts at every level.
    ``lam`` is carried for reporting only; ``(f0, f1, sweep_time)`` fully
    determine the sweep.
    """

    kind: str = "square_chirp"
    f0: float = 1.0
    f1: float = 5.0
    sweep_time: float = 5.0
    amp_start: float = 0.88
    amp_step: float = 0.01
    dwell: float = 15.0
    amp_end: float = 1.10
    fs: float = 10_000.0
    depth: float | None = None
    bias: float | None = None
    lam: float = 0.01

    def __post_init__(self):
        kind = self.kind.replace("-", "_")
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ParameterError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.f0 > 0:
            raise ParameterError("f0 > 0 violated")
        if not self.f1 >= self.f0:
            raise ParameterError("f1 >= f0 violated")
        if not self.sweep_time > 0:
            raise ParameterError("sweep_time > 0 violated")
        if not self.fs > 2 * self.f1:
            raise ParameterError(f"fs > 2*f1 (Nyquist) violated: fs={self.fs}, f1={self.f1}")
        if not self.dwell > 0:
            raise ParameterError("dwell > 0 violated")
        if not self.amp_step > 0:
            raise ParameterError("amp_step > 0 violated")
        if self.amp_end < self.amp_start - _COUNT_TOL:
            raise ParameterError("amp_end >= amp_start violated")
        if self.depth is not None and self.depth < 0:
            raise ParameterError("depth >= 0 violated")

    @property
    def effective_depth(self) -> float:
        return self.amp_step / 2 if self.depth is None else self.depth

    @property
    def n_levels(self) -> int:
        return int(math.floor((self.amp_end - self.amp_start) / self.amp_step + _COUNT_TOL)) + 1

    @property
    def duration(self) -> float:
        return self.n_levels * self.dwell

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ProbingSpec":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ParameterError(f"unknown probing fields: {sorted(unknown)}")
        return cls(**d)


def staircase_schedule(spec: ProbingSpec) -> list[tuple[float, float]]:
    """``(start_time, level)`` pairs: ``amp_start + k*amp_step`` from ``k*dwell``."""
    return [
        (k * spec.dwell, round(spec.amp_start + k * spec.amp_step, 12))
        for k in range(spec.n_levels)
    ]


def sweep_phase(tau, f0: float, f1: float, sweep_time: float):
    """Exponential-sweep phase (rad) at time ``tau`` since the sweep started.

    Past ``sweep_time`` the frequency holds at ``f1``.
    """
    tau = np.asarray(tau, dtype=float)
    ratio = f1 / f0
    if ratio == 1.0:
        return 2 * np.pi * f0 * tau
    k = math.log(ratio)
    within = np.minimum(tau, sweep_time)
    phase = 2 * np.pi * f0 * sweep_time / k * (np.exp(k * within / sweep_time) - 1.0)
    return phase + 2 * np.pi * f1 * np.maximum(tau - sweep_time, 0.0)


def instantaneous_frequency(tau, f0: float, f1: float, sweep_time: float):
    tau = np.minimum(np.asarray(tau, dtype=float), sweep_time)
    return f0 * (f1 / f0) ** (tau / sweep_time)


def generate(spec: ProbingSpec) -> SampledSeries:
    """Sample the probing signal described by ``spec``.

    Returns channels ``time``, ``amplitude_level`` (the oscillation centre)
    and ``excitation``. Output is a pure function of ``spec``.
    """
    n = int(round(spec.duration * spec.fs))
    dt = 1.0 / spec.fs
    t = np.arange(n) * dt
    idx = np.minimum((t / spec.dwell + _COUNT_TOL).astype(np.int64), spec.n_levels - 1)
    levels = np.array([lvl for _, lvl in staircase_schedule(spec)])
    tau = t - idx * spec.dwell
    if spec.kind.endswith("chirp"):
        phase = sweep_phase(tau, spec.f0, spec.f1, spec.sweep_time)
    else:
        phase = 2 * np.pi * spec.f0 * tau
    wave = np.sin(phase)
    if spec.kind.startswith("square"):
        wave = np.where(wave >= 0, 1.0, -1.0)
    centre = levels[idx] if spec.bias is None else np.full(n, float(spec.bias))
    excitation = centre + spec.effective_depth * wave
    return SampledSeries(
        t0=0.0,
        dt=dt,
        channels={"time": t, "amplitude_level": centre, "excitation": excitation},
        units={"time": "s", "amplitude_level": "p.u.", "excitation": "p.u."},
        meta={"probing": spec.to_dict()},
    )
