"""Continuous-time transfer functions with operating-point offsets."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import lti
from ..exceptions import ParameterError
from ..series import SampledSeries


@dataclass(frozen=True)
class ContinuousTF:
    """``num(s)/den(s)`` in descending powers, stored with a monic denominator.

    ``input_mean``/``output_mean`` are the operating point the model was
    identified around; ``dc_gain_adjust`` scales the deviation response.
    """

    num: tuple[float, ...]
    den: tuple[float, ...]
    input_mean: float = 0.0
    output_mean: float = 0.0
    dc_gain_adjust: float = 1.0
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        num = np.atleast_1d(np.asarray(self.num, dtype=float))
        den = np.trim_zeros(np.atleast_1d(np.asarray(self.den, dtype=float)), "f")
        if den.size == 0:
            raise ParameterError("denominator is zero")
        if num.size > 1:
            num = np.trim_zeros(num, "f")
            if num.size == 0:
                num = np.zeros(1)
        if num.size > den.size:
            raise ParameterError("transfer function must be proper")
        lead = den[0]
        object.__setattr__(self, "num", tuple(float(v) for v in num / lead))
        object.__setattr__(self, "den", tuple(float(v) for v in den / lead))

    @property
    def n_poles(self) -> int:
        return len(self.den) - 1

    @property
    def n_zeros(self) -> int:
        return len(self.num) - 1

    @property
    def dc_gain(self) -> float:
        """Static gain ``b0 / a0`` of the rational part (adjustment excluded)."""
        return lti.dc_gain(self.num, self.den)

    @property
    def poles(self) -> np.ndarray:
        return np.roots(self.den) if self.n_poles else np.array([])

    @property
    def zeros(self) -> np.ndarray:
        return np.roots(self.num) if self.n_zeros else np.array([])

    @property
    def is_stable(self) -> bool:
        return lti.is_stable(self.den)

    def with_offsets(self, **changes) -> "ContinuousTF":
        kw = dict(
            num=self.num,
            den=self.den,
            input_mean=self.input_mean,
            output_mean=self.output_mean,
            dc_gain_adjust=self.dc_gain_adjust,
            meta=dict(self.meta),
        )
        kw.update(changes)
        return ContinuousTF(**kw)

    def deviation_response(self, du, dt: float) -> np.ndarray:
        """Zero-state response to a deviation input, without offsets or adjustment."""
        if self.n_poles == 0:
            return self.num[-1] * np.asarray(du, dtype=float)
        return lti.lsim_zoh(self.num, self.den, du, dt)

    def response(self, u, dt: float, initial: str = "zero") -> np.ndarray:
        """Absolute output for absolute input ``u``.

        ``initial="zero"`` starts from the zero deviation state;
        ``"equilibrium"`` starts at rest for the constant input ``u[0]``.
        """
        u = np.asarray(u, dtype=float)
        if initial == "zero":
            dev = self.deviation_response(u - self.input_mean, dt)
        elif initial == "equilibrium":
            if u.size == 0:
                return u.copy()
            u0 = u[0]
            dev = self.dc_gain * (u0 - self.input_mean) + self.deviation_response(u - u0, dt)
        else:
            raise ParameterError(f"unknown initial condition {initial!r}")
        return self.output_mean + self.dc_gain_adjust * dev

    def to_dict(self) -> dict:
        return {
            "num": list(self.num),
            "den": list(self.den),
            "input_mean": self.input_mean,
            "output_mean": self.output_mean,
            "dc_gain_adjust": self.dc_gain_adjust,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ContinuousTF":
        return cls(
            tuple(d["num"]),
            tuple(d["den"]),
            float(d.get("input_mean", 0.0)),
            float(d.get("output_mean", 0.0)),
            float(d.get("dc_gain_adjust", 1.0)),
        )

    def __str__(self):
        def poly(c):
            n = len(c) - 1
            terms = []
            for i, v in enumerate(c):
                p = n - i
                s = f"{v:.4g}" + ("" if p == 0 else "s" if p == 1 else f"s^{p}")
                terms.append(s)
            return " + ".join(terms).replace("+ -", "- ")

        return f"({poly(self.num)}) / ({poly(self.den)})"


def _input_channel(series: SampledSeries) -> str:
    for name in ("input", "excitation"):
        if name in series:
            return name
    raise ParameterError("series has neither an 'input' nor an 'excitation' channel")


def simulate_tf(tf: ContinuousTF, series: SampledSeries, channel: str | None = None) -> SampledSeries:
    """Simulate ``tf`` on an input series, zero initial state, ZOH at the series dt.

    Returns a series with ``time``, ``input`` and ``output`` channels. An
    unstable ``tf`` is still simulated; the result carries ``meta["unstable"]``.
    """
    name = channel or _input_channel(series)
    u = series[name]
    with np.errstate(over="ignore", invalid="ignore"):
        y = tf.response(u, series.dt, initial="zero")
    meta = {"unstable": not tf.is_stable}
    return SampledSeries(
        series.t0,
        series.dt,
        {"time": series.time, "input": u.copy(), "output": y},
        {"time": "s", "input": "p.u.", "output": "A"},
        meta,
    )
