"""Surrogate plants that stand in for the inverter test rig.

Two modes. ``single_tf`` plays the input deviation through one transfer
function around a fixed operating point. ``piecewise`` classifies the slow
amplitude level against a GSF region scheme, anchors the output at the
curve's setpoint current for that region and adds the region's dynamics on
top. Both add seeded white Gaussian noise.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from . import gsf
from .exceptions import ConfigurationError, FixtureLookupError, ParameterError
from .series import SampledSeries
from .sysid.tf import ContinuousTF

log = logging.getLogger(__name__)

V_BASE = 120.0 * math.sqrt(2.0)

# Published per-region models of the 3-phase inverter (Volt-VAr test).
# Region 3 is the deadband and has no model.
_FIXTURES = {
    "R1": ((-511.5, 9.886e4), (1.0, 121.8, 7098.0)),
    "R2": ((-1667.0, 9.49e4), (1.0, 31.84, 456.3)),
    "R4a": ((-139.5, 402.4), (1.0, 110.2, 1785.0)),
    "R4b": ((-2017.0, 1.054e5), (1.0, 32.55, 484.9)),
    "R5": ((548.7, -1.193e5), (1.0, 187.8, 1.187e4)),
}
_DEACTIVATED = {"R3"}

FIXTURE_LABELS = tuple(_FIXTURES)


def published_fixture(label: str) -> ContinuousTF:
    """Published transfer function for a region label (R1, R2, R4a, R4b, R5)."""
    if label in _DEACTIVATED:
        raise FixtureLookupError(f"{label}: region deactivated, no transfer function")
    try:
        num, den = _FIXTURES[label]
    except KeyError:
        raise FixtureLookupError(f"unknown fixture {label!r}; known: {', '.join(FIXTURE_LABELS)}") from None
    return ContinuousTF(num, den, meta={"fixture": label})


paper_fixture = published_fixture  # original API name


def setpoint_current(curve: gsf.GsfCurve, x: float, v_base: float = V_BASE) -> float:
    """Output current (A) that delivers the curve setpoint at voltage ``x`` p.u."""
    return gsf.setpoint(curve, x) * 1000.0 / (v_base * x)


@dataclass(frozen=True)
class PlantSpec:
    """Plant definition.

    ``tfs`` maps labels to models. In ``single_tf`` mode it holds exactly one
    entry. In ``piecewise`` mode keys are range labels or region labels of
    ``scheme`` (range labels win); a region without a model is static.
    """

    mode: str = "single_tf"
    tfs: Mapping[str, ContinuousTF] = field(default_factory=dict)
    curve: gsf.GsfCurve | None = None
    scheme: gsf.RegionScheme | None = None
    gain_scale: float = 1.0
    noise: float = 0.0
    seed: int = 0
    v_base: float = V_BASE

    def __post_init__(self):
        if self.mode not in ("single_tf", "piecewise"):
            raise ConfigurationError(f"unknown plant mode {self.mode!r}")
        if not self.tfs and self.mode == "single_tf":
            raise ConfigurationError("single_tf plant needs one transfer function")
        if self.mode == "single_tf" and len(self.tfs) != 1:
            raise ConfigurationError("single_tf plant takes exactly one transfer function")
        for label, tf in self.tfs.items():
            if not tf.is_stable:
                raise ConfigurationError(f"plant model {label} is unstable")
        if self.mode == "piecewise":
            if self.curve is None:
                raise ConfigurationError("piecewise plant needs a curve")
            if self.scheme is None:
                object.__setattr__(self, "scheme", gsf.RegionScheme.from_curve(self.curve))
        if not self.noise >= 0:
            raise ParameterError("noise std must be >= 0")
        if not self.v_base > 0:
            raise ParameterError("v_base must be positive")

    @property
    def tf(self) -> ContinuousTF:
        return next(iter(self.tfs.values()))

    def model_for(self, region: str, rng_label: str) -> ContinuousTF | None:
        return self.tfs.get(rng_label, self.tfs.get(region))


def _runs(keys):
    # (start, stop) of maximal runs of equal consecutive keys
    out, start = [], 0
    for k in range(1, len(keys) + 1):
        if k == len(keys) or keys[k] != keys[start]:
            out.append((start, k))
            start = k
    return out


def _eq_response(tf: ContinuousTF, du, dt):
    # deviation response starting at rest for the entry value du[0]
    u0 = du[0]
    return tf.dc_gain * u0 + tf.deviation_response(du - u0, dt)


def simulate(plant: PlantSpec, series: SampledSeries) -> SampledSeries:
    """Drive ``plant`` with the ``excitation`` channel of ``series``.

    Returns the input channels plus ``current``. In piecewise mode the
    ``amplitude_level`` channel (or the excitation itself when absent)
    selects the range; the dynamic state restarts at equilibrium whenever
    the range changes. Levels outside the curve span are clamped and counted
    in ``meta["clamped"]``.
    """
    if "excitation" not in series:
        raise ParameterError("input series has no 'excitation' channel")
    u = series["excitation"]
    dt = series.dt
    meta = {"plant_mode": plant.mode, "clamped": 0, "seed": plant.seed}
    if len(u) == 0:
        y = np.zeros(0)
    elif plant.mode == "single_tf":
        tf = plant.tf
        y = tf.output_mean + plant.gain_scale * tf.dc_gain_adjust * _eq_response(tf, u - tf.input_mean, dt)
    else:
        y = _piecewise(plant, series, meta)
    if plant.noise > 0:
        rng = np.random.default_rng(plant.seed)
        y = y + plant.noise * rng.standard_normal(len(y))
    if meta["clamped"]:
        log.warning("%d samples outside the curve span were clamped", meta["clamped"])
    chans = {k: v.copy() for k, v in series.channels.items()}
    chans["current"] = y
    units = dict(series.units)
    units["current"] = "A"
    return SampledSeries(series.t0, dt, chans, units, {**series.meta, **meta})


def _piecewise(plant: PlantSpec, series: SampledSeries, meta: dict) -> np.ndarray:
    u = series["excitation"]
    level = series["amplitude_level"] if "amplitude_level" in series else u
    scheme = plant.scheme
    lo, hi = scheme.span
    flag = {}
    gsf.setpoint(plant.curve, level, flag)
    meta["clamped"] = flag["clamped"]
    x = np.clip(level, lo, hi)
    # classify once per distinct level; staircase inputs have few
    uniq, inverse = np.unique(x, return_inverse=True)
    labels = [gsf.classify(scheme, float(v)) for v in uniq]
    keys = [labels[i] for i in inverse]
    y = np.empty_like(u)
    for start, stop in _runs(keys):
        region_label, rng_label = keys[start]
        region = scheme.region(region_label)
        anchor = setpoint_current(plant.curve, region.lo, plant.v_base)
        tf = plant.model_for(region_label, rng_label)
        if tf is None:
            y[start:stop] = anchor
            continue
        du = u[start:stop] - region.lo
        y[start:stop] = anchor + plant.gain_scale * tf.dc_gain_adjust * _eq_response(tf, du, series.dt)
    return y


# -- plant spec files ---------------------------------------------------------------


def _tf_from_entry(entry) -> ContinuousTF:
    if isinstance(entry, str):
        return published_fixture(entry)
    if isinstance(entry, Mapping):
        if "fixture" in entry:
            tf = published_fixture(entry["fixture"])
            extra = {k: float(entry[k]) for k in ("input_mean", "output_mean", "dc_gain_adjust") if k in entry}
            return tf.with_offsets(**extra) if extra else tf
        try:
            return ContinuousTF.from_dict(entry)
        except KeyError as exc:
            raise ConfigurationError(f"transfer function entry missing {exc}") from None
    raise ConfigurationError(f"cannot read transfer function from {entry!r}")


def plant_from_dict(d: Mapping) -> PlantSpec:
    """Build a plant from a parsed spec file.

    ``{"mode": "single_tf", "fixture": "R1"}`` or
    ``{"mode": "piecewise", "curve": "fsi_voltvar", "tfs": {"R1": "R1", ...}}``;
    a ``tfs`` value is a fixture label or ``{"num": [...], "den": [...]}``.
    """
    mode = d.get("mode", "single_tf")
    if "fixture" in d:
        tfs = {d["fixture"]: _tf_from_entry(d["fixture"])}
    elif "tf" in d:
        tfs = {"tf": _tf_from_entry(d["tf"])}
    else:
        tfs = {k: _tf_from_entry(v) for k, v in d.get("tfs", {}).items()}
    curve = scheme = None
    if "curve" in d:
        curve = gsf.load_curve(d["curve"])
        scheme = gsf.load_scheme(d["curve"])
    return PlantSpec(
        mode=mode,
        tfs=tfs,
        curve=curve,
        scheme=scheme,
        gain_scale=float(d.get("gain_scale", 1.0)),
        noise=float(d.get("noise", 0.0)),
        seed=int(d.get("seed", 0)),
        v_base=float(d.get("v_base", V_BASE)),
    )


def load_plant(path) -> PlantSpec:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: not valid JSON ({exc})") from None
    return plant_from_dict(d)


def plant_to_dict(plant: PlantSpec) -> dict:
    out = {
        "mode": plant.mode,
        "tfs": {k: tf.to_dict() for k, tf in plant.tfs.items()},
        "gain_scale": plant.gain_scale,
        "noise": plant.noise,
        "seed": plant.seed,
        "v_base": plant.v_base,
    }
    if plant.curve is not None:
        out["curve"] = gsf.curve_to_dict(plant.curve)
    return out
