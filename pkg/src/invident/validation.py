"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

from .exceptions import ParameterError
from .series import SampledSeries


def check_signal(x, name: str = "signal", like=None) -> np.ndarray:
    """Return ``x`` as a finite 1-D float array.

    Accepts shape ``(n,)`` or ``(n, 1)``. With ``like`` given, the length
    must match it.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ParameterError(f"{name} must be 1-D or a single column, got shape {arr.shape}")
    try:
        arr = check_array(arr, ensure_2d=False, dtype=float, input_name=name)
    except ValueError as exc:
        raise ParameterError(str(exc)) from None
    if like is not None and len(arr) != len(like):
        raise ParameterError(f"{name} has {len(arr)} samples, expected {len(like)}")
    return arr


def _one(item, dt):
    if isinstance(item, SampledSeries):
        if dt is not None and abs(item.dt - dt) > 1e-12 * dt:
            raise ParameterError("experiments have different sample periods")
        u = check_signal(item["input"], "input")
        return (u, check_signal(item["output"], "output", like=u)), item.dt
    if isinstance(item, tuple) and len(item) == 2:
        u = check_signal(item[0], "input")
        return (u, check_signal(item[1], "output", like=u)), dt
    raise ParameterError(f"cannot interpret {type(item).__name__} as an experiment")


def as_experiments(data, dt: float | None = None):
    """Normalise training data to ``([(u, y), ...], dt)``.

    ``data`` may be a :class:`SampledSeries` with ``input``/``output``
    channels, a ``(u, y)`` tuple, or a list of either.
    """
    items = data if isinstance(data, list) else [data]
    if not items:
        raise ParameterError("no experiments given")
    out = []
    for item in items:
        pair, dt = _one(item, dt)
        out.append(pair)
    if dt is None or not dt > 0:
        raise ParameterError("sample period dt is required")
    return out, float(dt)
