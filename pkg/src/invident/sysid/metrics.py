"""Goodness-of-fit and order-selection criteria."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from ..exceptions import DegreesOfFreedomError, MetricUndefinedError, ParameterError


def fitpercent(y, y_hat) -> tuple[float, float]:
    """Normalised RMSE and the derived fit percentage.

    ``nrmse = ||y - y_hat|| / ||y - mean(y)||`` and
    ``fitpercent = 100 * (1 - nrmse)``; the latter goes negative when
    ``y_hat`` does worse than predicting the mean.

    Raises
    ------
    MetricUndefinedError
        If ``y`` is constant.
    """
    y = np.asarray(y, dtype=float).ravel()
    y_hat = np.asarray(y_hat, dtype=float).ravel()
    if y.shape != y_hat.shape:
        raise ParameterError(f"length mismatch: {y.shape[0]} vs {y_hat.shape[0]}")
    if y.size < 2:
        raise ParameterError("need at least two samples")
    denom = np.linalg.norm(y - y.mean())
    if denom == 0 or not np.isfinite(denom):
        raise MetricUndefinedError("fitpercent undefined for a constant reference signal")
    nrmse = float(np.linalg.norm(y - y_hat) / denom)
    return nrmse, 100.0 * (1.0 - nrmse)


class Criteria(NamedTuple):
    afpe: float
    aicc: float
    bic: float
    adj_r2: float | None


def criteria(loss: float, n_params: int, n_samples: int, ss_tot: float | None = None) -> Criteria:
    """Information criteria from the mean squared residual ``loss``.

    AFPE = V (1 + d/N) / (1 - d/N)
    AICc = N ln V + 2d + 2d(d+1) / (N - d - 1)
    BIC  = N ln V + d ln N
    adjusted R^2 uses R^2 = 1 - N V / ss_tot and is ``None`` without ``ss_tot``.
    """
    V, d, N = float(loss), int(n_params), int(n_samples)
    if N <= d + 1:
        raise DegreesOfFreedomError(f"need N > d + 1 (N={N}, d={d})")
    if not V > 0:
        raise ParameterError(f"loss must be positive, got {V}")
    afpe = V * (1 + d / N) / (1 - d / N)
    aicc = N * math.log(V) + 2 * d + 2 * d * (d + 1) / (N - d - 1)
    bic = N * math.log(V) + d * math.log(N)
    adj = None
    if ss_tot is not None and ss_tot > 0:
        r2 = 1 - N * V / ss_tot
        adj = 1 - (1 - r2) * (N - 1) / (N - d - 1)
    return Criteria(afpe, aicc, bic, adj)
