"""Zero-order-hold simulation of continuous-time rational systems.

Everything here works on *basis states*: for a monic denominator ``D(s)`` of
degree ``m`` and an input ``u`` held constant between samples, the basis
signals are the sampled responses of ``s**j / D(s)`` for ``j = 0..m-1``.
Any strictly proper ``N(s)/D(s)`` response is a linear combination of them,
which is what both the model simulation and the output-error Jacobian use.

The recursion runs in a frequency-scaled state basis so repeated poles (the
``1/A(s)**2`` system behind the Jacobian) and clustered poles close to
``z = 1`` at high sample rates stay well conditioned; a direct-form filter
of the same order would not.
"""

from __future__ import annotations

import numba
import numpy as np
from scipy import linalg


def _freq_scale(den: np.ndarray) -> float:
    # Cauchy-style root magnitude bound; keeps the scaled companion O(1).
    m = len(den) - 1
    mags = [abs(den[m - k]) ** (1.0 / (m - k)) for k in range(m) if den[m - k] != 0]
    scale = max(mags) if mags else 1.0
    return scale if scale > 0 else 1.0


def zoh_basis_matrices(den, dt: float):
    """Discretise the scaled controllable-canonical realisation of ``1/D(s)``.

    Returns ``(Ad, Bd, scales)`` such that the physical basis state
    ``x_j = scales[j] * xs_j`` where ``xs[k+1] = Ad @ xs[k] + Bd * u[k]``.
    """
    den = np.asarray(den, dtype=float)
    if den.ndim != 1 or len(den) < 2:
        raise ValueError("denominator must have degree >= 1")
    if den[0] != 1.0:
        den = den / den[0]
    m = len(den) - 1
    w = _freq_scale(den)
    # den is descending: den[m - j] multiplies s**j
    low = den[::-1][:m]
    M = np.zeros((m, m))
    M[np.arange(m - 1), np.arange(1, m)] = 1.0
    M[m - 1, :] = -low * w ** (np.arange(m) - m)
    F = w * M
    G = np.zeros(m)
    G[m - 1] = w
    aug = np.zeros((m + 1, m + 1))
    aug[:m, :m] = F * dt
    aug[:m, m] = G * dt
    E = linalg.expm(aug)
    scales = w ** (np.arange(m) - m)
    return E[:m, :m], E[:m, m], scales


@numba.njit(cache=True)
def _state_recursion(Ad, Bd, u, scales):
    # rows of the result are scaled states; column k is the state at sample k
    m = Ad.shape[0]
    n = u.shape[0]
    X = np.zeros((m, n))
    x = np.zeros(m)
    nxt = np.zeros(m)
    for k in range(n - 1):
        uk = u[k]
        for i in range(m):
            acc = Bd[i] * uk
            for j in range(m):
                acc += Ad[i, j] * x[j]
            nxt[i] = acc
        for i in range(m):
            x[i] = nxt[i]
            X[i, k + 1] = nxt[i] * scales[i]
    return X


@numba.njit(cache=True)
def _free_recursion(Ad, n, rtol):
    # rows of e_0^T Ad^k, k = 0..n-1; stops once every mode has decayed
    # below rtol of the peak row norm (rtol <= 0 never stops)
    m = Ad.shape[0]
    W = np.zeros((n, m))
    if n == 0:
        return W
    W[0, 0] = 1.0
    peak = 1.0
    for k in range(n - 1):
        norm = 0.0
        for j in range(m):
            acc = 0.0
            for i in range(m):
                acc += W[k, i] * Ad[i, j]
            W[k + 1, j] = acc
            norm += acc * acc
        if norm > peak:
            peak = norm
        if rtol > 0 and norm < rtol * rtol * peak and k > 4 * m:
            return W[: k + 2]
    return W


def free_response_basis(den, n: int, dt: float, rtol: float = 0.0) -> np.ndarray:
    """Sampled free (zero-input) responses spanning every mode of ``1/D(s)``.

    Returns an ``(n, m)`` array whose columns span the output free-response
    space of any observable realisation with denominator ``D``. With
    ``rtol > 0`` the array is cut short once all modes have decayed below
    that fraction of their peak; the omitted rows are numerically zero.
    """
    Ad, _, _ = zoh_basis_matrices(den, dt)
    with np.errstate(over="ignore", invalid="ignore"):
        return _free_recursion(np.ascontiguousarray(Ad), int(n), float(rtol))


def basis_response(den, u, dt: float) -> np.ndarray:
    """Sampled zero-state responses of ``s**j / D(s)`` to a ZOH input.

    Parameters
    ----------
    den : array_like
        Denominator coefficients, descending powers of ``s``.
    u : array_like
        Input samples (held constant over each sample period).
    dt : float
        Sample period in seconds.

    Returns
    -------
    ndarray, shape (m, len(u))
        Row ``j`` is the response of ``s**j / D(s)``; column ``k`` is the
        state at sample ``k`` (the first column is zero).
    """
    u = np.asarray(u, dtype=float)
    Ad, Bd, scales = zoh_basis_matrices(den, dt)
    return _state_recursion(np.ascontiguousarray(Ad), np.ascontiguousarray(Bd), np.ascontiguousarray(u), scales)


def strictly_proper_part(num, den):
    """Split ``N/D`` into ``(direct gain, remainder numerator)``.

    The remainder numerator is returned in ascending powers with length
    ``deg D`` so it lines up with the basis states.
    """
    num = np.atleast_1d(np.asarray(num, dtype=float))
    den = np.asarray(den, dtype=float)
    den = den / den[0]
    m = len(den) - 1
    num = np.trim_zeros(num, "f")
    if num.size == 0:
        return 0.0, np.zeros(m)
    if len(num) - 1 > m:
        raise ValueError("transfer function is improper")
    d = 0.0
    if len(num) - 1 == m:
        d = num[0]
        num = num - d * den
        num = num[1:]
    rem = np.zeros(m)
    asc = num[::-1]
    rem[: len(asc)] = asc
    return d, rem


def lsim_zoh(num, den, u, dt: float) -> np.ndarray:
    """Zero-state ZOH response of ``num(s)/den(s)`` (descending coefficients)."""
    u = np.asarray(u, dtype=float)
    d, rem = strictly_proper_part(num, den)
    X = basis_response(np.asarray(den, dtype=float) / den[0], u, dt)
    return d * u + rem @ X


def dc_gain(num, den) -> float:
    num = np.atleast_1d(np.asarray(num, dtype=float))
    den = np.asarray(den, dtype=float)
    if den[-1] == 0:
        return float("inf")
    return float(num[-1] / den[-1])


def is_stable(den) -> bool:
    den = np.trim_zeros(np.asarray(den, dtype=float), "f")
    if len(den) < 2:
        return True
    return bool(np.all(np.roots(den).real < 0))
