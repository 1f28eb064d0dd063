"""Continuous-time transfer-function estimation from sampled data.

Two stages. A state-variable-filter (SVF) least-squares fit gives a starting
point: input and output pass through ``lam**n / (s + lam)**n`` to produce
filtered derivatives, and the differential equation is solved as a linear
regression. A Levenberg-Marquardt damped Gauss-Newton loop then minimises
the simulation (output-error) residual, with the model simulated exactly
under zero-order hold at the data sample period.

Data may consist of several independent experiments (segments); each is
simulated from zero initial state and the residuals are stacked. A record
cut from a longer run starts in an unknown state, so the first
``burn_in`` seconds of each experiment are simulated but not scored, and a
constant offset left over from mean removal is projected out. The unknown
initial state can instead be eliminated exactly (``nuisance="state"``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .. import lti
from ..exceptions import EstimationError, ParameterError
from ..series import SampledSeries
from ..validation import as_experiments, check_signal
from .metrics import criteria, fitpercent
from .tf import ContinuousTF

log = logging.getLogger(__name__)

MAX_POLES = 5


@dataclass
class FitReport:
    """Fit statistics for one estimated model (training data unless noted)."""

    fitpercent: float
    nrmse: float
    afpe: float
    aicc: float
    bic: float
    adj_r2: float | None
    n_params: int
    n_samples: int
    n_poles: int
    n_zeros: int
    loss: float
    test_fitpercent: float | None = None
    refined: bool = True
    stable: bool = True
    iterations: int = 0

    @property
    def orders(self) -> tuple[int, int]:
        return self.n_poles, self.n_zeros

    def to_dict(self) -> dict:
        return {
            "fitpercent": self.fitpercent,
            "nrmse": self.nrmse,
            "afpe": self.afpe,
            "aicc": self.aicc,
            "bic": self.bic,
            "adj_r2": self.adj_r2,
            "n_params": self.n_params,
            "n_samples": self.n_samples,
            "np": self.n_poles,
            "nz": self.n_zeros,
            "loss": self.loss,
            "test_fitpercent": self.test_fitpercent,
            "refined": self.refined,
            "stable": self.stable,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitReport":
        return cls(
            fitpercent=d["fitpercent"],
            nrmse=d.get("nrmse", 1 - d["fitpercent"] / 100),
            afpe=d["afpe"],
            aicc=d["aicc"],
            bic=d["bic"],
            adj_r2=d.get("adj_r2"),
            n_params=d.get("n_params", d["np"] + d["nz"] + 1),
            n_samples=d.get("n_samples", 0),
            n_poles=d["np"],
            n_zeros=d["nz"],
            loss=d.get("loss", float("nan")),
            test_fitpercent=d.get("test_fitpercent"),
            refined=d.get("refined", True),
            stable=d.get("stable", True),
            iterations=d.get("iterations", 0),
        )


# -- parameter vector <-> polynomials ------------------------------------------
# theta = [a_0 .. a_{n-1}, b_0 .. b_nz]  (ascending powers, den monic)


def _unpack(theta, n, nz):
    a = np.append(theta[:n], 1.0)  # ascending, a_n = 1
    b = np.asarray(theta[n:n + nz + 1])
    return a, b


def _to_tf(theta, n, nz) -> ContinuousTF:
    a, b = _unpack(theta, n, nz)
    return ContinuousTF(tuple(b[::-1]), tuple(a[::-1]))


def _pack(tf: ContinuousTF, n, nz):
    a = np.asarray(tf.den[::-1])[:n]
    b = np.zeros(nz + 1)
    asc = np.asarray(tf.num[::-1])
    b[: min(len(asc), nz + 1)] = asc[: nz + 1]
    return np.concatenate([a, b])


def simulate_output(theta, n, nz, u, dt):
    """Zero-state ZOH response of the model encoded by ``theta``."""
    a, b = _unpack(theta, n, nz)
    X = lti.basis_response(a[::-1], u, dt)
    return b @ X[: nz + 1]


def output_jacobian(theta, n, nz, u, dt):
    """Simulated output and its exact Jacobian w.r.t. ``theta``.

    Every output and sensitivity is a combination of the basis states of
    ``1 / A(s)**2``: y = sum b_i a_j z_{i+j}, dy/db_i = sum_j a_j z_{i+j},
    dy/da_k = -sum_i b_i z_{i+k}. Returns ``(y_hat, J)`` with ``J`` of shape
    ``(len(u), n + nz + 1)``.
    """
    a, b = _unpack(theta, n, nz)
    a2 = np.convolve(a, a)  # ascending, degree 2n
    Z = lti.basis_response(a2[::-1], u, dt)  # rows j = 0..2n-1
    m = 2 * n
    C = np.zeros((n + nz + 2, m))
    for k in range(n):
        C[k, k:k + nz + 1] = -b
    for i in range(nz + 1):
        C[n + i, i:i + n + 1] = a
    q = np.convolve(b, a)
    C[-1, : len(q)] = q
    with np.errstate(over="ignore", invalid="ignore"):
        out = C @ Z
    return out[-1], out[:-1].T


# free-response rows below this fraction of their peak are dropped
IC_RTOL = 1e-16


class _Nuisance:
    """Projector off the span of a constant and the model's free response.

    A record cut out of a longer run starts in an unknown state and, after
    mean removal, carries a small constant offset. Both enter the output
    linearly, so they are eliminated by projection (variable projection).
    The free response decays, so only its leading ``K`` rows are stored:
    with ``mu`` the column means over all ``N`` rows, the centred basis is
    ``[W_K - mu ; -mu]`` and its Gram factor comes from a ``(K+1) x m`` QR.
    """

    def __init__(self, den, N, dt, mode="state"):
        self.N = N
        self.W = None
        self.mode = mode
        if mode != "state":
            return
        W = lti.free_response_basis(den, N, dt, IC_RTOL)
        if not np.all(np.isfinite(W)):
            return
        K = len(W)
        mu = W.sum(axis=0) / N
        M = np.vstack([W - mu, np.sqrt(max(N - K, 0)) * -mu[None, :]])
        R = np.linalg.qr(M, mode="r")
        d = np.abs(np.diag(R))
        if d.size == 0 or not np.all(d > 1e-12 * d.max()):
            return
        self.W, self.mu, self.R = W, mu, R

    def apply(self, v):
        """Project ``v`` (vector or column matrix, modified in place)."""
        if self.mode == "none":
            return v
        v -= v.mean(axis=0)
        if self.W is None:
            return v
        K = len(self.W)
        g = self.W.T @ v[:K]
        c = linalg.solve_triangular(self.R, linalg.solve_triangular(self.R, g, trans="T"))
        v[:K] -= self.W @ c
        v += self.mu @ c
        return v


NUISANCE_MODES = ("none", "offset", "state")


def _nuisance(theta, n, N, dt, mode):
    return _Nuisance(np.append(theta[:n], 1.0)[::-1], N, dt, mode)


# -- stage A ---------------------------------------------------------------------


def default_svf_bandwidth(f_max: float) -> float:
    return 2 * np.pi * 2 * f_max


def _svf_regression(u, y, dt, n, nz, lam):
    fpoly = np.poly(np.full(n, -lam))  # (s + lam)^n, descending
    c = fpoly[::-1][:n]  # ascending, without the leading 1
    Fu = lti.basis_response(fpoly, u, dt)
    Fy = lti.basis_response(fpoly, y, dt)
    yn = y - c @ Fy  # s^n / (s+lam)^n applied to y
    # skip the filter's own start-up transient
    skip = min(int(np.ceil(5.0 * n / lam / dt)), len(u) // 4)
    cols = [-Fy[k, skip:] for k in range(n)] + [Fu[k, skip:] for k in range(nz + 1)]
    return np.column_stack(cols), yn[skip:]


def _reflect_unstable(den_desc, limit=np.inf):
    """Mirror right-half-plane roots and pull roots beyond ``limit`` inside it."""
    roots = np.roots(den_desc)
    if roots.size == 0 or (np.all(roots.real < 0) and np.all(np.abs(roots) < limit)):
        return np.asarray(den_desc, dtype=float), False
    fixed = np.where(roots.real >= 0, -np.abs(roots.real) - 1e-6 * (1 + np.abs(roots)) + 1j * roots.imag, roots)
    mag = np.abs(fixed)
    fixed = np.where(mag >= limit, fixed * (0.5 * limit / np.maximum(mag, 1e-300)), fixed)
    return np.real(np.poly(fixed)), True


def svf_initial(experiments, dt, n, nz, lam):
    """Stage-A least-squares estimate; returns ``theta``."""
    rows, rhs = [], []
    for u, y in experiments:
        A, t = _svf_regression(u, y, dt, n, nz, lam)
        rows.append(A)
        rhs.append(t)
    A = np.vstack(rows)
    t = np.concatenate(rhs)
    norms = np.linalg.norm(A, axis=0)
    if not np.all(np.isfinite(A)) or np.any(norms == 0):
        raise EstimationError("insufficient excitation: regression has empty columns")
    sol, *_ = np.linalg.lstsq(A / norms, t, rcond=None)
    theta = sol / norms
    den = np.append(1.0, theta[:n][::-1])
    den, reflected = _reflect_unstable(den, pole_limit(dt))
    theta[:n] = den[::-1][:n]
    if reflected:
        log.debug("stage A poles reflected into the left half plane (np=%d, nz=%d)", n, nz)
    return theta


# -- stage B ---------------------------------------------------------------------


def pole_limit(dt: float) -> float:
    """Largest admissible pole magnitude (rad/s): ten times the Nyquist rate."""
    return 10.0 * np.pi / dt


def pole_floor(duration: float) -> float:
    """Smallest admissible pole magnitude (rad/s) for records ``duration`` s long.

    A time constant longer than the record is not identifiable, and paired
    with a nearly cancelling zero it leaves the static gain arbitrary.
    """
    return 1.0 / duration


def _admissible(theta, n, dt, floor=0.0) -> bool:
    den = np.append(theta[:n], 1.0)[::-1]
    if not np.all(np.isfinite(den)):
        return False
    roots = np.roots(den)
    mag = np.abs(roots)
    return bool(np.all(roots.real < 0) and np.all(mag < pole_limit(dt)) and np.all(mag > floor))


def burn_in_samples(burn_in: float, dt: float, n: int) -> int:
    """Leading samples left out of the cost; never more than half a record."""
    if burn_in < 0:
        raise ParameterError("burn_in must be >= 0")
    return min(int(round(burn_in / dt)), n // 2)


class _Objective:
    """Output-error cost over several experiments.

    Each experiment is simulated from zero state over its whole length; the
    first ``skip`` samples only serve to let the start-up transient decay
    and are not scored. The nuisance projection acts on the scored part.
    """

    def __init__(self, experiments, dt, n, nz, nuisance, burn_in):
        if nuisance not in NUISANCE_MODES:
            raise ParameterError(f"nuisance must be one of {NUISANCE_MODES}")
        self.experiments = experiments
        self.dt, self.n, self.nz = dt, n, nz
        self.nuisance = nuisance
        self.skips = [burn_in_samples(burn_in, dt, len(u)) for u, _ in experiments]
        self.energy = sum(float(y[k:] @ y[k:]) for (_, y), k in zip(experiments, self.skips))
        self.n_scored = sum(len(y) - k for (_, y), k in zip(experiments, self.skips))
        self.floor = pole_floor(max(len(u) for u, _ in experiments) * dt)

    def residual(self, theta, i):
        u, y = self.experiments[i]
        k = self.skips[i]
        with np.errstate(over="ignore", invalid="ignore"):
            r = (y - simulate_output(theta, self.n, self.nz, u, self.dt))[k:]
            if np.all(np.isfinite(r)):
                r = _nuisance(theta, self.n, len(r), self.dt, self.nuisance).apply(r)
        return r

    def cost(self, theta):
        # unstable, super-Nyquist and unidentifiably slow poles are rejected outright
        if not _admissible(theta, self.n, self.dt, self.floor):
            return np.inf
        total = 0.0
        for i in range(len(self.experiments)):
            r = self.residual(theta, i)
            with np.errstate(over="ignore", invalid="ignore"):
                total += float(r @ r)
        return total if np.isfinite(total) else np.inf

    def numerator_ls(self, a):
        """Best numerator for the ascending monic denominator ``a``; returns ``theta``."""
        n, nz = self.n, self.nz
        rows, rhs = [], []
        with np.errstate(over="ignore", invalid="ignore"):
            for (u, y), k in zip(self.experiments, self.skips):
                X = np.ascontiguousarray(lti.basis_response(a[::-1], u, self.dt)[: nz + 1, k:].T)
                t = y[k:].copy()
                if self.nuisance != "none":
                    P = _Nuisance(a[::-1], len(t), self.dt, self.nuisance)
                    X = P.apply(X)
                    t = P.apply(t)
                rows.append(X)
                rhs.append(t)
        A = np.vstack(rows)
        if not np.all(np.isfinite(A)):
            return None
        b, *_ = np.linalg.lstsq(A, np.concatenate(rhs), rcond=None)
        return np.concatenate([a[:n], b])

    def normal_equations(self, theta):
        """``(cost, J^T J, J^T r)`` at ``theta``."""
        H = g = 0.0
        cost = 0.0
        with np.errstate(over="ignore", invalid="ignore"):
            for (u, y), k in zip(self.experiments, self.skips):
                y_hat, J = output_jacobian(theta, self.n, self.nz, u, self.dt)
                r = (y - y_hat)[k:]
                J = np.ascontiguousarray(J[k:])
                if self.nuisance != "none" and np.all(np.isfinite(r)):
                    P = _nuisance(theta, self.n, len(r), self.dt, self.nuisance)
                    r = P.apply(r)
                    J = P.apply(J)
                cost += float(r @ r)
                H = H + J.T @ J
                g = g + J.T @ r
        return cost, H, g


def refine(theta, objective: _Objective, max_iter=100, tol=1e-9):
    """Levenberg-Marquardt output-error refinement.

    Candidate steps that make the model unstable or move a pole outside
    ``[pole_floor, pole_limit]`` are rejected like any cost increase. The damping
    follows Nielsen's gain-ratio rule on a Marquardt-scaled system. Stops
    when an accepted step lowers the cost by less than ``tol`` (relative)
    or after ``max_iter`` Jacobian evaluations. Returns
    ``(theta, cost, iterations)``.
    """
    theta = np.asarray(theta, dtype=float).copy()
    mu = 1e-4
    cost = None
    it = 0
    for it in range(1, max_iter + 1):
        cost, H, g = objective.normal_equations(theta)
        if not np.isfinite(cost) or not np.all(np.isfinite(H)):
            raise EstimationError("refinement diverged (non-finite simulation)")
        if cost <= 1e-26 * objective.energy:
            break
        s = np.sqrt(np.diag(H))
        s[s == 0] = 1.0
        Hs = H / np.outer(s, s)
        gs = g / s
        improved = False
        nu = 2.0
        while mu < 1e12:
            try:
                ds = np.linalg.solve(Hs + mu * np.eye(len(s)), gs)
            except np.linalg.LinAlgError:
                mu *= nu
                nu *= 2
                continue
            cand = theta + ds / s
            c_new = objective.cost(cand)
            if c_new < cost:
                predicted = float(ds @ (gs + mu * ds))
                rho = (cost - c_new) / predicted if predicted > 0 else 1.0
                improved = True
                rel = (cost - c_new) / cost
                theta, cost = cand, c_new
                mu = max(mu * max(1 / 3, 1 - (2 * rho - 1) ** 3), 1e-12)
                break
            mu *= nu
            nu *= 2
        if not improved or rel < tol:
            break
    if cost is None:
        cost = objective.cost(theta)
    return theta, cost, it


# -- public entry points ----------------------------------------------------------


def _report(theta, objective: _Objective, cost, refined, iterations) -> FitReport:
    n, nz = objective.n, objective.nz
    ys, rs = [], []
    for i, ((_, y), k) in enumerate(zip(objective.experiments, objective.skips)):
        ys.append(y[k:])
        rs.append(objective.residual(theta, i))
    y = np.concatenate(ys)
    y_hat = y - np.concatenate(rs)
    N = y.size
    d = n + nz + 1
    loss = max(cost / N, np.finfo(float).tiny)
    crit = criteria(loss, d, N, float(np.sum((y - y.mean()) ** 2)))
    nrmse, fit = fitpercent(y, y_hat) if np.all(np.isfinite(y_hat)) else (np.inf, -np.inf)
    tf = _to_tf(theta, n, nz)
    return FitReport(
        fitpercent=fit,
        nrmse=nrmse,
        afpe=crit.afpe,
        aicc=crit.aicc,
        bic=crit.bic,
        adj_r2=crit.adj_r2,
        n_params=d,
        n_samples=N,
        n_poles=n,
        n_zeros=nz,
        loss=loss,
        refined=refined,
        stable=tf.is_stable,
        iterations=iterations,
    )


# repeated real-pole denominators tried besides the SVF one
N_GRID_STARTS = 8


def _denominator_starts(objective: _Objective, theta_svf, f_max: float) -> list:
    """Starting points with the numerator solved by linear least squares.

    Denominators are the SVF one and ``(s + c)**n`` on a geometric grid of
    corners from a tenth of the excitation band up to half the pole limit.
    With the poles fixed the output is linear in the numerator, so each
    start is the best model for its denominator.
    """
    n = objective.n
    lo = 2 * np.pi * f_max / 10
    hi = 0.5 * pole_limit(objective.dt)
    dens = [np.append(theta_svf[:n], 1.0)]
    if hi > lo:
        for c in np.geomspace(lo, hi, N_GRID_STARTS):
            dens.append(np.poly(np.full(n, -c))[::-1])
    out = []
    for a in dens:
        th = objective.numerator_ls(np.asarray(a, dtype=float))
        if th is not None and np.all(np.isfinite(th)):
            out.append(th)
    return out


def _check_orders(n, nz):
    if not (1 <= n <= MAX_POLES):
        raise ParameterError(f"number of poles must be in 1..{MAX_POLES}, got {n}")
    if not (0 <= nz < n):
        raise ParameterError(f"number of zeros must be in 0..{n - 1}, got {nz}")


def estimate_tf(
    train,
    n_poles: int,
    n_zeros: int,
    dt: float | None = None,
    *,
    svf_bandwidth: float | None = None,
    f_max: float = 5.0,
    max_iter: int = 100,
    tol: float = 1e-9,
    nuisance: str = "offset",
    burn_in: float = 0.0,
    warm_start=(),
) -> tuple[ContinuousTF, FitReport]:
    """Estimate an ``n_poles``/``n_zeros`` transfer function from mean-removed data.

    Parameters
    ----------
    train : SampledSeries, (u, y) pair, or a list of either
        Training experiments with ``input``/``output`` channels.
    n_poles, n_zeros : int
        Model orders, ``0 <= n_zeros < n_poles <= 5``.
    dt : float, optional
        Sample period; taken from the series when omitted.
    svf_bandwidth : float, optional
        State-variable-filter corner in rad/s. Defaults to ``4*pi*f_max``.
    f_max : float
        Highest excitation frequency in Hz, used for the SVF default.
    nuisance : {"offset", "state", "none"}
        Per-experiment terms eliminated from the residual: a constant
        offset, the offset plus the model's free response (unknown initial
        state), or nothing.
    burn_in : float
        Seconds at the start of each experiment that are simulated but not
        scored, so the model's own start-up transient does not bias the fit.
    warm_start : sequence of ContinuousTF
        Extra starting models of the same orders (see :func:`embed_model`).
        Refinement starts from whichever candidate, including the SVF
        estimate, has the lowest cost.

    Returns
    -------
    (ContinuousTF, FitReport)
        The model carries no offsets; callers attach segment means.
    """
    _check_orders(n_poles, n_zeros)
    experiments, dt = as_experiments(train, dt)
    n_total = sum(len(u) for u, _ in experiments)
    d = n_poles + n_zeros + 1
    if n_total <= 10 * d:
        raise ParameterError(f"training data too short: {n_total} samples for {d} parameters")
    scale_u = max(float(np.max(np.abs(u))) for u, _ in experiments)
    scale_y = max(float(np.max(np.abs(y))) for _, y in experiments)
    if scale_u == 0 or scale_y == 0:
        raise EstimationError("insufficient excitation: input or output is identically zero")
    lam = svf_bandwidth if svf_bandwidth is not None else default_svf_bandwidth(f_max)
    objective = _Objective(experiments, dt, n_poles, n_zeros, nuisance, burn_in)
    theta0 = svf_initial(experiments, dt, n_poles, n_zeros, lam)
    candidates = [theta0] + _denominator_starts(objective, theta0, f_max)
    for cand in warm_start:
        if cand.n_poles != n_poles or cand.n_zeros > n_zeros:
            raise ParameterError("warm-start model orders do not match")
        candidates.append(_pack(cand, n_poles, n_zeros))
    costs = [objective.cost(th) for th in candidates]
    theta0 = candidates[int(np.argmin(costs))]
    try:
        theta, cost, iters = refine(theta0, objective, max_iter, tol)
        refined = True
    except (EstimationError, np.linalg.LinAlgError) as exc:
        log.warning("refinement failed for np=%d nz=%d (%s); keeping stage-A model", n_poles, n_zeros, exc)
        theta, cost, iters, refined = theta0, objective.cost(theta0), 0, False
    if not np.isfinite(cost):
        raise EstimationError("estimated model cannot be simulated (non-finite output)")
    report = _report(theta, objective, cost, refined, iters)
    tf = _to_tf(theta, n_poles, n_zeros)
    return tf, report


def embed_model(tf: ContinuousTF, n_poles: int, n_zeros: int, corner: float) -> ContinuousTF:
    """Lift a lower-order model to ``(n_poles, n_zeros)`` with almost no change.

    Each missing pole is added as ``1/(s/corner + 1)``; when a zero is added
    alongside it, the pair ``(s/(1.001*corner) + 1)/(s/corner + 1)`` nearly
    cancels. The lifted model starts refinement at the lower-order cost.
    """
    num = np.asarray(tf.num, dtype=float)
    den = np.asarray(tf.den, dtype=float)
    add_p = n_poles - tf.n_poles
    add_z = n_zeros - tf.n_zeros
    if add_p < 0 or add_z < 0 or add_z > add_p:
        raise ParameterError("can only embed into higher orders")
    for k in range(add_p):
        c = corner * (1.0 + 0.1 * k)
        den = np.convolve(den, [1.0 / c, 1.0])
        if k < add_z:
            num = np.convolve(num, [1.0 / (1.001 * c), 1.0])
    return ContinuousTF(tuple(num), tuple(den))


def heldout_fitpercent(
    tf: ContinuousTF,
    train,
    test,
    dt: float | None = None,
    nuisance: str = "offset",
    burn_in: float = 0.0,
) -> list[float]:
    """Held-out fit per experiment.

    Each test record is assumed to follow its training record directly in
    time. The model is simulated from the start of the training record and
    scored on the test part only. Nuisance terms (see :func:`estimate_tf`)
    are fitted on the scored part of the training residual and carried
    forward.
    """
    if nuisance not in NUISANCE_MODES:
        raise ParameterError(f"nuisance must be one of {NUISANCE_MODES}")
    tr, dt = as_experiments(train, dt)
    te, _ = as_experiments(test, dt)
    if len(tr) != len(te):
        raise ParameterError("train and test must contain the same number of experiments")
    fits = []
    for (u1, y1), (u2, y2) in zip(tr, te):
        n1 = len(u1)
        k = burn_in_samples(burn_in, dt, n1)
        u = np.concatenate([u1, u2])
        with np.errstate(over="ignore", invalid="ignore"):
            y_hat = tf.dc_gain_adjust * tf.deviation_response(u, dt)
            if nuisance != "none" and np.all(np.isfinite(y_hat)):
                cols = [np.ones(len(u))]
                if nuisance == "state" and tf.n_poles:
                    W = np.zeros((len(u), tf.n_poles))
                    free = lti.free_response_basis(tf.den, len(u), dt, IC_RTOL)
                    W[: len(free)] = free
                    cols.extend(W.T)
                A = np.column_stack(cols)
                if np.all(np.isfinite(A)):
                    c, *_ = np.linalg.lstsq(A[k:n1], y1[k:] - y_hat[k:n1], rcond=None)
                    y_hat = y_hat + A @ c
        y_hat = y_hat[n1:]
        if not np.all(np.isfinite(y_hat)):
            fits.append(-np.inf)
            continue
        fits.append(fitpercent(y2, y_hat)[1])
    return fits


class TransferFunctionEstimator(RegressorMixin, BaseEstimator):
    """scikit-learn style wrapper around :func:`estimate_tf`.

    ``X`` is the (mean-removed) input signal and ``y`` the output signal,
    both 1-D or single-column arrays, or equal-length lists of such arrays
    for multi-experiment fits. ``score`` returns the fit percentage.

    Examples
    --------
    >>> est = TransferFunctionEstimator(n_poles=2, n_zeros=1, dt=1e-3)  # doctest: +SKIP
    >>> est.fit(u, y).predict(u_new)  # doctest: +SKIP
    """

    def __init__(
        self,
        n_poles=2,
        n_zeros=1,
        dt=1e-4,
        svf_bandwidth=None,
        f_max=5.0,
        max_iter=100,
        tol=1e-9,
        nuisance="offset",
        burn_in=0.0,
    ):
        self.n_poles = n_poles
        self.n_zeros = n_zeros
        self.dt = dt
        self.svf_bandwidth = svf_bandwidth
        self.f_max = f_max
        self.max_iter = max_iter
        self.tol = tol
        self.nuisance = nuisance
        self.burn_in = burn_in

    def fit(self, X, y):
        exps = _pairs(X, y)
        self.tf_, self.report_ = estimate_tf(
            exps,
            self.n_poles,
            self.n_zeros,
            self.dt,
            svf_bandwidth=self.svf_bandwidth,
            f_max=self.f_max,
            max_iter=self.max_iter,
            tol=self.tol,
            nuisance=self.nuisance,
            burn_in=self.burn_in,
        )
        self.n_iter_ = self.report_.iterations
        return self

    def predict(self, X):
        check_is_fitted(self, "tf_")
        if isinstance(X, (list, tuple)):
            return [self.tf_.dc_gain_adjust * self.tf_.deviation_response(check_signal(x, "X"), self.dt) for x in X]
        return self.tf_.dc_gain_adjust * self.tf_.deviation_response(check_signal(X, "X"), self.dt)

    def score(self, X, y, sample_weight=None):
        pred = self.predict(X)
        if isinstance(pred, list):
            pred = np.concatenate(pred)
            y = np.concatenate([check_signal(v, "y") for v in y])
        return fitpercent(check_signal(y, "y"), pred)[1]


def _pairs(X, y):
    if isinstance(X, (list, tuple)):
        if not isinstance(y, (list, tuple)) or len(X) != len(y):
            raise ParameterError("X and y must both be lists of equal length")
        return [(check_signal(a, "X"), check_signal(b, "y", like=a)) for a, b in zip(X, y)]
    u = check_signal(X, "X")
    return [(u, check_signal(y, "y", like=u))]

