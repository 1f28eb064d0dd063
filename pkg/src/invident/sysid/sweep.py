"""Model-order sweep with information-criterion selection."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from ..validation import as_experiments
from ..exceptions import InvidentError, ParameterError, SweepError
from .estimate import FitReport, default_svf_bandwidth, embed_model, estimate_tf, heldout_fitpercent, pole_limit
from .tf import ContinuousTF

log = logging.getLogger(__name__)

SELECTORS = ("afpe", "aicc", "bic", "fitpercent", "adj_r2")


def default_orders(max_poles: int = 5, min_poles: int = 2) -> list[tuple[int, int]]:
    return [(p, z) for p in range(min_poles, max_poles + 1) for z in range(p)]


def parse_orders(text: str) -> list[tuple[int, int]]:
    """``"2:5"`` -> the default sweep over 2..5 poles; ``"2,1;3,2"`` -> explicit pairs."""
    text = text.strip()
    if ":" in text and ";" not in text and "," not in text:
        lo, hi = (int(v) for v in text.split(":"))
        return default_orders(hi, lo)
    pairs = []
    for chunk in text.split(";"):
        p, z = (int(v) for v in chunk.split(","))
        pairs.append((p, z))
    return pairs


@dataclass
class SweepResult:
    tf: ContinuousTF
    report: FitReport
    table: list[FitReport] = field(default_factory=list)
    failures: dict = field(default_factory=dict)
    models: dict = field(default_factory=dict, repr=False)

    def select(self, selector: str) -> FitReport:
        """Best report of this sweep under another selector."""
        if selector not in SELECTORS:
            raise ParameterError(f"selector must be one of {SELECTORS}")
        return min(self.table, key=lambda r: _score_key(r, selector))


def _score_key(report: FitReport, selector: str):
    if selector == "fitpercent":
        value = -report.test_fitpercent
    elif selector == "adj_r2":
        value = -(report.adj_r2 if report.adj_r2 is not None else -np.inf)
    else:
        value = getattr(report, selector)
    if not np.isfinite(value):
        value = np.inf
    return (value, report.n_params, report.n_poles)


def _fit_one(train, test, order, options, warm=()):
    n, nz = order
    try:
        tf, rep = estimate_tf(train, n, nz, warm_start=warm, **options)
    except InvidentError as exc:
        return order, None, None, f"{type(exc).__name__}: {exc}"
    if test is not None:
        rep.test_fitpercent = float(min(heldout_fitpercent(
            tf, train, test, options.get("dt"), options.get("nuisance", "offset"), options.get("burn_in", 0.0)
        )))
    return order, tf, rep, None


def order_sweep(
    train,
    test=None,
    orders=None,
    selector: str = "afpe",
    n_jobs: int = 1,
    **options,
) -> SweepResult:
    """Fit every ``(n_poles, n_zeros)`` in ``orders`` and pick the best.

    Information criteria come from the training data; ``test_fitpercent``
    is the worst held-out fit over the test experiments. Ties are broken
    towards fewer parameters, then fewer poles. The result does not depend
    on ``n_jobs``.
    """
    if selector not in SELECTORS:
        raise ParameterError(f"selector must be one of {SELECTORS}")
    orders = sorted(set(orders if orders is not None else default_orders()))
    if not orders:
        raise ParameterError("no model orders to sweep")
    if selector == "fitpercent" and test is None:
        raise ParameterError("fitpercent selection needs test data")
    _, dt = as_experiments(train, options.get("dt"))
    options = {**options, "dt": dt}
    if options.get("svf_bandwidth") is not None:
        corner = 2.0 * options["svf_bandwidth"]
    else:
        corner = 2.0 * default_svf_bandwidth(options.get("f_max", 5.0))
    # Orders run one pole count at a time; each model may start from a
    # lifted copy of any converged model with one pole fewer, so the cost
    # of a larger model never starts above that of a nested smaller one.
    results, fitted = [], {}
    for n in sorted({o[0] for o in orders}):
        level = [o for o in orders if o[0] == n]
        jobs = []
        for o in level:
            warm = []
            for z in (o[1], o[1] - 1):
                prev = fitted.get((n - 1, z))
                if prev is not None and 0 <= z < n - 1:
                    c = max(corner, 2.0 * np.max(np.abs(prev.poles)))
                    c = min(c, 0.5 * pole_limit(dt))
                    warm.append(embed_model(prev, n, o[1], c))
            jobs.append((o, warm))
        if n_jobs == 1:
            out = [_fit_one(train, test, o, options, w) for o, w in jobs]
        else:
            out = Parallel(n_jobs=n_jobs)(delayed(_fit_one)(train, test, o, options, w) for o, w in jobs)
        for order, tf, _, err in out:
            if err is None:
                fitted[order] = tf
        results.extend(out)
    table, models, failures = [], {}, {}
    for order, tf, rep, err in results:
        if err is not None:
            failures[order] = err
            log.info("order %s failed: %s", order, err)
            continue
        table.append(rep)
        models[order] = tf
    if not table:
        raise SweepError("every model order failed: " + "; ".join(f"{o}: {e}" for o, e in failures.items()), failures)
    best = min(table, key=lambda r: _score_key(r, selector))
    return SweepResult(models[best.orders], best, table, failures, models)
