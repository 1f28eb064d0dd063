"""Transfer-function estimation, simulation and model-order selection."""

from .estimate import (
    FitReport,
    TransferFunctionEstimator,
    embed_model,
    estimate_tf,
    heldout_fitpercent,
    output_jacobian,
    simulate_output,
)
from .metrics import Criteria, criteria, fitpercent
from .sweep import SweepResult, default_orders, order_sweep, parse_orders
from .tf import ContinuousTF, simulate_tf

__all__ = [
    "ContinuousTF",
    "Criteria",
    "FitReport",
    "SweepResult",
    "TransferFunctionEstimator",
    "criteria",
    "default_orders",
    "embed_model",
    "estimate_tf",
    "fitpercent",
    "heldout_fitpercent",
    "order_sweep",
    "output_jacobian",
    "parse_orders",
    "simulate_output",
    "simulate_tf",
]
