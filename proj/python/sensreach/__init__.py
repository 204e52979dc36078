"""Interval reachability from sensitivity bounds."""

import json
import os

from ._core import (
    AssumptionViolation,
    InfeasibleTaylorOrder,
    IntegrationError,
    Model,
    OverApprox,
    ReachSpec,
    SensitivityBounds,
    falsify_bounds,
    integrate,
    jacobian_bounds,
    linear,
    make_model,
    minimal_taylor_order,
    overapprox,
    registered_models,
    sample_bounds,
    satellite,
    taylor_bounds,
    taylor_remainder,
    tightness_check,
    traffic,
    traffic3,
)

__all__ = [
    "AssumptionViolation",
    "InfeasibleTaylorOrder",
    "IntegrationError",
    "Model",
    "OverApprox",
    "ReachSpec",
    "SensitivityBounds",
    "falsify_bounds",
    "integrate",
    "jacobian_bounds",
    "linear",
    "make_model",
    "minimal_taylor_order",
    "overapprox",
    "registered_models",
    "run_experiment",
    "sample_bounds",
    "satellite",
    "suite_configs",
    "taylor_bounds",
    "taylor_remainder",
    "tightness_check",
    "traffic",
    "traffic3",
]


def run_experiment(config, include_timings=True):
    """Run one experiment from a config dict or a path to a JSON file; returns the result dict."""
    if isinstance(config, (str, os.PathLike)):
        with open(config) as fh:
            config = json.load(fh)
    from ._core import run_experiment_json

    return json.loads(run_experiment_json(json.dumps(config), include_timings))


def suite_configs(name="paper"):
    from ._core import suite_configs_json

    return json.loads(suite_configs_json(name))
