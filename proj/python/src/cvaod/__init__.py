"""CVA subspace estimation for over-differenced state-space processes."""

import json as _json

from ._core import (
    EstimationError,
    NumericalError,
    StateSpaceModel,
    aic_order,
    covariance_sequence,
    cva_fit,
    differenced_white_noise_model,
    impulse_responses,
    lambda_min_gamma,
    loglik,
    model_to_json,
    optimize,
    overdifference_model,
    population_limits,
    read_model,
    select_order,
    simulate,
    simulation_base_model,
    simulation_differenced_model,
    spectral_radius,
)
from ._core import run_experiment as _run_experiment

__all__ = [
    "EstimationError",
    "NumericalError",
    "StateSpaceModel",
    "aic_order",
    "covariance_sequence",
    "cva_fit",
    "differenced_white_noise_model",
    "impulse_responses",
    "lambda_min_gamma",
    "loglik",
    "model_to_json",
    "optimize",
    "overdifference_model",
    "population_limits",
    "read_model",
    "run_experiment",
    "select_order",
    "simulate",
    "simulation_base_model",
    "simulation_differenced_model",
    "spectral_radius",
]


def run_experiment(config):
    """Run a Monte Carlo experiment from a config dict (or JSON string).

    Returns one dict per (estimator, T) cell with mse_times_T, n_ok, n_fail.
    """
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _run_experiment(config)
