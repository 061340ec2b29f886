"""Mean-field network simulator: Python access to the C++ core."""

import json

from . import _core
from ._core import (
    BudgetError,
    ClosureError,
    NumericalError,
    ValidationError,
    catalog_names,
    dbl_distance,
    fit_rate,
    philox,
)

__version__ = _core.__version__


def _text(model):
    return model if isinstance(model, str) else json.dumps(model)


def catalog_model(name):
    """Built-in model as a dict."""
    return json.loads(_core.catalog_model(name))


def validate(model):
    """List of (code, message) pairs; empty when the model is valid."""
    return _core.validate(_text(model))


def simulate(model, n, seed=1, grid=20, beta=None):
    """Run one n-system; returns the empirical law on the grid and the node paths."""
    kwargs = {} if beta is None else {"beta": beta}
    return _core.simulate(_text(model), n, seed, grid, **kwargs)


def forward_equation_accel(model, intervals=20, steps=2000):
    return _core.forward_equation_accel(_text(model), intervals, steps)


def invariant_measure(model, x, x_tilde):
    return _core.invariant_measure(_text(model), x, x_tilde)


def run_experiment(config, base_dir="."):
    """Run an experiment config (dict) and return its report."""
    return json.loads(_core.run_experiment(json.dumps(config), base_dir))


__all__ = [
    "BudgetError",
    "ClosureError",
    "NumericalError",
    "ValidationError",
    "catalog_model",
    "catalog_names",
    "dbl_distance",
    "fit_rate",
    "forward_equation_accel",
    "invariant_measure",
    "philox",
    "run_experiment",
    "simulate",
    "validate",
]
