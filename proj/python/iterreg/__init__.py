"""Kernel regularization by early-stopped subgradient iteration.

Kernels, losses and distributions are described by the same dicts the
command-line tool reads from its config files, e.g.
``{"type": "gaussian", "dim": 2, "bandwidth": 0.5}`` or ``{"name": "hinge"}``.
"""

import json

import numpy as np

from . import _core
from ._core import (
    ZETA_CAPACITY_INDEPENDENT,
    ConfigError,
    DimensionError,
    DivergenceError,
    DomainError,
    InadmissibleSchedule,
    compute_indices,
    hinge_fixed_T_schedule,
    hinge_indices,
    lambda_T,
    theoretical_T,
)

__all__ = [
    "ZETA_CAPACITY_INDEPENDENT",
    "ConfigError",
    "DimensionError",
    "DivergenceError",
    "DomainError",
    "InadmissibleSchedule",
    "compute_indices",
    "cross_gram",
    "gram",
    "growth_params",
    "hinge_fixed_T_schedule",
    "hinge_indices",
    "lambda_T",
    "loss_left_derivatives",
    "loss_values",
    "max_eta1",
    "predict",
    "run",
    "sample",
    "theoretical_T",
    "train",
]


def _spec(d):
    return d if isinstance(d, str) else json.dumps(d)


def _points(X):
    X = np.asarray(X, dtype=float)
    return X.reshape(-1, 1) if X.ndim == 1 else X


def gram(kernel, X):
    return _core.gram(_spec(kernel), _points(X))


def cross_gram(kernel, A, B):
    return _core.cross_gram(_spec(kernel), _points(A), _points(B))


def predict(kernel, centers, coeffs, X):
    """Values of sum_j coeffs[j] K(., centers[j]) at the rows of X."""
    return _core.predict(_spec(kernel), _points(centers), np.asarray(coeffs, dtype=float), _points(X))


def loss_values(loss, y, a):
    y, a = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(a, dtype=float))
    return _core.loss_values(_spec(loss), y.ravel(), a.ravel()).reshape(y.shape)


def loss_left_derivatives(loss, y, a):
    y, a = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(a, dtype=float))
    return _core.loss_left_derivatives(_spec(loss), y.ravel(), a.ravel()).reshape(y.shape)


def growth_params(loss):
    """q, c_q, v0 = sup_y V(y, 0) and the derivative's Lipschitz constant (or None)."""
    return _core.growth_params(_spec(loss))


def max_eta1(loss, kappa, theta, mode="nonsmooth"):
    return _core.max_eta1(_spec(loss), kappa, theta, mode)


def run(kernel, X, y, loss, theta, T, eta1=None, mode="nonsmooth", force=False, incremental=False):
    """T iterations from f_1 = 0.

    Returns per-step arrays (t, eta, empirical_risk, rkhs_norm, subgrad_norm)
    describing f_1..f_T and the coefficients of the last, averaged and best
    iterates. eta1 defaults to the largest admissible value.
    """
    return _core.run(_spec(kernel), _points(X), np.asarray(y, dtype=float), _spec(loss), theta, T, eta1, mode,
                     force, incremental)


def sample(dist, m, seed):
    """(X, y) drawn from a synthetic distribution spec."""
    return _core.sample(_spec(dist), m, seed)


def train(config):
    """Runs a full training config. Returns (model dict, path CSV text, t_star)."""
    model, path_csv, t_star = _core.train(_spec(config))
    return json.loads(model), path_csv, t_star
