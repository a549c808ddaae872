import logging
from typing import List, Tuple

import numpy as np
from scipy.optimize import brentq

import src.groups.utils as group_utils
from src.constants import POWER_ITERATIONS
from src.errors import DimensionError, ModelError, NonFiniteError
from src.groups.classes import DuplicationMap, GroupLayout
from src.penalty.classes import PenaltyParams
from src.prox.utils import soft_threshold
from src.solver.classes import Loss

logger = logging.getLogger(__name__)


def check_data(Phi: np.ndarray, y: np.ndarray, layout: GroupLayout, loss: Loss) -> Tuple[np.ndarray, np.ndarray]:
    """
    validate a design/label pair against a layout and a loss

    :param Phi: n x p design
    :param y: length-n labels
    :param layout: the group layout
    :param loss: the loss the labels are used with
    :return: the design and labels as float arrays
    """
    Phi = np.asarray(Phi, dtype=float)
    y = np.asarray(y, dtype=float).ravel()

    if Phi.ndim != 2:
        raise DimensionError("design must be a matrix; dimensions", 2, Phi.ndim)
    if Phi.shape[1] != layout.p:
        raise DimensionError("design columns vs layout dimension", layout.p, Phi.shape[1])
    if Phi.shape[0] != y.shape[0]:
        raise DimensionError("labels vs design rows", Phi.shape[0], y.shape[0])
    if not np.all(np.isfinite(Phi)):
        raise NonFiniteError("design contains NaN or Inf")
    if not np.all(np.isfinite(y)):
        raise NonFiniteError("labels contain NaN or Inf")
    if loss.is_classification and not np.all(np.abs(y) == 1.0):
        raise ModelError("labels must be ±1 for the linear-classification loss")

    return Phi, y


class SmoothPart:
    """
    the smooth part of the Lagrangian objective, loss(x) + eta2 ||x||^2, evaluated in the
    original space. the solver pulls gradients into the expanded space by copying
    coordinates, which is the same as multiplying by the transposed duplicated design
    """

    def __init__(self, Phi: np.ndarray, y: np.ndarray, loss: Loss, eta2: float):
        self.Phi = Phi
        self.y = y
        self.loss = loss
        self.eta2 = eta2
        self.correlation = Phi.T @ y

    def value(self, x: np.ndarray) -> float:
        ridge = self.eta2 * float(np.dot(x, x))
        if self.loss.is_classification:
            return -float(np.dot(self.correlation, x)) + ridge

        residual = self.y - self.Phi @ x
        return 0.5 * float(np.dot(residual, residual)) + ridge

    def gradient(self, x: np.ndarray) -> np.ndarray:
        if self.loss.is_classification:
            return -self.correlation + 2.0 * self.eta2 * x

        return self.Phi.T @ (self.Phi @ x - self.y) + 2.0 * self.eta2 * x

    def hessian_product(self, x: np.ndarray) -> np.ndarray:
        if self.loss.is_classification:
            return 2.0 * self.eta2 * x

        return self.Phi.T @ (self.Phi @ x) + 2.0 * self.eta2 * x


def lipschitz_estimate(
    smooth: SmoothPart, dup: DuplicationMap, seed: int = 0, iterations: int = POWER_ITERATIONS
) -> float:
    """
    power iteration for the largest eigenvalue of the expanded-space Hessian, i.e. the
    Lipschitz constant of the expanded gradient

    :param smooth: the smooth part of the objective
    :param dup: the duplication map
    :param seed: seed for the random start
    :param iterations: number of power iterations
    :return: the eigenvalue estimate. power iteration approaches it from below
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dup.expanded_dim)
    v /= np.linalg.norm(v)

    eigenvalue = 0.0
    for _ in range(iterations):
        product = smooth.hessian_product(group_utils.collapse(v, dup))[dup.original_index]
        eigenvalue = float(np.linalg.norm(product))
        if eigenvalue == 0.0:
            break
        v = product / eigenvalue

    return eigenvalue


def eta1_max(
    Phi: np.ndarray,
    y: np.ndarray,
    layout: GroupLayout,
    loss: Loss,
    params: PenaltyParams,
) -> float:
    """
    smallest eta1 for which x = 0 solves the Lagrangian problem. w = 0 is optimal when every
    group's gradient block c_G satisfies ||soft(c_G, eta1 beta_G)||_2 <= eta1 alpha_G; the
    boundary value is found per group by root finding

    :param Phi: n x p design
    :param y: labels
    :param layout: the group layout
    :param loss: the loss
    :param params: penalty weights
    :return: the threshold value of eta1
    """
    Phi, y = check_data(Phi, y, layout, loss)
    correlation = Phi.T @ y
    alpha, beta = params.group_weights(layout.K)

    largest = 0.0
    for group, a, b in zip(layout.groups, alpha, beta):
        block = correlation[list(group)]
        norm = float(np.linalg.norm(block))
        if norm == 0.0:
            continue

        def excess(t: float) -> float:
            return float(np.linalg.norm(soft_threshold(block, t * b))) - t * a

        upper = norm / a
        if excess(upper) >= 0.0:
            threshold = upper
        else:
            threshold = brentq(excess, 0.0, upper, xtol=1e-14 * max(1.0, upper))
        largest = max(largest, threshold)

    return largest


def eta1_grid(eta1_max_value: float, num: int = 10, ratio: float = 1e-2) -> List[float]:
    """
    geometric regularization path from eta1_max downwards

    :param eta1_max_value: the largest value (all-zero solution)
    :param num: number of grid points
    :param ratio: smallest value as a fraction of the largest
    :return: decreasing list of eta1 values
    """
    if eta1_max_value <= 0:
        raise ValueError(f"eta1_max must be positive, got {eta1_max_value}")

    return [float(value) for value in np.geomspace(eta1_max_value, eta1_max_value * ratio, num)]


def predict(Phi: np.ndarray, x: np.ndarray, loss: Loss) -> np.ndarray:
    """
    sign(Phi x) with ties sent to +1 for classification, Phi x for regression
    """
    scores = np.asarray(Phi, dtype=float) @ x
    if loss.is_classification:
        return np.where(scores >= 0.0, 1.0, -1.0)

    return scores


def validation_error(Phi: np.ndarray, y: np.ndarray, x: np.ndarray, loss: Loss) -> float:
    """
    misclassification rate for classification, mean squared error for regression
    """
    predictions = predict(Phi, x, loss)
    if loss.is_classification:
        return float(np.mean(predictions != y))

    return float(np.mean((predictions - y) ** 2))


def unit_normalize(x: np.ndarray) -> np.ndarray:
    """
    scale a nonzero vector to unit l2 norm; zero stays zero
    """
    norm = np.linalg.norm(x)
    if norm == 0.0:
        return np.zeros_like(x)

    return x / norm
