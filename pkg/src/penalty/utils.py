import logging
from math import sqrt
from typing import Optional

import numpy as np

import src.groups.utils as group_utils
from src.constants import (
    PENALTY_CHECK_WINDOW,
    PENALTY_MAX_ITERS,
    PENALTY_RHO_FREEZE,
    PENALTY_TOL,
    ZERO_THRESHOLD,
)
from src.errors import ConvergenceError, DimensionError, LayoutError
from src.groups.classes import DuplicationMap, GroupLayout
from src.penalty.classes import Decomposition, PenaltyParams
from src.prox.utils import prox_sparse_group_weighted, soft_threshold

logger = logging.getLogger(__name__)


def penalty_value(w: np.ndarray, dup: DuplicationMap, alpha: np.ndarray, beta: np.ndarray) -> float:
    """
    sum_G (alpha_G ||w_G||_2 + beta_G ||w_G||_1) for a vector in the expanded space
    """
    return float(
        np.dot(alpha, group_utils.group_norms(w, dup, ord=2))
        + np.dot(beta, group_utils.group_norms(w, dup, ord=1))
    )


def _check_length(x: np.ndarray, layout: GroupLayout) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (layout.p,):
        raise DimensionError("coefficient vector length", layout.p, x.size)
    return x


def sgl_penalty_disjoint(x: np.ndarray, layout: GroupLayout, params: PenaltyParams) -> float:
    """
    closed-form penalty for non-overlapping groups, where the decomposition is unique and the
    penalty is the sparse group lasso norm

    :param x: vector of length p
    :param layout: a layout with R = 1
    :param params: penalty weights
    :return: sum_G (alpha_G ||x_G||_2 + beta_G ||x_G||_1)
    """
    if layout.R > 1:
        raise LayoutError(
            f"layout has overlapping groups (R = {layout.R}); use eval_penalty instead"
        )
    x = _check_length(x, layout)

    alpha, beta = params.group_weights(layout.K)
    total = 0.0
    for group, a, b in zip(layout.groups, alpha, beta):
        block = x[list(group)]
        total += a * np.linalg.norm(block) + b * np.abs(block).sum()

    return float(total)


def dual_lower_bound(
    y: np.ndarray, x: np.ndarray, dup: DuplicationMap, alpha: np.ndarray, l1_weights: np.ndarray
) -> float:
    """
    lower bound on h(x) from an expanded-space vector y. the copies of every coordinate are
    averaged into v, which is shrunk by c in (0, 1] until ||S_beta(c v_G)||_2 <= alpha_G holds for
    every group, so c v is dual feasible and <c v, x> <= h(x)

    :param y: vector in the expanded space, typically a subgradient of the penalty
    :param x: vector of length p
    :param dup: the duplication map
    :param alpha: group weights
    :param l1_weights: l1 weight per expanded coordinate
    :return: the lower bound, never negative
    """
    v = group_utils.collapse(y, dup) / dup.counts
    spill = group_utils.group_norms(soft_threshold(v[dup.original_index], l1_weights), dup)
    # ||S_b(c v)|| <= c ||S_b(v)|| for c <= 1
    c = float(np.min(alpha / np.maximum(spill, alpha)))

    return max(0.0, c * float(np.dot(v, x)))


def eval_penalty(
    x: np.ndarray,
    layout: GroupLayout,
    params: PenaltyParams,
    tol: float = PENALTY_TOL,
    max_iters: int = PENALTY_MAX_ITERS,
    dup: Optional[DuplicationMap] = None,
) -> Decomposition:
    """
    evaluate the penalty h(x) by solving the decomposition program

        min sum_G (alpha_G ||w_G||_2 + beta_G ||w_G||_1)  s.t.  sum_G w_G = x

    in the expanded space with ADMM. the w-update is the sparse-group proximal map and the
    z-update projects onto the affine set {z : collapse(z) = x}, which is diagonal since every
    coordinate's copies sum to it.

    the loop stops once the ADMM primal and dual residuals are below tol, or once the
    decomposition is feasible to tol and the objective has stalled: either it is within tol of
    the dual lower bound, or its change across a window, extrapolated geometrically, is below
    tol. rho is rebalanced during the first PENALTY_RHO_FREEZE iterations only

    :param x: vector of length p
    :param layout: the group layout
    :param params: penalty weights
    :param tol: stopping tolerance, relative to max(1, ||x||) for residuals and to
        max(1, h(x)) for the objective
    :param max_iters: iteration budget
    :param dup: the duplication map, built from the layout when not given
    :return: the decomposition achieving the infimum up to tol
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    x = _check_length(x, layout)
    dup = dup if dup is not None else group_utils.build_duplication(layout)
    alpha, beta = params.group_weights(layout.K)

    if not np.any(x):
        return Decomposition(w=np.zeros(dup.expanded_dim), objective=0.0, residual=0.0)

    # disjoint groups admit exactly one decomposition
    if layout.R == 1:
        w = group_utils.expand_coeffs(x, dup)
        return Decomposition(w=w, objective=penalty_value(w, dup, alpha, beta), residual=0.0)

    scale = max(1.0, float(np.linalg.norm(x)))
    counts = dup.counts.astype(float)
    index = dup.original_index
    l1_weights = np.repeat(beta, dup.group_sizes)
    relaxation = 1.6

    def project(v: np.ndarray) -> np.ndarray:
        excess = group_utils.collapse(v, dup) - x
        return v - (excess / counts)[index]

    def feasibility(v: np.ndarray) -> float:
        return float(np.linalg.norm(group_utils.collapse(v, dup) - x))

    def converged(w: np.ndarray, iteration: int, reason: str) -> Decomposition:
        objective = penalty_value(w, dup, alpha, beta)
        logger.debug(f"penalty converged in {iteration} iterations ({reason}), objective {objective:.6g}")
        return Decomposition(w=w, objective=objective, residual=feasibility(w), iterations=iteration)

    rho = 1.0
    z = project(np.zeros(dup.expanded_dim))
    u = np.zeros(dup.expanded_dim)
    w = np.zeros(dup.expanded_dim)
    best_w, best_residual = w, np.inf
    previous_objective, previous_change = None, None

    for iteration in range(1, max_iters + 1):
        target = z - u
        w = prox_sparse_group_weighted(target, dup, l1_weights / rho, alpha / rho)
        w_relaxed = relaxation * w + (1.0 - relaxation) * z

        z_old = z
        z = project(w_relaxed + u)
        u = u + w_relaxed - z

        primal = np.linalg.norm(w - z)
        dual = rho * np.linalg.norm(z - z_old)

        if primal < best_residual:
            best_w, best_residual = w, primal

        if primal <= tol * scale and dual <= tol * scale:
            return converged(w, iteration, "residuals")

        if iteration % PENALTY_CHECK_WINDOW == 0:
            objective = penalty_value(w, dup, alpha, beta)
            allowed = tol * max(1.0, objective)

            if feasibility(w) <= tol * scale:
                # rho (target - w) is a subgradient of the penalty at w
                lower = dual_lower_bound(rho * (target - w), x, dup, alpha, l1_weights)
                if objective - lower <= allowed:
                    return converged(w, iteration, "duality gap")

                if previous_objective is not None and iteration > PENALTY_RHO_FREEZE:
                    change = abs(objective - previous_objective)
                    if previous_change is not None and change < previous_change:
                        ratio = change / previous_change
                        if change / (1.0 - ratio) <= allowed:
                            return converged(w, iteration, "objective stall")
                    previous_change = change
            else:
                previous_change = None
            previous_objective = objective

        # residual balancing
        if iteration % 10 == 0 and iteration <= PENALTY_RHO_FREEZE:
            if primal > 10.0 * dual:
                rho *= 2.0
                u /= 2.0
            elif dual > 10.0 * primal:
                rho /= 2.0
                u *= 2.0

    raise ConvergenceError(
        f"penalty evaluation did not converge in {max_iters} iterations",
        best=best_w,
        residual=feasibility(best_w),
    )


def penalty_upper_bound_klsparse(
    x: np.ndarray, layout: GroupLayout, params: PenaltyParams, k: int
) -> float:
    """
    certified upper bound sqrt(k) (1 + lambda1) ||x||_2 on h(x) for a (k, l_target)-group
    sparse x

    :param x: vector of length p, (k, l_target)-group sparse with respect to the layout
    :param layout: the group layout
    :param params: penalty weights (uniform form)
    :param k: number of active groups
    :return: the bound
    """
    x = _check_length(x, layout)
    return sqrt(k) * (1.0 + params.lambda1) * float(np.linalg.norm(x))


def group_l0(x: np.ndarray, layout: GroupLayout, decomposition: Decomposition) -> int:
    """
    number of groups whose block of the decomposition is numerically nonzero. the threshold
    scales with max(1, ||x||_2)

    :param x: the vector the decomposition represents
    :param layout: the group layout
    :param decomposition: output of eval_penalty on x
    :return: the group l0 count
    """
    x = _check_length(x, layout)
    dup = group_utils.build_duplication(layout)
    threshold = ZERO_THRESHOLD * max(1.0, float(np.linalg.norm(x)))
    norms = group_utils.group_norms(decomposition.w, dup)

    return int(np.count_nonzero(norms > threshold))


def active_groups(w: np.ndarray, dup: DuplicationMap, threshold: float = 0.0) -> np.ndarray:
    """
    indices of groups whose block of w has l2 norm above the threshold
    """
    return np.flatnonzero(group_utils.group_norms(w, dup) > threshold)
