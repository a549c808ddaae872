import logging
from math import sqrt
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.linalg import block_diag
from sklearn.model_selection import KFold

import src.groups.utils as group_utils
import src.solver.utils as utils
from src.errors import DimensionError, ModelError, NonFiniteError
from src.groups.classes import DuplicationMap, GroupLayout
from src.penalty.utils import penalty_value
from src.prox.utils import prox_sparse_group_weighted
from src.solver.classes import FitResult, Loss, SolverConfig, StepRule

logger = logging.getLogger(__name__)


def fit(
    Phi: np.ndarray,
    y: np.ndarray,
    layout: GroupLayout,
    loss: Loss,
    config: SolverConfig,
    w_init: Optional[np.ndarray] = None,
    dup: Optional[DuplicationMap] = None,
) -> FitResult:
    """
    fit a sparse overlapping group lasso model by solving the Lagrangian problem

        min loss(x) + eta1 h(x) + eta2 ||x||^2

    with accelerated proximal gradient in the duplicated space, where the penalty is the
    separable sparse group lasso norm. steps that would increase the objective restart the
    momentum from the last accepted iterate, so the objective trace never increases

    :param Phi: n x p design
    :param y: length-n labels (+-1 for classification)
    :param layout: the group layout
    :param loss: the loss
    :param config: solver settings
    :param w_init: optional warm start in the expanded space. defaults to zero
    :param dup: the duplication map, built from the layout when not given
    :return: the fit result
    """
    Phi, y = utils.check_data(Phi, y, layout, loss)
    dup = dup if dup is not None else group_utils.build_duplication(layout)

    if loss.is_classification and config.eta2 == 0.0:
        raise ModelError(
            "the linear-classification loss is unbounded below without a ridge term; set eta2 > 0"
        )

    smooth = utils.SmoothPart(Phi, y, loss, config.eta2)
    alpha, beta = config.params.group_weights(layout.K)
    l1_weights = config.eta1 * np.repeat(beta, dup.group_sizes)
    group_weights = config.eta1 * alpha
    index = dup.original_index

    def smooth_value(w: np.ndarray) -> float:
        return smooth.value(group_utils.collapse(w, dup))

    def smooth_gradient(w: np.ndarray) -> np.ndarray:
        return smooth.gradient(group_utils.collapse(w, dup))[index]

    def objective(w: np.ndarray, smooth_part: float) -> float:
        return smooth_part + config.eta1 * penalty_value(w, dup, alpha, beta)

    if config.step_size is not None:
        step = config.step_size
    else:
        lipschitz = utils.lipschitz_estimate(smooth, dup, seed=config.seed)
        step = 1.0 / lipschitz if lipschitz > 0 else 1.0

    def prox_step(point: np.ndarray, gradient: np.ndarray, smooth_point: float, step: float):
        # returns the candidate, its smooth value and the step size that was accepted
        while True:
            candidate = prox_sparse_group_weighted(
                point - step * gradient, dup, step * l1_weights, step * group_weights
            )
            smooth_candidate = smooth_value(candidate)
            if config.step_rule == StepRule.FIXED:
                return candidate, smooth_candidate, step

            difference = candidate - point
            model = smooth_point + float(np.dot(gradient, difference)) + float(np.dot(difference, difference)) / (2.0 * step)
            if smooth_candidate <= model + 1e-12 * max(1.0, abs(model)):
                return candidate, smooth_candidate, step
            step *= config.backtracking_factor

    w = np.zeros(dup.expanded_dim) if w_init is None else np.asarray(w_init, dtype=float).copy()
    if w.shape != (dup.expanded_dim,):
        raise DimensionError("warm start length", dup.expanded_dim, w.size)

    smooth_w = smooth_value(w)
    objective_w = objective(w, smooth_w)
    trace = [objective_w]
    if not np.isfinite(objective_w):
        raise NonFiniteError("objective is non-finite at the initial point", snapshot=w)

    momentum_point = w
    extrapolated = False
    t = 1.0
    converged = False
    iteration = 0

    for iteration in range(1, config.max_iters + 1):
        restarted = False
        smooth_point = smooth_value(momentum_point)
        candidate, smooth_candidate, step = prox_step(
            momentum_point, smooth_gradient(momentum_point), smooth_point, step
        )
        objective_candidate = objective(candidate, smooth_candidate)

        if not np.isfinite(objective_candidate):
            raise NonFiniteError(
                f"objective became non-finite at iteration {iteration}", snapshot=momentum_point
            )

        if objective_candidate > objective_w and extrapolated:
            restarted = True
            t = 1.0
            candidate, smooth_candidate, step = prox_step(w, smooth_gradient(w), smooth_w, step)
            objective_candidate = objective(candidate, smooth_candidate)

        # a step that raises the objective beyond round-off is rejected and never counts as convergence
        rejected = objective_candidate > objective_w + 1e-12 * max(1.0, abs(objective_w))
        if rejected and config.step_rule == StepRule.FIXED:
            step *= config.backtracking_factor
            t = 1.0
            logger.warning(f"fixed step rejected at iteration {iteration}; reducing it to {step:.3g}")

        if objective_candidate > objective_w:
            # keep the accepted iterate
            candidate, smooth_candidate, objective_candidate = w, smooth_w, objective_w

        change = (objective_w - objective_candidate) / max(1.0, abs(objective_w))

        coefficient = 0.0
        if config.acceleration:
            t_next = (1.0 + sqrt(1.0 + 4.0 * t * t)) / 2.0
            coefficient = (t - 1.0) / t_next
            t = t_next

        extrapolated = coefficient > 0.0 and bool(np.any(candidate != w))
        momentum_point = candidate + coefficient * (candidate - w) if extrapolated else candidate

        w, smooth_w, objective_w = candidate, smooth_candidate, objective_candidate
        trace.append(objective_w)

        if iteration % 100 == 0:
            logger.debug(f"iteration {iteration}: objective {objective_w:.10g}, step {step:.3g}")

        if not (restarted or rejected) and iteration > 1 and change <= config.rel_tol:
            converged = True
            break

    if not converged:
        logger.warning(f"solver hit max_iters={config.max_iters} without converging")

    x_raw = group_utils.collapse(w, dup)
    support = tuple(int(i) for i in np.flatnonzero(x_raw))
    active = tuple(int(g) for g in np.flatnonzero(group_utils.group_norms(w, dup) > 0.0))

    result = FitResult(
        x_hat=x_raw,
        x_raw=x_raw,
        w_hat=w,
        objective_trace=trace,
        iterations=iteration,
        converged=converged,
        support=support,
        active_groups=active,
        step_size=step,
    )

    if config.debias:
        x_hat, rank_deficient = debias(result, Phi, y, loss)
        result = result.model_copy(update={"x_hat": x_hat, "debias_rank_deficient": rank_deficient})

    logger.debug(
        f"fit finished after {iteration} iterations: {len(support)} coordinates, {len(active)} groups"
    )
    return result


def debias(result: FitResult, Phi: np.ndarray, y: np.ndarray, loss: Loss) -> Tuple[np.ndarray, bool]:
    """
    unpenalized least-squares refit restricted to the selected support. for the
    linear-classification loss the refit of the +-1 labels is scaled to unit norm, since only
    the direction of the coefficient vector is identifiable

    :param result: a fit result
    :param Phi: n x p design
    :param y: labels
    :param loss: the loss
    :return: the refit coefficients (zero off the support) and whether the restricted
        system was rank deficient, in which case the minimum-norm solution is returned
    """
    Phi = np.asarray(Phi, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    x = np.zeros(Phi.shape[1])
    support = list(result.support)
    if not support:
        return x, False

    restricted = Phi[:, support]
    coefficients, _, rank, _ = np.linalg.lstsq(restricted, y, rcond=None)
    rank_deficient = bool(rank < len(support))
    if rank_deficient:
        logger.warning(
            f"debias system on {len(support)} coordinates has rank {rank}; using the minimum-norm solution"
        )

    x[support] = coefficients
    if loss.is_classification:
        x = utils.unit_normalize(x)

    return x, rank_deficient


def _cv_cell(
    Phi: np.ndarray,
    y: np.ndarray,
    layout: GroupLayout,
    loss: Loss,
    config: SolverConfig,
    train: np.ndarray,
    test: np.ndarray,
) -> float:
    if loss.is_classification and np.unique(y[train]).size < 2:
        return np.nan

    result = fit(Phi[train], y[train], layout, loss, config)
    return utils.validation_error(Phi[test], y[test], result.x_hat, loss)


def cross_validate(
    Phi: np.ndarray,
    y: np.ndarray,
    layout: GroupLayout,
    loss: Loss,
    grid: Sequence[SolverConfig],
    folds: int = 4,
    seed: int = 0,
    jobs: int = 1,
) -> Tuple[SolverConfig, pd.DataFrame]:
    """
    k-fold cross validation over a grid of solver configurations. folds are assigned from
    the seed, so the same seed gives the same table. ties go to the larger eta1

    :param Phi: n x p design
    :param y: labels
    :param layout: the group layout
    :param loss: the loss. misclassification rate is the validation metric for
        classification, mean squared error for regression
    :param grid: the configurations to compare
    :param folds: number of folds
    :param seed: seed of the fold assignment
    :param jobs: number of joblib workers
    :return: the best configuration and the per-configuration table
    """
    if folds < 2:
        raise ValueError(f"cross validation needs at least 2 folds, got {folds}")
    if len(grid) == 0:
        raise ValueError("the configuration grid is empty")

    Phi, y = utils.check_data(Phi, y, layout, loss)
    splits = list(KFold(n_splits=folds, shuffle=True, random_state=seed).split(Phi))

    cells = [(config_id, fold_id) for config_id in range(len(grid)) for fold_id in range(len(splits))]
    errors = Parallel(n_jobs=jobs)(
        delayed(_cv_cell)(Phi, y, layout, loss, grid[config_id], *splits[fold_id])
        for config_id, fold_id in cells
    )
    errors = np.asarray(errors, dtype=float).reshape(len(grid), len(splits))

    skipped = np.isnan(errors[0]).sum()
    if skipped:
        logger.warning(f"skipped {skipped} fold(s) whose training labels contain a single class")

    rows = list()
    for config_id, config in enumerate(grid):
        used = errors[config_id][~np.isnan(errors[config_id])]
        rows.append(
            {
                "config": config_id,
                "eta1": config.eta1,
                "eta2": config.eta2,
                "lambda1": config.params.lambda1,
                "l_target": config.params.l_target,
                "mean_error": float(used.mean()) if used.size else np.nan,
                "folds_used": int(used.size),
            }
        )
    table = pd.DataFrame(rows)

    if table["mean_error"].isna().all():
        raise ModelError("every cross-validation fold was skipped")

    ranked = table.sort_values(["mean_error", "eta1"], ascending=[True, False], kind="mergesort")
    best = grid[int(ranked.iloc[0]["config"])]
    logger.info(f"cross validation picked eta1={best.eta1:.4g}, lambda1={best.params.lambda1:.4g}")

    return best, table


def stack_multitask(
    Phis: Sequence[np.ndarray], ys: Sequence[np.ndarray], base_layout: GroupLayout
) -> Tuple[np.ndarray, np.ndarray, GroupLayout]:
    """
    reduce a multitask problem to a single one: block-diagonal design, stacked labels and
    groups that aggregate each base group across tasks

    :param Phis: one n x p design per task
    :param ys: one label vector per task
    :param base_layout: the groups over the p features shared by every task
    :return: the block-diagonal design, stacked labels and stacked layout over T * p coordinates
    """
    if len(Phis) != len(ys) or len(Phis) == 0:
        raise DimensionError("number of label vectors vs designs", len(Phis), len(ys))

    p = base_layout.p
    for task, (Phi, y) in enumerate(zip(Phis, ys)):
        Phi = np.asarray(Phi)
        if Phi.ndim != 2 or Phi.shape[1] != p:
            raise DimensionError(f"task {task} design columns", p, Phi.shape[-1])
        if Phi.shape[0] != np.asarray(y).size:
            raise DimensionError(f"task {task} labels vs design rows", Phi.shape[0], np.asarray(y).size)

    num_tasks = len(Phis)
    stacked_groups: List[List[int]] = [
        [task * p + i for task in range(num_tasks) for i in group] for group in base_layout.groups
    ]
    Phi_block = block_diag(*[np.asarray(Phi, dtype=float) for Phi in Phis])
    y_stacked = np.concatenate([np.asarray(y, dtype=float).ravel() for y in ys])

    return Phi_block, y_stacked, group_utils.build_layout(stacked_groups, num_tasks * p)
