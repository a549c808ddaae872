import logging
from itertools import product
from math import log, sqrt
from pathlib import Path
from time import perf_counter
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

import src.groups.utils as group_utils
import src.meanwidth.utils as width_utils
import src.penalty.utils as penalty_utils
import src.simulate.utils as simulate_utils
import src.solver.commands as solver
import src.solver.utils as solver_utils
import src.utils as io_utils
from src.cli.classes import ExperimentKind, ExperimentSpec, Method, Tuning
from src.cli.utils import build_solver_grid
from src.constants import TABLE_TOLERANCE, ZERO_THRESHOLD
from src.errors import EnumerationLimitError, SoglassoError
from src.groups.classes import GroupKind, GroupLayout
from src.penalty.classes import PenaltyParams
from src.simulate.classes import CovarianceKind, DesignSpec, ObservationKind, ObservationModel
from src.solver.classes import FitResult, Loss, LossKind, SolverConfig

logger = logging.getLogger(__name__)

TOY_LAMBDA1_GRID = {
    Method.LASSO: (0.0,),
    Method.GLASSO: (0.0,),
    Method.OGLASSO: (0.0,),
    Method.SOGLASSO: (0.1, 0.3, 1.0, 3.0),
}
TOY_PATH_LENGTH = 12
TOY_PATH_RATIO = 1e-2
CV_PATH_LENGTH = 8
CV_FOLDS = 4


def _progress(items: Sequence, description: str, disable: bool) -> tqdm:
    return tqdm(items, desc=description, disable=disable, leave=False)


def run_fit(
    design: Path, labels: Path, groups: Path, config: Path, header: bool = False
) -> Tuple[FitResult, GroupLayout]:
    """
    fit one model from files

    :param design: n x p design CSV
    :param labels: label file, one value per line
    :param groups: group file
    :param config: config file with a single value per key
    :param header: whether the design CSV has a header line
    :return: the fit result and the layout it was fit with
    """
    Phi = io_utils.read_matrix(design, header=header)
    y = io_utils.read_vector(labels)
    layout = group_utils.build_layout(group_utils.read_group_file(groups), Phi.shape[1])

    loss, grid, _ = build_solver_grid(config)
    if len(grid) != 1:
        raise SoglassoError(f"{config} describes {len(grid)} configurations; fit takes exactly one")

    result = solver.fit(Phi, y, layout, loss, grid[0])
    logger.info(
        f"fit {'converged' if result.converged else 'stopped'} after {result.iterations} iterations "
        f"with {len(result.support)} nonzero coordinates"
    )
    return result, layout


def run_cv(
    design: Path,
    labels: Path,
    groups: Path,
    config: Path,
    seed: int = 0,
    jobs: int = 1,
    header: bool = False,
) -> Tuple[SolverConfig, pd.DataFrame]:
    """
    cross validate a grid of configurations read from a config file
    """
    Phi = io_utils.read_matrix(design, header=header)
    y = io_utils.read_vector(labels)
    layout = group_utils.build_layout(group_utils.read_group_file(groups), Phi.shape[1])
    loss, grid, folds = build_solver_grid(config)

    return solver.cross_validate(Phi, y, layout, loss, grid, folds=folds, seed=seed, jobs=jobs)


def run_penalty(vector: Path, groups: Path, params: PenaltyParams) -> Dict:
    """
    evaluate h(x) for a vector file and a group file
    """
    x = io_utils.read_vector(vector)
    layout = group_utils.build_layout(group_utils.read_group_file(groups), x.size)
    decomposition = penalty_utils.eval_penalty(x, layout, params)
    dup = group_utils.build_duplication(layout)
    threshold = ZERO_THRESHOLD * max(1.0, float(np.linalg.norm(x)))

    return {
        "objective": decomposition.objective,
        "residual": decomposition.residual,
        "group_l0": penalty_utils.group_l0(x, layout, decomposition),
        "active_groups": [int(g) for g in penalty_utils.active_groups(decomposition.w, dup, threshold)],
        "iterations": decomposition.iterations,
    }


def generate_groups(
    kind: GroupKind,
    num_groups: int = 1,
    size: int = 1,
    shift: Optional[int] = None,
    p: Optional[int] = None,
    shape: Tuple[int, int, int] = (1, 1, 1),
    block: Tuple[int, int, int] = (5, 5, 1),
    grid_shift: Tuple[int, int, int] = (2, 2, 1),
) -> Tuple[List[List[int]], int]:
    """
    build one of the standard group layouts

    :return: the groups and the dimension they cover
    """
    match kind:
        case GroupKind.CHAIN:
            groups = group_utils.chain_groups(num_groups, size, shift if shift is not None else size)
        case GroupKind.DISJOINT:
            groups = group_utils.disjoint_groups(num_groups, size)
        case GroupKind.SINGLETON:
            if p is None:
                raise SoglassoError("singleton groups need the dimension p")
            groups = group_utils.singleton_groups(p)
        case GroupKind.GRID:
            groups = group_utils.grid_groups(shape, block, grid_shift)
        case _:
            raise ValueError(f"unexpected group kind {kind}")

    return groups, group_utils.infer_dimension(groups)


def method_layout(method: Method, layout: GroupLayout, group_size: int) -> GroupLayout:
    """
    the layout a method fits with: singleton groups for lasso, a disjoint partition into
    blocks of group_size for glasso (the layout itself when it's already disjoint), the
    given layout otherwise
    """
    match method:
        case Method.LASSO:
            return group_utils.build_layout(group_utils.singleton_groups(layout.p), layout.p)
        case Method.GLASSO:
            if layout.is_disjoint:
                return layout
            return group_utils.build_layout(group_utils.partition_groups(layout.p, group_size), layout.p)
        case Method.OGLASSO | Method.SOGLASSO:
            return layout
        case _:
            raise ValueError(f"unexpected method {method}")


def method_params(method: Method, l: int, lambda1: float = 1.0) -> PenaltyParams:
    if method == Method.SOGLASSO:
        return PenaltyParams(lambda1=lambda1, l_target=l)
    return PenaltyParams(lambda1=0.0, l_target=1)


def _loss(model: ObservationModel) -> Loss:
    if model.is_classification:
        return Loss(kind=LossKind.LINEAR_CLASSIFICATION)
    return Loss(kind=LossKind.SQUARED)


def _sq_error(estimate: np.ndarray, x_star: np.ndarray, classification: bool) -> float:
    if classification:
        estimate = solver_utils.unit_normalize(estimate)
    return float(np.sum((estimate - x_star) ** 2))


def _tuned_config(
    Phi: np.ndarray,
    y: np.ndarray,
    layout: GroupLayout,
    loss: Loss,
    params: PenaltyParams,
    spec: ExperimentSpec,
) -> SolverConfig:
    n, p = Phi.shape
    eta2 = 1.0 if loss.is_classification else 0.0
    fixed = SolverConfig(
        eta1=spec.eta1_scale * sqrt(n * max(log(p), 1.0)), eta2=eta2, params=params, debias=True
    )
    if spec.tuning == Tuning.FIXED:
        return fixed

    largest = solver_utils.eta1_max(Phi, y, layout, loss, params)
    if largest <= 0.0:
        return fixed

    grid = [
        fixed.model_copy(update={"eta1": eta1})
        for eta1 in solver_utils.eta1_grid(largest, CV_PATH_LENGTH, TOY_PATH_RATIO)
    ]
    best, _ = solver.cross_validate(Phi, y, layout, loss, grid, folds=CV_FOLDS, seed=spec.seed)
    return best


def _phase_trial(
    spec: ExperimentSpec,
    layout: GroupLayout,
    layouts: Dict[Method, GroupLayout],
    l: int,
    trial: int,
    n: int,
    rho: float,
    reproducible: bool,
) -> List[Dict]:
    # rho is left out of the seed so every correlation level sees the same draws
    rng = simulate_utils.trial_rng(spec.seed, trial, n)
    truth = simulate_utils.gen_ground_truth(layout, spec.k, l, rng)
    design = DesignSpec(
        n=n,
        p=layout.p,
        covariance=CovarianceKind.IDENTITY if rho == 0.0 else CovarianceKind.AR1,
        rho=rho,
    )
    Phi = simulate_utils.gen_design(design, rng)
    y = simulate_utils.gen_labels(Phi, truth.x_star, spec.model, rng)
    kappa = simulate_utils.condition_number(design)
    loss = _loss(spec.model)

    rows = list()
    for method in spec.methods:
        row = {"method": method.value, "n": n, "trial": trial}
        start = perf_counter()
        try:
            params = method_params(method, l)
            config = _tuned_config(Phi, y, layouts[method], loss, params, spec)
            result = solver.fit(Phi, y, layouts[method], loss, config)
            row["sq_error"] = _sq_error(result.x_hat, truth.x_star, loss.is_classification)
            row["sq_error_raw"] = _sq_error(result.x_raw, truth.x_star, loss.is_classification)
            row["support_size"] = len(result.support)
        except (SoglassoError, np.linalg.LinAlgError) as e:
            logger.warning(f"{method.value} failed on trial {trial} at n={n}, rho={rho}: {e}")
            row.update({"sq_error": np.nan, "sq_error_raw": np.nan, "support_size": -1})

        row["seconds"] = 0.0 if reproducible else perf_counter() - start
        row["rho"] = rho
        row["kappa"] = kappa
        rows.append(row)

    return rows


def phase_layout(spec: ExperimentSpec) -> GroupLayout:
    groups = group_utils.chain_groups(spec.num_groups, spec.group_size, spec.shift)
    return group_utils.build_layout(groups, spec.p)


def run_phase(
    spec: ExperimentSpec, jobs: int = 1, reproducible: bool = False, eps: float = 0.1
) -> Tuple[pd.DataFrame, pd.DataFrame, int]:
    """
    recovery curves: for every n, correlation level and trial, draw a ground truth, design and
    labels and record each method's squared estimation error. classification estimates are
    scaled to unit norm before comparing

    :param spec: the experiment
    :param jobs: number of joblib workers
    :param reproducible: write zero timings so reruns are byte-identical
    :param eps: target error of the predicted sample sizes in the summary
    :return: the per-trial table, the per-(method, n, rho) summary and the number of points
        where the mean error rises with n by more than two standard errors
    """
    if spec.kind != ExperimentKind.PHASE:
        raise SoglassoError(f"run_phase got a {spec.kind.value} experiment")
    layout = phase_layout(spec)
    l = spec.l if spec.l is not None else 1
    if l > layout.L:
        raise SoglassoError(f"l = {l} exceeds the group size {layout.L}")
    layouts = {method: method_layout(method, layout, spec.group_size) for method in spec.methods}
    logger.info(f"phase experiment on p={layout.p}, K={layout.K}, L={layout.L}, R={layout.R}")

    tasks = list(product(spec.rho_grid, spec.n_grid, range(spec.trials)))
    batches = Parallel(n_jobs=jobs)(
        delayed(_phase_trial)(spec, layout, layouts, l, trial, n, rho, reproducible)
        for rho, n, trial in _progress(tasks, "phase", reproducible)
    )
    results = pd.DataFrame([row for batch in batches for row in batch])
    results = results[
        ["method", "n", "trial", "sq_error", "seconds", "rho", "kappa", "sq_error_raw", "support_size"]
    ]

    summary, violations = summarize_phase(results, spec, layouts, l, eps)
    return results, summary, violations


def summarize_phase(
    results: pd.DataFrame,
    spec: ExperimentSpec,
    layouts: Dict[Method, GroupLayout],
    l: int,
    eps: float,
) -> Tuple[pd.DataFrame, int]:
    """
    mean error per (method, rho, n) with its standard error and the predicted sample sizes,
    plus a count of monotonicity violations along n
    """
    grouped = results.groupby(["method", "rho", "n"], sort=False)["sq_error"]
    summary = grouped.agg(
        mean_sq_error="mean",
        std_error=lambda errors: errors.std(ddof=1) / sqrt(max(errors.count(), 1)),
        trials_used="count",
    ).reset_index()
    summary["kappa"] = results.groupby(["method", "rho", "n"], sort=False)["kappa"].first().to_numpy()

    noise_level = simulate_utils.sigma_f(spec.model) if spec.model.is_classification else 1.0
    predictions = dict()
    for method, layout in layouts.items():
        # under singleton groups the k active groups of l coordinates are k * l singletons
        k, group_l = (spec.k * l, 1) if method == Method.LASSO else (spec.k, l)
        predictions[method.value] = width_utils.sample_complexity(
            layout.K, k, layout.L, group_l, layout.R, layout.p,
            method_params(method, l).lambda1, noise_level, eps,
        )
    summary["predicted_n_nonconvex"] = [predictions[m]["nonconvex"] for m in summary["method"]]
    summary["predicted_n_convex"] = [predictions[m]["convex"] for m in summary["method"]]

    violations = 0
    for (method, rho), curve in summary.groupby(["method", "rho"], sort=False):
        curve = curve.sort_values("n")
        means = curve["mean_sq_error"].to_numpy()
        errors = np.nan_to_num(curve["std_error"].to_numpy())
        for i in range(1, len(means)):
            if means[i] > means[i - 1] + 2.0 * max(errors[i], errors[i - 1]):
                violations += 1
                logger.warning(
                    f"{method} at rho={rho}: mean error rises from {means[i - 1]:.4g} to {means[i]:.4g} "
                    f"between n={curve['n'].iloc[i - 1]} and n={curve['n'].iloc[i]}"
                )

    return summary, violations


def _clairvoyant_mse(
    Phi: np.ndarray,
    y: np.ndarray,
    layout: GroupLayout,
    x_star: np.ndarray,
    method: Method,
    l: int,
) -> float:
    # best mean squared coefficient error over the whole regularization grid
    loss = Loss(kind=LossKind.SQUARED)
    dup = group_utils.build_duplication(layout)
    best = np.inf
    for lambda1 in TOY_LAMBDA1_GRID[method]:
        params = method_params(method, l, lambda1)
        largest = solver_utils.eta1_max(Phi, y, layout, loss, params)
        if largest <= 0.0:
            best = min(best, float(np.mean(x_star**2)))
            continue

        w = None
        for eta1 in solver_utils.eta1_grid(largest, TOY_PATH_LENGTH, TOY_PATH_RATIO):
            config = SolverConfig(eta1=eta1, eta2=0.0, params=params)
            result = solver.fit(Phi, y, layout, loss, config, w_init=w, dup=dup)
            w = result.w_hat
            best = min(best, float(np.mean((result.x_raw - x_star) ** 2)))

    return best


def toy_base_layout(method: Method, chain: GroupLayout) -> GroupLayout:
    """
    the per-task layout a toy-regression method is stacked from. glasso is the multitask group
    lasso whose groups are the rows of the coefficient matrix, one feature across every task, so
    it stacks singleton groups. with a single task it coincides with the lasso
    """
    if method == Method.GLASSO:
        return group_utils.build_layout(group_utils.singleton_groups(chain.p), chain.p)
    return chain


def _toy_trial(
    spec: ExperimentSpec,
    base_layouts: Dict[Method, GroupLayout],
    alpha_id: int,
    alpha: float,
    trial: int,
) -> List[Dict]:
    rng = simulate_utils.trial_rng(spec.seed, trial, alpha_id)
    n = spec.n_grid[0]
    chain = base_layouts[Method.OGLASSO]
    Phis = [simulate_utils.gen_design(DesignSpec(n=n, p=chain.p), rng) for _ in range(spec.tasks)]
    empty = [np.zeros(n)] * spec.tasks

    Phi, _, stacked = solver.stack_multitask(Phis, empty, chain)
    layouts = dict()
    for method in spec.methods:
        if method == Method.LASSO:
            layouts[method] = method_layout(method, stacked, spec.group_size)
        else:
            layouts[method] = solver.stack_multitask(Phis, empty, base_layouts[method])[2]
    l = simulate_utils.alpha_to_l(alpha, stacked.L)
    truth = simulate_utils.gen_ground_truth(stacked, spec.k, l, rng)
    y = simulate_utils.gen_labels(Phi, truth.x_star, spec.model, rng)

    rows = list()
    for method in spec.methods:
        try:
            mse = _clairvoyant_mse(Phi, y, layouts[method], truth.x_star, method, l)
        except (SoglassoError, np.linalg.LinAlgError) as e:
            logger.warning(f"{method.value} failed on trial {trial} at alpha={alpha}: {e}")
            mse = np.nan
        rows.append({"method": method.value, "alpha": alpha, "l": l, "trial": trial, "mse": mse})

    return rows


def run_toy_regression(spec: ExperimentSpec, jobs: int = 1, reproducible: bool = False) -> pd.DataFrame:
    """
    multitask regression on an overlapping chain of groups. for every alpha, each method's
    regularization is picked clairvoyantly to minimize the coefficient mean squared error

    :param spec: the experiment. the first entry of n_grid is the number of measurements
        per task and model should be the linear model
    :param jobs: number of joblib workers
    :param reproducible: disable the progress bar
    :return: mean MSE with standard error per (method, alpha)
    """
    if spec.kind != ExperimentKind.TOY_REGRESSION:
        raise SoglassoError(f"run_toy_regression got a {spec.kind.value} experiment")
    if spec.model.kind != ObservationKind.LINEAR:
        raise SoglassoError("toy regression needs the linear observation model")

    chain = phase_layout(spec)
    base_layouts = {method: toy_base_layout(method, chain) for method in Method}
    logger.info(f"toy regression on {spec.tasks} task(s) over p={chain.p} ({chain.K} groups)")

    tasks = list(product(enumerate(spec.alpha_grid), range(spec.trials)))
    batches = Parallel(n_jobs=jobs)(
        delayed(_toy_trial)(spec, base_layouts, alpha_id, alpha, trial)
        for (alpha_id, alpha), trial in _progress(tasks, "toy-regression", reproducible)
    )
    trials = pd.DataFrame([row for batch in batches for row in batch])

    summary = (
        trials.groupby(["method", "alpha", "l"], sort=False)["mse"]
        .agg(
            mean_mse="mean",
            std_error=lambda mse: mse.std(ddof=1) / sqrt(max(mse.count(), 1)),
            trials="count",
        )
        .reset_index()
    )
    return summary[["method", "alpha", "mean_mse", "std_error", "l", "trials"]]


def _width_row(K: int, L: int, k: int, l: int, trials: int, seed: int, index: int, exhaustive: bool) -> Dict:
    layout = group_utils.build_layout(group_utils.disjoint_groups(K, L), K * L)
    row = {"check": "width", "K": K, "L": L, "k": k, "l": l, "d": np.nan}
    try:
        estimate = width_utils.width_nc_exact(
            layout, k, l, trials, simulate_utils.trial_rng(seed, index), exhaustive=exhaustive
        )
    except EnumerationLimitError as e:
        logger.warning(f"skipping width row K={K}, L={L}, k={k}, l={l}: {e}")
        return {**row, "empirical": np.nan, "std_error": np.nan, "bound": np.nan, "bound_nc": np.nan, "status": "skipped"}

    bound = width_utils.bound_nc_counting(K, k, L, l)
    bound_nc = width_utils.bound_nc(K, k, L, l)
    passed = estimate.below(bound) and estimate.below(bound_nc)
    return {
        **row,
        "empirical": estimate.mean_square,
        "std_error": estimate.mean_square_std_error,
        "bound": bound,
        "bound_nc": bound_nc,
        "status": "pass" if passed else "fail",
    }


def _ordering_row(K: int, L: int, sparsity: Sequence[Tuple[int, int]], trials: int, seed: int, index: int) -> Dict:
    # the same draws are used for every (k, l), so containment must hold draw by draw
    layout = group_utils.build_layout(group_utils.disjoint_groups(K, L), K * L)
    g = simulate_utils.trial_rng(seed, index).standard_normal((trials, layout.p))
    sups = {(k, l): width_utils.sup_nc(g, layout, k, l) for k, l in sparsity}

    violations = 0
    for (k, l), (k2, l2) in product(sups, sups):
        if k <= k2 and l <= l2:
            violations += int(np.sum(sups[(k, l)] > sups[(k2, l2)] + 1e-12))

    return {
        "check": "ordering", "K": K, "L": L, "k": np.nan, "l": np.nan, "d": np.nan,
        "empirical": float(violations), "std_error": 0.0, "bound": 0.0, "bound_nc": np.nan,
        "status": "pass" if violations == 0 else "fail",
    }


def _chisq_row(K: int, d: int, trials: int, seed: int, index: int) -> Dict:
    check = width_utils.chisq_max_check(K, d, trials, simulate_utils.trial_rng(seed, index))
    return {
        "check": "chisq", "K": K, "L": np.nan, "k": np.nan, "l": np.nan, "d": d,
        "empirical": check.empirical_mean, "std_error": check.std_error, "bound": check.bound,
        "bound_nc": np.nan, "status": "pass" if check.holds else "fail",
    }


def _relaxation_row(K: int, L: int, k: int, l: int, trials: int, seed: int, index: int) -> Dict:
    layout = group_utils.build_layout(group_utils.disjoint_groups(K, L), K * L)
    check = width_utils.relaxation_check(
        layout, k, l, PenaltyParams(lambda1=1.0, l_target=l), trials, simulate_utils.trial_rng(seed, index)
    )
    witness_ok = check.witness_ratio is None or abs(check.witness_ratio - 1.0) <= 1e-4
    return {
        "check": "relaxation", "K": K, "L": L, "k": k, "l": l, "d": np.nan,
        "empirical": check.worst_ratio, "std_error": 0.0, "bound": 1.0,
        "bound_nc": check.witness_ratio if check.witness_ratio is not None else np.nan,
        "status": "pass" if check.holds() and witness_ok else "fail",
    }


def run_width(
    seed: int = 0,
    jobs: int = 1,
    reproducible: bool = False,
    K_grid: Sequence[int] = (5, 10),
    L_grid: Sequence[int] = (4, 5),
    k_grid: Sequence[int] = (1, 2),
    l_grid: Sequence[int] = (1, 2),
    trials: int = 2000,
    chisq_K_grid: Sequence[int] = (1, 2, 10, 100),
    chisq_d_grid: Sequence[int] = (1, 5, 20),
    chisq_trials: int = 1000,
    relaxation_trials: int = 200,
    exhaustive: bool = False,
) -> Tuple[pd.DataFrame, int]:
    """
    the mean-width checks on disjoint layouts: Monte Carlo E[sup^2] against the squared
    bounds (including K = k, L = l boundary rows), per-draw ordering under growing (k, l),
    the chi-square maximum bound and the relaxation ratio

    :return: one row per check and the number of failed rows
    """
    sparsity = [(k, l) for k, l in product(k_grid, l_grid)]
    instances = [(K, L, k, l) for K, L in product(K_grid, L_grid) for k, l in sparsity if k <= K and l <= L]
    boundary = [(k, l, k, l) for k, l in sparsity]

    jobs_list = list()
    for K, L, k, l in instances + boundary:
        jobs_list.append(delayed(_width_row)(K, L, k, l, trials, seed, len(jobs_list), exhaustive))
    for K, L in product(K_grid, L_grid):
        valid = [(k, l) for k, l in sparsity if k <= K and l <= L]
        jobs_list.append(delayed(_ordering_row)(K, L, valid, trials, seed, len(jobs_list)))
    for K, d in product(chisq_K_grid, chisq_d_grid):
        jobs_list.append(delayed(_chisq_row)(K, d, chisq_trials, seed, len(jobs_list)))
    for K, L, k, l in instances:
        jobs_list.append(delayed(_relaxation_row)(K, L, k, l, relaxation_trials, seed, len(jobs_list)))

    rows = Parallel(n_jobs=jobs)(_progress(jobs_list, "width", reproducible))
    table = pd.DataFrame(rows)
    failures = int((table["status"] == "fail").sum())

    return table, failures


def _disjoint_reference_vectors() -> List[Tuple[str, np.ndarray, Tuple[float, float, float]]]:
    rows = list()
    for name, support, values, expected in (
        ("row1", [0, 3, 8], [3, 4, 7], (12.0, 14.0, 26.0)),
        ("row2", [0, 1, 2, 3, 4], [2, 5, 2, 4, 5], (8.602, 18.0, 26.602)),
        ("row3", [0, 2, 3], [3, 4, 7], (8.602, 14.0, 22.602)),
    ):
        x = np.zeros(10)
        x[support] = values
        rows.append((name, x, expected))
    return rows


def penalty_table(tol: float = TABLE_TOLERANCE) -> Tuple[pd.DataFrame, int]:
    """
    recompute two reference tables: the group-l2, l1 and total penalty of three 10-d vectors
    on two disjoint groups of five, and the penalty of e_2 + e_4 + e_6 on three overlapping
    groups at mu in {0.1, 1, 10}, where the optimum sqrt(3) + 3 mu must also undercut the
    other listed decompositions

    :param tol: largest accepted absolute difference
    :return: the comparison table and the number of failed cells
    """
    rows = list()

    disjoint = group_utils.build_layout(group_utils.disjoint_groups(2, 5), 10)
    unit_weights = PenaltyParams(per_group_weights=((1.0, 1.0), (1.0, 1.0)))
    for name, x, (group_part, l1_part, total) in _disjoint_reference_vectors():
        computed = (
            float(sum(np.linalg.norm(x[list(group)]) for group in disjoint.groups)),
            float(np.abs(x).sum()),
            penalty_utils.sgl_penalty_disjoint(x, disjoint, unit_weights),
        )
        for quantity, expected, value in zip(("group_l2", "l1", "total"), (group_part, l1_part, total), computed):
            delta = abs(value - expected)
            rows.append(
                {"table": "disjoint", "case": name, "quantity": quantity, "expected": expected,
                 "computed": value, "abs_delta": delta, "ok": delta <= tol}
            )

    overlapping = group_utils.build_layout([[0, 1, 2, 3], [2, 3, 4, 5, 6], [6, 7, 8, 9]], 10)
    x = np.zeros(10)
    x[[2, 4, 6]] = 1.0
    for mu in (0.1, 1.0, 10.0):
        objective = penalty_utils.eval_penalty(x, overlapping, PenaltyParams(lambda1=mu, l_target=1)).objective
        optimum = sqrt(3.0) + 3.0 * mu
        delta = abs(objective - optimum)
        rows.append(
            {"table": "overlapping", "case": f"mu={mu:g}", "quantity": "optimum", "expected": optimum,
             "computed": objective, "abs_delta": delta, "ok": delta <= tol}
        )
        for quantity, upper in (
            ("below 3+5mu", 3.0 + 5.0 * mu),
            ("below 3+3mu", 3.0 + 3.0 * mu),
            ("below 1+sqrt2+3mu", 1.0 + sqrt(2.0) + 3.0 * mu),
        ):
            rows.append(
                {"table": "overlapping", "case": f"mu={mu:g}", "quantity": quantity, "expected": upper,
                 "computed": objective, "abs_delta": abs(objective - upper), "ok": objective <= upper + tol}
            )

    table = pd.DataFrame(rows)
    return table, int((~table["ok"]).sum())
