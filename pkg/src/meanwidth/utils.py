import logging
from itertools import combinations, product
from math import comb, lgamma, log, sqrt
from typing import Dict, List, Optional

import numpy as np

import src.groups.utils as group_utils
import src.penalty.utils as penalty_utils
import src.simulate.utils as simulate_utils
from src.constants import ENUMERATION_LIMIT, MIN_CHISQ_TRIALS, MIN_WIDTH_TRIALS
from src.errors import EnumerationLimitError, LayoutError
from src.groups.classes import GroupLayout
from src.meanwidth.classes import ChiSquareCheck, InnerMaxMethod, RelaxationCheck, WidthEstimate
from src.penalty.classes import PenaltyParams

logger = logging.getLogger(__name__)


def _check_sparsity(K: int, k: int, L: int, l: int) -> None:
    if not 1 <= k <= K:
        raise ValueError(f"k must lie in 1..K = {K}, got {k}")
    if not 1 <= l <= L:
        raise ValueError(f"l must lie in 1..L = {L}, got {l}")


def _summarize(sups: np.ndarray, method: InnerMaxMethod) -> WidthEstimate:
    trials = sups.size
    squares = sups**2
    return WidthEstimate(
        mean=float(sups.mean()),
        std_error=float(sups.std(ddof=1) / sqrt(trials)),
        trials=trials,
        inner_max_method=method,
        mean_square=float(squares.mean()),
        mean_square_std_error=float(squares.std(ddof=1) / sqrt(trials)),
    )


def sup_nc(g: np.ndarray, layout: GroupLayout, k: int, l: int) -> np.ndarray:
    """
    sup of <x, g> over unit-norm (k, l)-group sparse x, for a block of Gaussian draws.
    each group contributes the energy of its l largest |g_i|, and the k largest group
    energies are summed. this is exact for disjoint groups; with overlap it bounds the sup
    from above, since a shared coordinate may be counted by two groups

    :param g: trials x p draws
    :param layout: the group layout
    :param k: number of active groups
    :param l: nonzeros per active group
    :return: one sup per draw
    """
    _check_sparsity(layout.K, k, layout.L, l)
    g = np.atleast_2d(np.asarray(g, dtype=float))

    energies = np.empty((g.shape[0], layout.K))
    for group_id, group in enumerate(layout.groups):
        squares = np.sort(g[:, list(group)] ** 2, axis=1)
        energies[:, group_id] = squares[:, -l:].sum(axis=1)

    return np.sqrt(np.sort(energies, axis=1)[:, -k:].sum(axis=1))


def enumeration_size(layout: GroupLayout, k: int, l: int) -> int:
    """
    number of supports an exhaustive search over the sparse set visits, C(K, k) C(L, l)^k
    """
    return comb(layout.K, k) * comb(layout.L, min(l, layout.L)) ** k


def _supports(layout: GroupLayout, k: int, l: int) -> List[List[int]]:
    per_group = [list(combinations(group, min(l, len(group)))) for group in layout.groups]
    supports = list()
    for chosen in combinations(range(layout.K), k):
        for picks in product(*(per_group[group_id] for group_id in chosen)):
            supports.append([i for pick in picks for i in pick])

    return supports


def _sup_exhaustive(g: np.ndarray, layout: GroupLayout, k: int, l: int) -> np.ndarray:
    squares = g**2
    best = np.zeros(g.shape[0])
    for support in _supports(layout, k, l):
        np.maximum(best, squares[:, support].sum(axis=1), out=best)

    return np.sqrt(best)


def width_nc_exact(
    layout: GroupLayout,
    k: int,
    l: int,
    trials: int,
    rng: np.random.Generator,
    exhaustive: bool = False,
) -> WidthEstimate:
    """
    Monte Carlo mean width of the (k, l)-group sparse unit vectors for a disjoint layout,
    where the inner sup is computed exactly

    :param layout: a disjoint group layout
    :param k: number of active groups
    :param l: nonzeros per active group
    :param trials: number of Gaussian draws, at least 30
    :param rng: random generator
    :param exhaustive: enumerate every support instead of sorting per group. both give the
        same sup; the enumeration is there to check the sorted selection
    :return: the estimate
    """
    if not layout.is_disjoint:
        raise LayoutError(
            f"exact width needs disjoint groups (R = {layout.R}); use width_nc_upper instead"
        )
    if trials < MIN_WIDTH_TRIALS:
        raise ValueError(f"at least {MIN_WIDTH_TRIALS} trials are required, got {trials}")
    _check_sparsity(layout.K, k, layout.L, l)

    size = enumeration_size(layout, k, l)
    if size > ENUMERATION_LIMIT:
        raise EnumerationLimitError(
            f"{size} supports exceed the enumeration limit of {ENUMERATION_LIMIT}; "
            f"try fewer groups or a smaller k"
        )

    g = rng.standard_normal((trials, layout.p))
    sups = _sup_exhaustive(g, layout, k, l) if exhaustive else sup_nc(g, layout, k, l)

    return _summarize(sups, InnerMaxMethod.EXACT)


def width_nc_upper(
    layout: GroupLayout, k: int, l: int, trials: int, rng: np.random.Generator
) -> WidthEstimate:
    """
    Monte Carlo estimate of an upper bound on the mean width for any layout, overlapping
    or not. see sup_nc
    """
    if trials < MIN_WIDTH_TRIALS:
        raise ValueError(f"at least {MIN_WIDTH_TRIALS} trials are required, got {trials}")

    g = rng.standard_normal((trials, layout.p))
    return _summarize(sup_nc(g, layout, k, l), InnerMaxMethod.GREEDY_UPPER_BOUND)


def bound_nc(K: int, k: int, L: int, l: int) -> float:
    """
    (sqrt(k [log(K/k) + l log(L/l) + 2]) + sqrt(k l))^2, the explicit squared width bound
    for the (k, l)-group sparse set before constants are absorbed
    """
    _check_sparsity(K, k, L, l)
    log_supports = k * (log(K / k) + l * log(L / l) + 2.0)
    return (sqrt(log_supports) + sqrt(k * l)) ** 2


def log_num_supports(K: int, k: int, L: int, l: int) -> float:
    """
    log |S| with |S| = C(K, k) C(kL, kl), through log-gamma
    """
    _check_sparsity(K, k, L, l)

    def log_comb(a: int, b: int) -> float:
        return lgamma(a + 1) - lgamma(b + 1) - lgamma(a - b + 1)

    return log_comb(K, k) + log_comb(k * L, k * l)


def bound_nc_counting(K: int, k: int, L: int, l: int) -> float:
    """
    (sqrt(log |S|) + sqrt(k l))^2 with the support count taken exactly
    """
    return (sqrt(max(log_num_supports(K, k, L, l), 0.0)) + sqrt(k * l)) ** 2


def chisq_max_check(K: int, d: int, trials: int, rng: np.random.Generator) -> ChiSquareCheck:
    """
    Monte Carlo mean of the largest of K independent chi-square(d) variables against the
    bound (sqrt(2 log K) + sqrt(d))^2

    :param K: number of variables
    :param d: degrees of freedom
    :param trials: number of draws, at least 1000
    :param rng: random generator
    :return: the empirical mean, its standard error and the bound
    """
    if trials < MIN_CHISQ_TRIALS:
        raise ValueError(f"at least {MIN_CHISQ_TRIALS} trials are required, got {trials}")
    if K < 1 or d < 1:
        raise ValueError(f"K and d must be at least 1, got K={K}, d={d}")

    maxima = rng.chisquare(d, size=(trials, K)).max(axis=1)
    return ChiSquareCheck(
        K=K,
        d=d,
        empirical_mean=float(maxima.mean()),
        std_error=float(maxima.std(ddof=1) / sqrt(trials)),
        bound=(sqrt(2.0 * log(K)) + sqrt(d)) ** 2,
        trials=trials,
    )


def tightness_witness(layout: GroupLayout, k: int, l: int) -> Optional[np.ndarray]:
    """
    equal entries 1/sqrt(kl) on the first l coordinates of the first k groups of a disjoint
    layout. None when the layout overlaps or lacks k groups of size at least l
    """
    if not layout.is_disjoint:
        return None

    chosen = [group for group in layout.groups if len(group) >= l][:k]
    if len(chosen) < k:
        return None

    x = np.zeros(layout.p)
    for group in chosen:
        x[list(group[:l])] = 1.0 / sqrt(k * l)

    return x


def relaxation_check(
    layout: GroupLayout,
    k: int,
    l: int,
    params: PenaltyParams,
    trials: int,
    rng: np.random.Generator,
) -> RelaxationCheck:
    """
    sample (k, l)-group sparse unit vectors and compare h(x) to sqrt(k) (1 + lambda1) ||x||.
    the witness only reaches ratio 1 when params.l_target equals l

    :param layout: the group layout
    :param k: number of active groups
    :param l: nonzeros per active group
    :param params: penalty weights
    :param trials: number of sampled vectors
    :param rng: random generator
    :return: the worst sampled ratio and the witness ratio
    """
    if trials < 1:
        raise ValueError(f"at least one trial is required, got {trials}")

    dup = group_utils.build_duplication(layout)

    def ratio(x: np.ndarray) -> float:
        value = penalty_utils.eval_penalty(x, layout, params, dup=dup).objective
        return value / penalty_utils.penalty_upper_bound_klsparse(x, layout, params, k)

    worst = max(
        ratio(simulate_utils.gen_ground_truth(layout, k, l, rng).x_star) for _ in range(trials)
    )

    witness = tightness_witness(layout, k, l)
    witness_ratio = ratio(witness) if witness is not None else None
    if worst > 1.0 + 1e-4:
        logger.warning(f"relaxation ratio {worst:.6f} exceeds 1")

    return RelaxationCheck(worst_ratio=worst, witness_ratio=witness_ratio, trials=trials)


def bound_convex(K: int, k: int, L: int, l: int, p: int, lambda1: float) -> float:
    """
    squared width bound of the convex relaxation: the smaller of
    k (1 + lambda1)^2 (sqrt(2 log K) + sqrt(L))^2 and
    k l ((1 + lambda1) / lambda1)^2 (sqrt(2 log p) + 1)^2. the second term needs lambda1 > 0
    """
    _check_sparsity(K, k, L, l)
    if lambda1 < 0:
        raise ValueError(f"lambda1 must be nonnegative, got {lambda1}")

    group_term = k * (1.0 + lambda1) ** 2 * (sqrt(2.0 * log(K)) + sqrt(L)) ** 2
    if lambda1 == 0.0:
        return group_term

    sparse_term = k * l * ((1.0 + lambda1) / lambda1) ** 2 * (sqrt(2.0 * log(p)) + 1.0) ** 2
    return min(group_term, sparse_term)


def sample_complexity(
    K: int,
    k: int,
    L: int,
    l: int,
    R: int,
    p: int,
    lambda1: float,
    sigma_f: float,
    eps: float,
) -> Dict[str, float]:
    """
    constant-free predicted sample sizes for reaching squared error eps

    :return: "nonconvex", the R^2-inflated count from the sparse set, and "convex", the
        count from the convex relaxation's width
    """
    _check_sparsity(K, k, L, l)
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")

    scale = sigma_f**2 / eps**2
    nonconvex = scale * R**2 * k * (log(K / k) + l * log(L / l) + l + 2.0)

    group_term = (1.0 + lambda1) ** 2 * (log(K) + L)
    if lambda1 > 0.0:
        group_term = min(group_term, ((1.0 + lambda1) / lambda1) ** 2 * l * log(p))

    return {"nonconvex": nonconvex, "convex": scale * k * group_term}
