import numpy as np

from src.errors import DimensionError
from src.groups.classes import DuplicationMap
from src.groups.utils import group_norms
from src.prox.classes import ProxStep


def soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    """
    elementwise sign(v) * max(|v| - t, 0), the proximal map of t * ||.||_1

    :param v: input vector
    :param t: nonnegative threshold, scalar or one value per entry
    :return: the shrunk vector
    """
    if np.any(np.asarray(t) < 0):
        raise ValueError(f"threshold must be nonnegative, got {t}")

    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def group_soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    """
    the proximal map of t * ||.||_2: shrink the norm of v by t, or return zero when
    ||v||_2 <= t

    :param v: input vector
    :param t: nonnegative threshold
    :return: the shrunk vector
    """
    if t < 0:
        raise ValueError(f"threshold must be nonnegative, got {t}")

    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm <= t:
        return np.zeros_like(v)

    return v * ((norm - t) / norm)


def prox_sparse_group_weighted(
    w: np.ndarray,
    dup: DuplicationMap,
    l1_thresholds: np.ndarray,
    group_thresholds: np.ndarray,
) -> np.ndarray:
    """
    sparse-group proximal map with explicit thresholds: soft thresholding of every entry,
    followed by group soft thresholding of every group range

    :param w: vector in the expanded space
    :param dup: the duplication map
    :param l1_thresholds: l1 threshold per expanded coordinate
    :param group_thresholds: group threshold per group
    :return: the proximal point
    """
    shrunk = soft_threshold(w, l1_thresholds)
    norms = group_norms(shrunk, dup)

    # zero-norm groups land in the `norms <= t` branch
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(norms > group_thresholds, 1.0 - group_thresholds / norms, 0.0)

    return shrunk * np.repeat(scale, dup.group_sizes)


def step_thresholds(dup: DuplicationMap, step: ProxStep):
    """
    per-coordinate l1 thresholds and per-group thresholds of a ProxStep

    :param dup: the duplication map
    :param step: the proximal step
    :return: (l1 thresholds over the expanded space, group thresholds)
    """
    if step.alpha is None:
        group_thresholds = np.full(dup.num_groups, step.eta1)
        l1_thresholds = np.full(dup.expanded_dim, step.eta1 * step.mu)
    else:
        if len(step.alpha) != dup.num_groups:
            raise DimensionError("per-group weights", dup.num_groups, len(step.alpha))
        group_thresholds = step.eta1 * np.asarray(step.alpha)
        l1_thresholds = np.repeat(step.eta1 * np.asarray(step.beta), dup.group_sizes)

    return l1_thresholds, group_thresholds


def prox_sparse_group(w: np.ndarray, dup: DuplicationMap, step: ProxStep) -> np.ndarray:
    """
    proximal map of eta1 * sum_G (||w_G||_2 + mu ||w_G||_1) in the expanded space, where the
    groups are disjoint. composition of soft thresholding at eta1 * mu and group soft
    thresholding at eta1, group by group

    :param w: vector in the expanded space
    :param dup: the duplication map
    :param step: the thresholds
    :return: the proximal point
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (dup.expanded_dim,):
        raise DimensionError("expanded vector length", dup.expanded_dim, w.size)

    l1_thresholds, group_thresholds = step_thresholds(dup, step)
    return prox_sparse_group_weighted(w, dup, l1_thresholds, group_thresholds)
