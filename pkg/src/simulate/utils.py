import logging
from decimal import ROUND_HALF_UP, Decimal
from math import pi, sqrt

import numpy as np
from scipy.linalg import toeplitz
from scipy.special import expit

from src.constants import EIGENVALUE_FLOOR, QUADRATURE_POINTS
from src.errors import DimensionError, ModelError
from src.groups.classes import GroupLayout
from src.simulate.classes import (
    CovarianceKind,
    DesignSpec,
    GroundTruth,
    ObservationKind,
    ObservationModel,
)

logger = logging.getLogger(__name__)


def trial_rng(seed: int, *keys: int) -> np.random.Generator:
    """
    an independent generator for one unit of work, so results don't depend on scheduling

    :param seed: the run seed
    :param keys: integers identifying the unit of work (trial index, grid position, ...)
    :return: the generator
    """
    return np.random.default_rng([seed, *keys])


def alpha_to_l(alpha: float, L: int) -> int:
    """
    number of retained coefficients per active group for a retained fraction alpha,
    rounded half up and kept within 1..L
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")

    rounded = int(Decimal(str(alpha * L)).quantize(Decimal("1"), rounding=ROUND_HALF_UP))
    return min(max(rounded, 1), L)


def gen_ground_truth(layout: GroupLayout, k: int, l: int, rng: np.random.Generator) -> GroundTruth:
    """
    draw a (k, l)-group sparse unit vector: k groups uniformly without replacement,
    min(l, |G|) coordinates uniformly inside each, uniform [-1, 1] values. values landing on
    the same coordinate through overlapping groups are summed before normalizing

    :param layout: the group layout
    :param k: number of active groups
    :param l: number of nonzeros per active group
    :param rng: random generator
    :return: the ground truth
    """
    if k < 1:
        raise ModelError("at least one active group is needed for a unit-norm ground truth")
    if k > layout.K:
        raise ValueError(f"k = {k} exceeds the number of groups K = {layout.K}")
    if l < 1 or l > layout.L:
        raise ValueError(f"l = {l} must lie in 1..L = {layout.L}")

    x = np.zeros(layout.p)
    active = np.sort(rng.choice(layout.K, size=k, replace=False))
    per_group_support = dict()
    for group_id in active:
        group = np.asarray(layout.groups[group_id])
        chosen = np.sort(rng.choice(group, size=min(l, group.size), replace=False))
        x[chosen] += rng.uniform(-1.0, 1.0, size=chosen.size)
        per_group_support[int(group_id)] = tuple(int(i) for i in chosen)

    norm = np.linalg.norm(x)
    if norm == 0.0:
        raise ModelError("drawn ground truth is identically zero")

    return GroundTruth(
        x_star=x / norm,
        active_groups=tuple(int(g) for g in active),
        per_group_support=per_group_support,
    )


def ar1_covariance(p: int, rho: float) -> np.ndarray:
    """
    Sigma_ij = rho^|i - j|
    """
    if not -1.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (-1, 1), got {rho}")

    return toeplitz(rho ** np.arange(p))


def covariance_matrix(spec: DesignSpec) -> np.ndarray:
    """
    the row covariance of a design spec as a dense matrix
    """
    match spec.covariance:
        case CovarianceKind.IDENTITY:
            return np.eye(spec.p)
        case CovarianceKind.AR1:
            return ar1_covariance(spec.p, spec.rho)
        case CovarianceKind.EXPLICIT:
            return np.asarray(spec.sigma, dtype=float)
        case _:
            raise ValueError(f"unexpected covariance kind {spec.covariance}")


def covariance_sqrt(sigma: np.ndarray) -> np.ndarray:
    """
    symmetric square root through the eigendecomposition. eigenvalues below the floor are
    rejected, since the condition number has to stay finite

    :param sigma: symmetric covariance matrix
    :return: Sigma^(1/2)
    """
    eigenvalues, eigenvectors = np.linalg.eigh(sigma)
    smallest = float(eigenvalues.min())
    if smallest < EIGENVALUE_FLOOR:
        raise ModelError(
            f"covariance is not positive definite: most negative eigenvalue {smallest:.3e}"
        )

    return (eigenvectors * np.sqrt(eigenvalues)) @ eigenvectors.T


def condition_number(spec: DesignSpec) -> float:
    """
    kappa(Sigma), the ratio of the largest to the smallest eigenvalue
    """
    eigenvalues = np.linalg.eigvalsh(covariance_matrix(spec))
    return float(eigenvalues.max() / eigenvalues.min())


def gen_design(spec: DesignSpec, rng: np.random.Generator) -> np.ndarray:
    """
    draw an n x p design whose rows are i.i.d. N(0, Sigma), as standard normal rows times
    the symmetric square root of Sigma

    :param spec: the design spec
    :param rng: random generator
    :return: the design
    """
    standard = rng.standard_normal((spec.n, spec.p))
    if spec.covariance == CovarianceKind.IDENTITY:
        return standard

    return standard @ covariance_sqrt(covariance_matrix(spec))


def gen_labels(
    Phi: np.ndarray, x_star: np.ndarray, model: ObservationModel, rng: np.random.Generator
) -> np.ndarray:
    """
    draw labels from an observation model. sign labels are deterministic with sign(0) = +1,
    logistic labels are +1 with probability expit(beta u) and linear labels are u plus
    Gaussian noise, where u = <phi_i, x*>

    :param Phi: n x p design
    :param x_star: the coefficient vector, unit norm for classification models
    :param model: the observation model
    :param rng: random generator
    :return: the labels
    """
    Phi = np.asarray(Phi, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    if Phi.shape[1] != x_star.size:
        raise DimensionError("design columns vs coefficient length", x_star.size, Phi.shape[1])
    if model.is_classification and abs(np.linalg.norm(x_star) - 1.0) > 1e-8:
        raise ModelError(
            f"classification models need a unit-norm x*, got norm {np.linalg.norm(x_star):.6g}"
        )

    u = Phi @ x_star
    match model.kind:
        case ObservationKind.SIGN:
            return np.where(u >= 0.0, 1.0, -1.0)
        case ObservationKind.LOGISTIC:
            return np.where(rng.random(u.size) < expit(model.beta * u), 1.0, -1.0)
        case ObservationKind.LINEAR:
            return u + model.sigma_noise * rng.standard_normal(u.size)
        case _:
            raise ValueError(f"unexpected observation model {model.kind}")


def link_mean(model: ObservationModel, u: np.ndarray) -> np.ndarray:
    """
    f(u) = E[y | <phi, x*> = u]. for the logistic model this is 2 expit(beta u) - 1,
    i.e. tanh(beta u / 2)
    """
    u = np.asarray(u, dtype=float)
    match model.kind:
        case ObservationKind.SIGN:
            return np.where(u >= 0.0, 1.0, -1.0)
        case ObservationKind.LOGISTIC:
            return 2.0 * expit(model.beta * u) - 1.0
        case ObservationKind.LINEAR:
            return u
        case _:
            raise ValueError(f"unexpected observation model {model.kind}")


def sigma_f(model: ObservationModel, quadrature_points: int = QUADRATURE_POINTS) -> float:
    """
    effective noise level 1 / E[f(g) g] of a classification link, g ~ N(0, 1). the sign
    link has the closed form sqrt(pi / 2); the logistic link uses Gauss-Hermite quadrature

    :param model: a classification observation model
    :param quadrature_points: number of quadrature nodes, at least 64
    :return: sigma_f
    """
    if not model.is_classification:
        raise ModelError(f"sigma_f is defined for classification links, not {model.kind.value}")
    if model.kind == ObservationKind.SIGN:
        return sqrt(pi / 2.0)
    if quadrature_points < 64:
        raise ValueError(f"at least 64 quadrature points are required, got {quadrature_points}")

    nodes, weights = np.polynomial.hermite_e.hermegauss(quadrature_points)
    correlation = float(np.dot(weights, link_mean(model, nodes) * nodes) / sqrt(2.0 * pi))
    if correlation <= 0.0:
        raise ModelError(f"E[f(g) g] = {correlation:.3e} must be positive")

    return 1.0 / correlation
