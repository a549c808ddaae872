from math import pi, sqrt

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy.special import expit

import src.groups.utils as group_utils
import src.simulate.utils as simulate_utils
from src.errors import DimensionError, ModelError
from src.simulate.classes import CovarianceKind, DesignSpec, ObservationKind, ObservationModel


def test_ground_truth_dense(disjoint_layout, rng):
    truth = simulate_utils.gen_ground_truth(disjoint_layout, 2, 5, rng)

    assert np.linalg.norm(truth.x_star) == pytest.approx(1.0)
    assert truth.active_groups == (0, 1)
    assert len(truth.support) == 10


def test_ground_truth_one_sparse(chain_layout, rng):
    truth = simulate_utils.gen_ground_truth(chain_layout, 1, 1, rng)

    assert len(truth.support) == 1
    assert abs(truth.x_star[truth.support[0]]) == pytest.approx(1.0)
    group = truth.active_groups[0]
    assert truth.support[0] in chain_layout.groups[group]


def test_ground_truth_is_group_sparse(chain_layout, rng):
    for _ in range(50):
        truth = simulate_utils.gen_ground_truth(chain_layout, 3, 2, rng)
        assert len(truth.active_groups) == 3
        assert all(len(chosen) == 2 for chosen in truth.per_group_support.values())
        covered = {i for chosen in truth.per_group_support.values() for i in chosen}
        assert set(truth.support) <= covered
        assert np.linalg.norm(truth.x_star) == pytest.approx(1.0)


def test_ground_truth_overlap_collision(overlap_layout):
    # draw until both groups pick the shared coordinate
    for seed in range(200):
        truth = simulate_utils.gen_ground_truth(overlap_layout, 2, 1, np.random.default_rng(seed))
        if truth.per_group_support[0] == truth.per_group_support[1] == (1,):
            assert truth.support == (1,)
            assert abs(truth.x_star[1]) == pytest.approx(1.0)
            return

    pytest.fail("no draw put both groups on the shared coordinate")


def test_ground_truth_errors(overlap_layout, rng):
    with pytest.raises(ModelError):
        simulate_utils.gen_ground_truth(overlap_layout, 0, 1, rng)
    with pytest.raises(ValueError):
        simulate_utils.gen_ground_truth(overlap_layout, 3, 1, rng)
    with pytest.raises(ValueError):
        simulate_utils.gen_ground_truth(overlap_layout, 1, 3, rng)


def test_seeded_determinism(chain_layout):
    def draw(seed):
        rng = simulate_utils.trial_rng(seed, 4, 100)
        truth = simulate_utils.gen_ground_truth(chain_layout, 2, 2, rng)
        Phi = simulate_utils.gen_design(DesignSpec(n=30, p=chain_layout.p), rng)
        y = simulate_utils.gen_labels(Phi, truth.x_star, ObservationModel(kind=ObservationKind.LOGISTIC), rng)
        return truth.x_star, Phi, y

    for first, second in zip(draw(7), draw(7)):
        assert_array_equal(first, second)
    assert not np.array_equal(draw(7)[1], draw(8)[1])


def test_identity_design_moments(rng):
    n = 20000
    Phi = simulate_utils.gen_design(DesignSpec(n=n, p=5), rng)

    assert Phi.shape == (n, 5)
    assert np.all(np.abs(Phi.mean(axis=0)) <= 4.0 / sqrt(n))
    assert np.all(np.abs(Phi.var(axis=0) - 1.0) <= 4.0 * sqrt(2.0) / sqrt(n))


def test_empty_design(rng):
    assert simulate_utils.gen_design(DesignSpec(n=0, p=7), rng).shape == (0, 7)


def test_ar1_design_covariance(rng):
    spec = DesignSpec(n=100000, p=3, covariance=CovarianceKind.AR1, rho=0.5)
    Phi = simulate_utils.gen_design(spec, rng)
    expected = np.array([[1.0, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 1.0]])

    assert_allclose(np.cov(Phi, rowvar=False), expected, atol=0.02)
    assert_allclose(simulate_utils.covariance_matrix(spec), expected)


def test_whitening(rng):
    spec = DesignSpec(n=50000, p=4, covariance=CovarianceKind.AR1, rho=0.8)
    Phi = simulate_utils.gen_design(spec, rng)
    inverse_root = np.linalg.inv(simulate_utils.covariance_sqrt(simulate_utils.covariance_matrix(spec)))

    assert_allclose(np.cov(Phi @ inverse_root, rowvar=False), np.eye(4), atol=0.03)


def test_explicit_covariance(rng):
    sigma = np.array([[2.0, 0.3], [0.3, 1.0]])
    spec = DesignSpec(n=10, p=2, covariance=CovarianceKind.EXPLICIT, sigma=sigma)
    root = simulate_utils.covariance_sqrt(simulate_utils.covariance_matrix(spec))

    assert_allclose(root @ root, sigma, atol=1e-12)
    assert_allclose(root, root.T)

    with pytest.raises(ValueError):
        DesignSpec(n=10, p=2, covariance=CovarianceKind.EXPLICIT)
    with pytest.raises(ValueError):
        DesignSpec(n=10, p=2, covariance=CovarianceKind.EXPLICIT, sigma=np.array([[1.0, 0.2], [0.0, 1.0]]))


def test_non_positive_definite_covariance(rng):
    sigma = np.array([[1.0, 2.0], [2.0, 1.0]])
    spec = DesignSpec(n=10, p=2, covariance=CovarianceKind.EXPLICIT, sigma=sigma)

    with pytest.raises(ModelError, match="-1.000e\\+00"):
        simulate_utils.gen_design(spec, rng)


def test_condition_number():
    assert simulate_utils.condition_number(DesignSpec(n=1, p=10)) == pytest.approx(1.0)

    values = [
        simulate_utils.condition_number(DesignSpec(n=1, p=50, covariance=CovarianceKind.AR1, rho=rho))
        for rho in (0.0, 0.8, 0.95)
    ]
    assert values[0] == pytest.approx(1.0)
    assert values[0] < values[1] < values[2]

    with pytest.raises(ValueError):
        simulate_utils.ar1_covariance(3, 1.0)


def test_sign_labels():
    Phi = np.array([[2.0, 0.0], [-1.0, 5.0], [0.0, 1.0]])
    x = np.array([1.0, 0.0])
    y = simulate_utils.gen_labels(Phi, x, ObservationModel(kind=ObservationKind.SIGN), np.random.default_rng(0))

    # sign(0) is +1
    assert_array_equal(y, [1.0, -1.0, 1.0])


def test_linear_labels_without_noise(rng):
    Phi = rng.standard_normal((10, 4))
    x = rng.standard_normal(4)
    y = simulate_utils.gen_labels(Phi, x, ObservationModel(kind=ObservationKind.LINEAR), rng)

    assert_allclose(y, Phi @ x)


def test_logistic_approaches_sign(rng):
    Phi = rng.standard_normal((20000, 5))
    x = simulate_utils.gen_ground_truth(group_utils.build_layout([[0, 1, 2, 3, 4]], 5), 1, 5, rng).x_star
    u = Phi @ x

    logistic = simulate_utils.gen_labels(Phi, x, ObservationModel(kind=ObservationKind.LOGISTIC, beta=100.0), rng)
    sign = simulate_utils.gen_labels(Phi, x, ObservationModel(kind=ObservationKind.SIGN), rng)
    away = np.abs(u) > 0.05

    assert np.mean(logistic[away] == sign[away]) > 0.99


def test_logistic_label_moments(rng):
    beta = 2.0
    model = ObservationModel(kind=ObservationKind.LOGISTIC, beta=beta)
    Phi = rng.standard_normal((200000, 1))
    y = simulate_utils.gen_labels(Phi, np.array([1.0]), model, rng)
    u = Phi[:, 0]

    edges = np.linspace(-2.0, 2.0, 9)
    for low, high in zip(edges, edges[1:]):
        inside = (u >= low) & (u < high)
        expected = np.mean(2.0 * expit(beta * u[inside]) - 1.0)
        # each label has variance at most 1
        assert abs(y[inside].mean() - expected) <= 4.0 / sqrt(inside.sum())

    assert_allclose(simulate_utils.link_mean(model, np.array([0.3])), np.tanh(beta * 0.3 / 2.0))


def test_label_errors(rng):
    Phi = rng.standard_normal((5, 3))
    with pytest.raises(ModelError):
        simulate_utils.gen_labels(Phi, np.ones(3), ObservationModel(kind=ObservationKind.SIGN), rng)
    with pytest.raises(DimensionError):
        simulate_utils.gen_labels(Phi, np.ones(4) / 2.0, ObservationModel(kind=ObservationKind.SIGN), rng)

    # the linear model has no normalization requirement
    simulate_utils.gen_labels(Phi, np.ones(3), ObservationModel(kind=ObservationKind.LINEAR), rng)


def test_sigma_f():
    assert simulate_utils.sigma_f(ObservationModel(kind=ObservationKind.SIGN)) == pytest.approx(sqrt(pi / 2.0))

    logistic = simulate_utils.sigma_f(ObservationModel(kind=ObservationKind.LOGISTIC, beta=1.0))
    assert 0.0 < logistic <= 6.0

    steep = [
        simulate_utils.sigma_f(ObservationModel(kind=ObservationKind.LOGISTIC, beta=beta))
        for beta in (1.0, 10.0, 100.0)
    ]
    assert steep[0] > steep[1] > steep[2]
    assert steep[2] == pytest.approx(sqrt(pi / 2.0), rel=2e-2)


def test_sigma_f_errors():
    with pytest.raises(ModelError):
        simulate_utils.sigma_f(ObservationModel(kind=ObservationKind.LINEAR))
    with pytest.raises(ValueError):
        simulate_utils.sigma_f(ObservationModel(kind=ObservationKind.LOGISTIC), quadrature_points=32)


@pytest.mark.parametrize(
    "alpha, L, expected",
    [(0.2, 6, 1), (0.25, 6, 2), (0.5, 6, 3), (1.0, 6, 6), (0.01, 6, 1), (0.2, 120, 24), (0.75, 2, 2)],
)
def test_alpha_to_l(alpha, L, expected):
    assert simulate_utils.alpha_to_l(alpha, L) == expected


def test_alpha_to_l_range():
    with pytest.raises(ValueError):
        simulate_utils.alpha_to_l(0.0, 6)
    with pytest.raises(ValueError):
        simulate_utils.alpha_to_l(1.2, 6)
