"""
Tests for the E-step and M-step updates.
"""

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from core.exceptions import BracketError, InvariantError
from services.plda.em import (
    FactorStats,
    estep_g,
    estep_h,
    factor_posteriors,
    floor_covariance,
    log_objective,
    mstep_covariances,
    mstep_F,
    posterior_factors,
)
from services.plda.models import DEFAULT_VARIANCE_FLOOR, PldaModel


def _model(F, sigma_w, sigma_b=None, mu=None) -> PldaModel:
    F = np.atleast_2d(np.asarray(F, dtype=float))
    sigma_w = np.atleast_2d(np.asarray(sigma_w, dtype=float))
    return PldaModel(
        mu=np.zeros(F.shape[0]) if mu is None else mu,
        F=F,
        sigma_w=sigma_w,
        sigma_b=sigma_w if sigma_b is None else np.atleast_2d(np.asarray(sigma_b, dtype=float))
    )


def _random_covariance(rng, d: int) -> np.ndarray:
    a = rng.standard_normal((d, d))
    return a @ a.T + 0.5 * np.eye(d)


def test_estep_h_one_dimension():
    """Test h = (n F'S^-1F + 1)^-1 F'S^-1 sum x by hand."""
    assert estep_h(_model([[1.0]], [[1.0]]), [[1.0], [3.0]])[0] == pytest.approx(4.0 / 3.0)
    assert estep_h(_model([[2.0]], [[1.0]]), [[3.0]])[0] == pytest.approx(1.2)


def test_estep_h_at_the_mean():
    """Test that vectors equal to mu give h = 0."""
    model = _model(np.ones((3, 2)), np.eye(3), mu=np.array([1.0, -2.0, 0.5]))
    h = estep_h(model, np.tile(model.mu, (4, 1)))
    np.testing.assert_array_equal(h, np.zeros(2))


def test_estep_g_one_dimension():
    """Test the between-class factor with sigma_b = 2."""
    model = _model([[1.0]], [[1.0]], sigma_b=[[2.0]])
    assert estep_g(model, [[2.0]] * 4)[0] == pytest.approx(4.0 / 3.0)
    np.testing.assert_array_equal(estep_g(model, np.zeros((3, 1))), [0.0])


def test_estep_g_matches_estep_h(rng):
    """Test that g equals h when sigma_b = sigma_w and y = x."""
    model = _model(rng.standard_normal((5, 2)), _random_covariance(rng, 5))
    x = rng.standard_normal((3, 5))
    np.testing.assert_array_equal(estep_g(model, x), estep_h(model, x))


def _log_posterior(h, x, F, sigma):
    fit = sum(multivariate_normal.logpdf(row, mean=F @ h, cov=sigma) for row in x)
    return fit + multivariate_normal.logpdf(h, mean=np.zeros(h.size), cov=np.eye(h.size))


def test_posterior_gradient_vanishes(rng):
    """Test that returned factors are stationary points of the log posterior."""
    step = 1e-5
    for case in range(100):
        d = int(rng.integers(1, 7))
        r = int(rng.integers(1, d + 1))
        F = rng.standard_normal((d, r))
        sigma = _random_covariance(rng, d)
        x = rng.standard_normal((int(rng.integers(1, 6)), d)) * 2.0
        # even cases check h, odd cases check g through sigma_b
        model = _model(F, np.eye(d), sigma_b=sigma) if case % 2 else _model(F, sigma)
        factor = estep_g(model, x) if case % 2 else estep_h(model, x)

        gradient = np.empty(r)
        for k in range(r):
            delta = np.zeros(r)
            delta[k] = step
            gradient[k] = (
                _log_posterior(factor + delta, x, F, sigma)
                - _log_posterior(factor - delta, x, F, sigma)
            ) / (2.0 * step)
        curvature = np.linalg.eigvalsh(x.shape[0] * F.T @ np.linalg.solve(sigma, F) + np.eye(r)).max()
        assert np.linalg.norm(gradient) < 1e-4 * max(1.0, curvature)


def test_posterior_factors_groups_counts(rng):
    """Test batch factors against one-speaker estimates."""
    model = _model(rng.standard_normal((4, 2)), _random_covariance(rng, 4))
    speakers = [rng.standard_normal((n, 4)) for n in (1, 3, 3, 2)]
    sums = np.array([s.sum(axis=0) for s in speakers])
    batch = posterior_factors(model.F, model.sigma_w, sums, [1, 3, 3, 2])
    for row, vectors in zip(batch, speakers):
        np.testing.assert_allclose(row, estep_h(model, vectors), atol=1e-12)


def test_mstep_F_one_dimension():
    """Test F = (sum x h')(sum n h h')^-1 by hand."""
    within = FactorStats(np.array([[1.0], [3.0]]), [2], np.array([[4.0 / 3.0]]))
    F = mstep_F(within, None, alpha=1.0)
    assert F[0, 0] == pytest.approx(1.5)


def test_mstep_F_ignores_zero_between_factors(rng):
    """Test that zero g with alpha = 1 reproduces the single-objective update."""
    centered = rng.standard_normal((9, 4))
    counts = [3, 2, 4]
    within = FactorStats(centered, counts, rng.standard_normal((3, 2)))
    between = FactorStats(rng.standard_normal((18, 4)), [6, 4, 8], np.zeros((3, 2)))
    np.testing.assert_array_equal(mstep_F(within, between, 1.0), mstep_F(within, None, 1.0))


def test_mstep_F_duplicated_data(rng):
    """Test that duplicating every speaker leaves F unchanged."""
    centered = rng.standard_normal((6, 3))
    factors = rng.standard_normal((3, 2))
    single = FactorStats(centered, [2, 1, 3], factors)
    doubled = FactorStats(np.vstack([centered, centered]), [2, 1, 3, 2, 1, 3], np.vstack([factors, factors]))
    np.testing.assert_allclose(mstep_F(doubled, None, 1.0), mstep_F(single, None, 1.0), atol=1e-10)


def test_mstep_F_singular_bracket():
    """Test the rank hint for a singular bracket."""
    within = FactorStats(np.ones((4, 3)), [2, 2], np.zeros((2, 2)))
    with pytest.raises(BracketError, match="reduce the rank"):
        mstep_F(within, None, 1.0, iteration=3)


def test_mstep_F_indefinite_bracket(rng):
    """Test the alpha hint when between statistics dominate."""
    within = FactorStats(rng.standard_normal((4, 3)), [2, 2], 0.1 * rng.standard_normal((2, 2)))
    between = FactorStats(rng.standard_normal((8, 3)), [4, 4], 10.0 * np.eye(2))
    with pytest.raises(BracketError, match="increase alpha") as error:
        mstep_F(within, between, 1.0, iteration=2)
    assert "iteration 2" in str(error.value)


def test_mstep_covariances_one_dimension():
    """Test sigma_w from residuals {-1, 1}."""
    within = FactorStats(np.array([[1.0], [3.0]]), [2], np.array([[4.0 / 3.0]]))
    sigma_w, sigma_b = mstep_covariances(within, None, np.array([[1.5]]))
    assert sigma_w[0, 0] == pytest.approx(1.0)
    assert sigma_b is None


def test_mstep_covariances_floor():
    """Test that zero residuals give variance_floor * I."""
    within = FactorStats(np.array([[2.0], [2.0]]), [2], np.array([[4.0 / 3.0]]))
    sigma_w, _ = mstep_covariances(within, None, np.array([[1.5]]))
    assert sigma_w[0, 0] == pytest.approx(DEFAULT_VARIANCE_FLOOR, rel=1e-6)


def test_mstep_covariances_symmetric(rng):
    """Test symmetry and the eigenvalue floor on random inputs."""
    for _ in range(20):
        within = FactorStats(rng.standard_normal((7, 5)), [3, 4], rng.standard_normal((2, 2)))
        between = FactorStats(rng.standard_normal((3, 5)), [1, 2], rng.standard_normal((2, 2)))
        for sigma in mstep_covariances(within, between, rng.standard_normal((5, 2)), floor=0.01):
            np.testing.assert_array_equal(sigma, sigma.T)
            eigenvalues = np.linalg.eigvalsh(sigma)
            assert eigenvalues.min() >= 0.01 * (1 - 1e-9)


def test_floor_covariance_keeps_well_conditioned():
    """Test that a matrix above the floor is only symmetrized."""
    matrix = np.array([[2.0, 0.5], [0.5, 1.0]])
    np.testing.assert_array_equal(floor_covariance(matrix, 1e-3), matrix)


def test_log_objective_matches_brute_force(rng):
    """Test the per-vector marginal log-likelihood against stacked scipy densities."""
    F = rng.standard_normal((3, 2))
    sigma = _random_covariance(rng, 3)
    centered = rng.standard_normal((6, 3))
    stats = FactorStats(centered, [2, 3, 1], rng.standard_normal((3, 2)))

    expected = 0.0
    for label, n in enumerate([2, 3, 1]):
        rows = centered[stats.labels == label]
        cov = np.kron(np.eye(n), sigma) + np.kron(np.ones((n, n)), F @ F.T)
        expected += multivariate_normal.logpdf(rows.ravel(), mean=np.zeros(3 * n), cov=cov)
    assert log_objective(stats, F, sigma) == pytest.approx(expected / 6.0, rel=1e-10)


def test_log_objective_ignores_factors(rng):
    """Test that only vectors, counts and parameters enter the objective."""
    F = rng.standard_normal((4, 2))
    sigma = _random_covariance(rng, 4)
    centered = rng.standard_normal((5, 4))
    first = FactorStats(centered, [2, 3], np.zeros((2, 2)))
    second = FactorStats(centered, [2, 3], rng.standard_normal((2, 2)))
    assert log_objective(first, F, sigma) == log_objective(second, F, sigma)


def test_factor_posteriors_covariance(rng):
    """Test C_s = (n_s F'S^-1F + I)^-1 next to the posterior means."""
    model = _model(rng.standard_normal((4, 2)), _random_covariance(rng, 4))
    counts = [1, 3, 3, 2]
    sums = rng.standard_normal((4, 4))
    factors, covariances = factor_posteriors(model.F, model.sigma_w, sums, counts)
    np.testing.assert_array_equal(factors, posterior_factors(model.F, model.sigma_w, sums, counts))
    FtSF = model.F.T @ np.linalg.solve(model.sigma_w, model.F)
    for n, covariance in zip(counts, covariances):
        np.testing.assert_allclose(covariance, np.linalg.inv(n * FtSF + np.eye(2)), atol=1e-12)
        np.testing.assert_array_equal(covariance, covariance.T)


def test_mstep_F_uses_second_moments():
    """Test F = (sum x h')(sum n (h h' + C))^-1 by hand."""
    within = FactorStats(
        np.array([[1.0], [3.0]]), [2], np.array([[4.0 / 3.0]]), np.array([[[1.0 / 3.0]]])
    )
    F = mstep_F(within, None, alpha=1.0)
    assert F[0, 0] == pytest.approx(24.0 / 19.0)


def test_mstep_F_mirrored_speakers():
    """Test a full-rank update when two speakers have opposite factors."""
    centered = np.array([[1.0, 0.2], [0.8, -0.1], [-1.0, -0.2], [-0.8, 0.1]])
    F = np.eye(2)
    sums = np.array([centered[:2].sum(axis=0), centered[2:].sum(axis=0)])
    factors, covariances = factor_posteriors(F, np.eye(2), sums, [2, 2])
    np.testing.assert_allclose(factors[0], -factors[1])

    with pytest.raises(BracketError, match="reduce the rank"):
        mstep_F(FactorStats(centered, [2, 2], factors), None, 1.0)
    updated = mstep_F(FactorStats(centered, [2, 2], factors, covariances), None, 1.0)
    assert updated.shape == (2, 2)
    assert np.all(np.isfinite(updated))


def test_mstep_covariances_add_factor_uncertainty():
    """Test sigma_w = (residual scatter + F (sum n C) F') / N in one dimension."""
    within = FactorStats(
        np.array([[1.0], [3.0]]), [2], np.array([[4.0 / 3.0]]), np.array([[[1.0 / 3.0]]])
    )
    sigma_w, _ = mstep_covariances(within, None, np.array([[1.5]]))
    assert sigma_w[0, 0] == pytest.approx(1.75)


def test_factor_covariances_shape_checked():
    """Test covariances that do not match the factors."""
    with pytest.raises(InvariantError):
        FactorStats(np.zeros((2, 1)), [2], np.zeros((1, 1)), np.zeros((2, 1, 1)))
