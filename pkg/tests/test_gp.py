"""GP regression: kernel values, likelihood gradients, posterior accuracy."""

import numpy as np
import pytest

from epsbo.benchmarks import evaluate, from_unit_cube, get_problem
from epsbo.sampling import maximin_lhs
from epsbo.gp import (
    JITTER,
    LENGTHSCALE_BOUNDS,
    SIGNAL_VARIANCE_BOUNDS,
    Hyperparams,
    fit,
    kernel_matrix,
    lml_with_gradient,
    log_marginal_likelihood,
    make_dataset,
    append_observation,
    matern52,
    model_from_theta,
    predict,
    predict_batch,
    standardize_targets,
)

RNG = np.random.default_rng(42)


def dense_posterior(dataset, theta, Xq):
    """Straight-line textbook predictor: explicit K inverse, python loops."""
    X, y = dataset.X, dataset.y
    m, d = X.shape
    K = np.empty((m, m))
    for i in range(m):
        for j in range(m):
            r = np.sqrt(np.sum(((X[i] - X[j]) / theta.lengthscales) ** 2))
            K[i, j] = matern52(r, theta.signal_variance)
    K += theta.jitter * np.eye(m)
    Kinv = np.linalg.inv(K)
    mus, sigmas = [], []
    for xq in np.atleast_2d(Xq):
        ks = np.array(
            [
                matern52(
                    np.sqrt(np.sum(((X[i] - xq) / theta.lengthscales) ** 2)),
                    theta.signal_variance,
                )
                for i in range(m)
            ]
        )
        mus.append(ks @ Kinv @ y)
        var = theta.signal_variance - ks @ Kinv @ ks
        sigmas.append(np.sqrt(max(var, 0.0)))
    return np.array(mus), np.array(sigmas)


def smooth_dataset(m, d, rng):
    # stationary wiggle on well-spread points.  No linear trend (trends push
    # the ML fit toward huge signal variance and a near-singular Gram),
    # non-monotone for every phase draw, inputs spread by design.
    X = maximin_lhs(m, d, seed=int(rng.integers(2**31))).points
    u = rng.normal(size=d)
    u /= np.linalg.norm(u)
    y = np.sin(9.0 * X @ u + rng.uniform(0.0, 2 * np.pi)) + 0.3 * np.cos(7.0 * X[:, 0])
    return make_dataset(X, y)


class TestTargets:
    def test_standardize_flips_and_scales(self):
        y = standardize_targets(np.array([1.0, 2.0, 3.0]))
        assert abs(y.mean()) < 1e-12 and abs(y.std() - 1.0) < 1e-12
        assert y[0] > y[1] > y[2]  # smaller raw value -> larger target

    def test_constant_guard(self):
        np.testing.assert_array_equal(standardize_targets(np.full(5, 3.3)), np.zeros(5))

    def test_dataset_shapes(self):
        ds = make_dataset(np.zeros((4, 2)), np.arange(4.0))
        assert ds.d == 2 and len(ds.y) == 4
        ds2 = append_observation(ds, np.ones(2), 9.0)
        assert len(ds2.X) == 5 and ds2.y_raw[-1] == 9.0
        with pytest.raises(ValueError):
            make_dataset(np.zeros((0, 2)), np.array([]))


class TestKernel:
    def test_known_value(self):
        # (1 + sqrt5 + 5/3) e^{-sqrt5}, frozen from a 50-digit evaluation
        assert abs(matern52(1.0) - 0.5239941088318203) < 1e-15

    def test_unit_at_zero(self):
        assert matern52(0.0) == 1.0
        assert matern52(0.0, signal_variance=2.5) == 2.5

    def test_monotone_decay(self):
        r = np.linspace(0, 8, 200)
        k = matern52(r)
        assert np.all(np.diff(k) < 0)

    def test_kernel_matrix_symmetry(self):
        X = RNG.uniform(size=(15, 3))
        theta = Hyperparams(lengthscales=np.array([0.5, 1.0, 2.0]), signal_variance=1.2)
        K = kernel_matrix(X, X, theta)
        np.testing.assert_allclose(K, K.T, atol=1e-14)
        np.testing.assert_allclose(np.diag(K), 1.2, atol=1e-14)
        assert np.all(np.linalg.eigvalsh(K + JITTER * np.eye(15)) > 0)


class TestPosterior:
    def test_single_point_closed_form(self):
        # one observation, unit hyperparameters, query at scaled distance 1:
        # centred target is 0 so mu = 0; var = 1 - k^2/(1+jitter)
        ds = make_dataset(np.array([[0.0]]), np.array([5.0]))
        theta = Hyperparams(lengthscales=np.array([1.0]), signal_variance=1.0)
        model = model_from_theta(ds, theta)
        pred = predict(model, np.array([1.0]))
        assert abs(pred.mu) < 1e-15
        assert abs(pred.sigma**2 - 0.7254304484790980) < 1e-13

    def test_single_point_lml(self):
        ds = make_dataset(np.array([[0.3]]), np.array([2.0]))
        theta = Hyperparams(lengthscales=np.array([1.0]), signal_variance=1.0)
        expected = -0.5 * np.log(2 * np.pi) - 0.5 * np.log(1.0 + JITTER)
        assert abs(log_marginal_likelihood(ds, theta) - expected) < 1e-13

    def test_dense_oracle_equivalence(self):
        for m, d in ((5, 1), (12, 2), (30, 6)):
            ds = smooth_dataset(m, d, RNG)
            theta = Hyperparams(
                lengthscales=RNG.uniform(0.3, 2.0, size=d), signal_variance=1.5
            )
            model = model_from_theta(ds, theta)
            Xq = RNG.uniform(size=(7, d))
            mu, sigma = predict_batch(model, Xq)
            mu_ref, sigma_ref = dense_posterior(ds, theta, Xq)
            np.testing.assert_allclose(mu, mu_ref, atol=1e-8)
            np.testing.assert_allclose(sigma, sigma_ref, atol=1e-8)

    def test_interpolation(self):
        # the exact training-point residual is jitter * (K + jI)^-1 y, so the
        # 1e-5 bound is a statement about sanely conditioned models: keep
        # lengthscales commensurate with the point spacing
        rng = np.random.default_rng(2718)
        for _ in range(40):
            d = int(rng.integers(1, 7))
            m = int(rng.integers(5, 31))
            ds = smooth_dataset(m, d, rng)
            spacing = m ** (-1.0 / d)
            theta = Hyperparams(
                lengthscales=spacing * rng.uniform(0.3, 0.6, size=d),
                signal_variance=float(rng.uniform(0.5, 2.0)),
            )
            mu, sigma = predict_batch(model_from_theta(ds, theta), ds.X)
            assert np.max(np.abs(mu - ds.y)) <= 1e-5
            assert np.max(sigma) <= 1e-2

    def test_fitted_model_interpolates_to_jitter_floor(self):
        # ML refits on noiseless data ride the jitter floor: the residual
        # jitter * |alpha| lands around 1e-5..1e-4 at the likelihood optimum
        for d in (1, 2, 4):
            ds = smooth_dataset(16, d, RNG)
            model = fit(ds, restarts=5, rng=np.random.default_rng(d))
            mu, sigma = predict_batch(model, ds.X)
            assert np.max(np.abs(mu - ds.y)) <= 2e-4
            assert np.max(sigma) <= 1e-2

    def test_solve_residual(self):
        # alpha solves the factorized system (K + jitter I) alpha = y, and
        # K alpha - y equals -jitter alpha up to roundoff
        rng = np.random.default_rng(3141)
        for _ in range(25):
            d = int(rng.integers(1, 7))
            m = int(rng.integers(5, 31))
            ds = smooth_dataset(m, d, rng)
            spacing = m ** (-1.0 / d)
            theta = Hyperparams(
                lengthscales=spacing * rng.uniform(0.3, 0.6, size=d),
                signal_variance=float(rng.uniform(0.5, 2.0)),
            )
            model = model_from_theta(ds, theta)
            K = kernel_matrix(ds.X, ds.X, theta)
            solved = (K + JITTER * np.eye(m)) @ model.alpha
            assert np.linalg.norm(solved - ds.y) <= 1e-6 * np.linalg.norm(ds.y)
            np.testing.assert_allclose(
                K @ model.alpha - ds.y, -JITTER * model.alpha, atol=1e-10
            )

    def test_prior_reversion_on_constant_data(self):
        ds = make_dataset(RNG.uniform(size=(8, 2)), np.full(8, 4.0))
        theta = Hyperparams(lengthscales=np.array([0.5, 0.5]), signal_variance=2.0)
        model = model_from_theta(ds, theta)
        mu, sigma = predict_batch(model, RNG.uniform(size=(20, 2)))
        np.testing.assert_allclose(mu, 0.0, atol=1e-12)
        assert np.all(sigma <= np.sqrt(2.0) + 1e-12)

    def test_clamp_tolerance(self):
        ds = smooth_dataset(6, 2, RNG)
        theta = Hyperparams(lengthscales=np.array([1.0, 1.0]), signal_variance=1.0)
        model = model_from_theta(ds, theta)
        predict_batch(model, np.array([[0.0 - 5e-10, 1.0 + 5e-10]]))  # inside tolerance
        with pytest.raises(ValueError):
            predict_batch(model, np.array([[0.0, 1.0 + 1e-6]]))

    def test_predict_batch_matches_scalar(self):
        ds = smooth_dataset(10, 2, RNG)
        theta = Hyperparams(lengthscales=np.array([0.7, 0.9]), signal_variance=1.1)
        model = model_from_theta(ds, theta)
        Xq = RNG.uniform(size=(5, 2))
        mu, sigma = predict_batch(model, Xq)
        # bit-identical on identical inputs (purity), near-identical when a
        # row is queried alone (BLAS may reassociate across batch shapes)
        mu2, sigma2 = predict_batch(model, Xq)
        np.testing.assert_array_equal(mu, mu2)
        np.testing.assert_array_equal(sigma, sigma2)
        for i, xq in enumerate(Xq):
            pred = predict(model, xq)
            assert abs(pred.mu - mu[i]) < 1e-12 and abs(pred.sigma - sigma[i]) < 1e-12


class TestLikelihoodGradient:
    def test_matches_central_differences(self):
        # step balances truncation against likelihood-evaluation roundoff,
        # which is amplified by poorly conditioned Grams (long lengthscales)
        h = 1e-4
        for trial in range(10):
            rng = np.random.default_rng(100 + trial)
            d = int(rng.integers(1, 5))
            ds = smooth_dataset(int(rng.integers(5, 25)), d, rng)
            theta = Hyperparams(
                lengthscales=rng.uniform(0.3, 2.0, size=d),
                signal_variance=float(rng.uniform(0.5, 2.0)),
            )
            _, grad = lml_with_gradient(ds, theta)
            logt = np.concatenate([np.log(theta.lengthscales), [np.log(theta.signal_variance)]])
            for j in range(d + 1):
                up, down = logt.copy(), logt.copy()
                up[j] += h
                down[j] -= h
                fp = log_marginal_likelihood(
                    ds, Hyperparams(np.exp(up[:d]), float(np.exp(up[d])))
                )
                fm = log_marginal_likelihood(
                    ds, Hyperparams(np.exp(down[:d]), float(np.exp(down[d])))
                )
                fd = (fp - fm) / (2 * h)
                assert abs(grad[j] - fd) <= 1e-4 * max(1.0, abs(fd))

    def test_lml_consistent_with_plain_evaluation(self):
        ds = smooth_dataset(14, 3, RNG)
        theta = Hyperparams(lengthscales=np.array([0.4, 0.8, 1.6]), signal_variance=0.9)
        lml, _ = lml_with_gradient(ds, theta)
        assert abs(lml - log_marginal_likelihood(ds, theta)) < 1e-9


class TestFit:
    def test_deterministic(self):
        ds = smooth_dataset(12, 2, RNG)
        a = fit(ds, restarts=4, rng=np.random.default_rng(9))
        b = fit(ds, restarts=4, rng=np.random.default_rng(9))
        np.testing.assert_array_equal(a.theta.lengthscales, b.theta.lengthscales)
        assert a.theta.signal_variance == b.theta.signal_variance
        assert a.lml == b.lml

    def test_more_restarts_never_worse(self):
        ds = smooth_dataset(15, 2, RNG)
        one = fit(ds, restarts=1, rng=np.random.default_rng(1))
        ten = fit(ds, restarts=10, rng=np.random.default_rng(1))
        assert ten.lml >= one.lml - 1e-9

    def test_bounds_respected(self):
        ds = smooth_dataset(10, 3, RNG)
        model = fit(ds, restarts=3, rng=np.random.default_rng(2))
        assert np.all(model.theta.lengthscales >= LENGTHSCALE_BOUNDS[0] - 1e-12)
        assert np.all(model.theta.lengthscales <= LENGTHSCALE_BOUNDS[1] + 1e-12)
        assert SIGNAL_VARIANCE_BOUNDS[0] <= model.theta.signal_variance <= SIGNAL_VARIANCE_BOUNDS[1]

    def test_warm_start_clipped_into_bounds(self):
        ds = smooth_dataset(8, 1, RNG)
        warm = Hyperparams(lengthscales=np.array([500.0]), signal_variance=1e9)
        model = fit(ds, restarts=1, rng=np.random.default_rng(3), warm_start=warm)
        assert model.theta.lengthscales[0] <= LENGTHSCALE_BOUNDS[1] + 1e-12

    def test_needs_two_points(self):
        ds = make_dataset(np.array([[0.5]]), np.array([1.0]))
        with pytest.raises(ValueError):
            fit(ds, restarts=1)

    def test_fits_real_objective(self):
        # end-to-end sanity on a real surface in unit-cube coordinates
        p = get_problem("Branin")
        X = RNG.uniform(size=(20, 2))
        y = evaluate(p, from_unit_cube(p, X))
        model = fit(make_dataset(X, y), restarts=5, rng=np.random.default_rng(4))
        mu, _ = predict_batch(model, X)
        assert np.max(np.abs(mu - model.dataset.y)) < 1e-4
