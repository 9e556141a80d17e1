"""Gaussian-process regression with a Matern 5/2 ARD kernel.

Inputs live in the unit cube (the harness rescales native domains);
targets are the negated observations, standardised to zero mean and unit
variance at every refit, so the model always works on a maximisation
problem of roughly unit scale. Hyperparameters are fitted by restarted
L-BFGS-B on the log marginal likelihood in log space, with an analytic
gradient.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular
from scipy.linalg.lapack import dpotri
from scipy.optimize import minimize

JITTER = 1e-6
LENGTHSCALE_BOUNDS = (1e-2, 10.0)
SIGNAL_VARIANCE_BOUNDS = (1e-4, 1e4)
_DEFAULT_LENGTHSCALE = 0.5
_DEFAULT_SIGNAL_VARIANCE = 1.0
_SQRT5 = np.sqrt(5.0)
_FAILED_OBJECTIVE = 1e25


class FactorizationError(RuntimeError):
    """K + jitter*I not numerically positive definite."""


class AllRestartsFailedError(RuntimeError):
    """Every fit restart hit a factorization failure."""


@dataclass
class Dataset:
    """Evaluated inputs with raw and internal (standardised) targets."""

    X: np.ndarray  # (m, d), unit cube
    y_raw: np.ndarray  # (m,) observed values, minimisation scale
    y: np.ndarray  # (m,) standardised maximisation targets
    d: int
    domain: tuple  # (lower, upper) native bounds


def standardize_targets(y_raw):
    """Negate and standardise observations for internal maximisation."""
    z = -np.asarray(y_raw, dtype=float)
    if len(z) < 2:
        return z - z.mean() if len(z) else z
    sd = z.std()
    if sd < 1e-12:
        # constant data: zero targets, prediction reverts to the prior
        return np.zeros_like(z)
    return (z - z.mean()) / sd


def make_dataset(X, y_raw, domain=None):
    X = np.asarray(X, dtype=float)
    y_raw = np.asarray(y_raw, dtype=float)
    if X.ndim != 2 or len(X) != len(y_raw) or len(X) == 0:
        raise ValueError("X must be (m, d) with one observation per row")
    d = X.shape[1]
    if domain is None:
        domain = (np.zeros(d), np.ones(d))
    return Dataset(X=X, y_raw=y_raw, y=standardize_targets(y_raw), d=d, domain=domain)


def append_observation(dataset, x, y_raw_new):
    X = np.vstack([dataset.X, np.asarray(x, dtype=float)])
    y_raw = np.append(dataset.y_raw, y_raw_new)
    return make_dataset(X, y_raw, dataset.domain)


@dataclass
class Hyperparams:
    lengthscales: np.ndarray  # (d,), strictly positive
    signal_variance: float
    jitter: float = JITTER


@dataclass
class Prediction:
    mu: float
    sigma: float


@dataclass
class GpModel:
    dataset: Dataset
    theta: Hyperparams
    L: np.ndarray  # lower Cholesky factor of K + jitter*I
    alpha: np.ndarray  # (K + jitter*I)^{-1} y
    lml: float


def matern52(r, signal_variance=1.0):
    """Matern 5/2 covariance at ARD-scaled distance r >= 0."""
    c = _SQRT5 * np.asarray(r, dtype=float)
    return signal_variance * (1.0 + c + c * c / 3.0) * np.exp(-c)


def _scaled_sq_dists(A, B, lengthscales):
    diff = (A[:, None, :] - B[None, :, :]) / lengthscales
    return np.sum(diff * diff, axis=2)


def kernel_matrix(A, B, theta):
    r = np.sqrt(np.maximum(_scaled_sq_dists(A, B, theta.lengthscales), 0.0))
    return matern52(r, theta.signal_variance)


def _chol(dataset, theta):
    m = len(dataset.X)
    K = kernel_matrix(dataset.X, dataset.X, theta)
    K[np.diag_indices(m)] += theta.jitter
    try:
        return cholesky(K, lower=True)
    except LinAlgError as err:
        raise FactorizationError(str(err)) from None


def log_marginal_likelihood(dataset, theta):
    """-1/2 log|K| - 1/2 y^T K^{-1} y - m/2 log 2pi, via Cholesky."""
    L = _chol(dataset, theta)
    alpha = cho_solve((L, True), dataset.y)
    m = len(dataset.y)
    return float(
        -np.sum(np.log(np.diag(L)))
        - 0.5 * dataset.y @ alpha
        - 0.5 * m * np.log(2 * np.pi)
    )


def _pairwise_sq_diffs(X):
    """(m, m, d) tensor of per-coordinate squared differences."""
    diff = X[:, None, :] - X[None, :, :]
    return diff * diff


def lml_with_gradient(dataset, theta, sq_diffs=None):
    """Log marginal likelihood and its gradient.

    Gradient coordinates follow the fitted log-parameterisation:
    (log lengthscale_1..d, log signal_variance). `sq_diffs` lets a
    hyperparameter search reuse the lengthscale-free distance tensor.
    """
    X, y = dataset.X, dataset.y
    m, d = X.shape
    ls = theta.lengthscales
    if sq_diffs is None:
        sq_diffs = _pairwise_sq_diffs(X)
    sq = sq_diffs @ (1.0 / (ls * ls))
    r = np.sqrt(np.maximum(sq, 0.0))
    c = _SQRT5 * r
    expc = np.exp(-c)
    K_nj = theta.signal_variance * (1.0 + c + c * c / 3.0) * expc
    K = K_nj.copy()
    K[np.diag_indices(m)] += theta.jitter
    try:
        L = cholesky(K, lower=True)
    except LinAlgError as err:
        raise FactorizationError(str(err)) from None
    alpha = cho_solve((L, True), y)
    lml = float(-np.sum(np.log(np.diag(L))) - 0.5 * y @ alpha - 0.5 * m * np.log(2 * np.pi))

    # dpotri: K^{-1} from the factor at ~half the cost of two full solves
    Kinv, info = dpotri(L, lower=1)
    if info != 0:
        raise FactorizationError(f"dpotri failed with info={info}")
    Kinv = Kinv + np.tril(Kinv, -1).T  # dpotri fills one triangle
    # dL/dtheta_j = 1/2 alpha^T dK alpha - 1/2 tr(K^{-1} dK)
    W = np.outer(alpha, alpha) - Kinv
    grad = np.empty(d + 1)
    base = 0.5 * theta.signal_variance * (5.0 / 3.0) * ((1.0 + c) * expc * W)
    for j in range(d):
        grad[j] = np.sum(base * sq_diffs[:, :, j]) / (ls[j] * ls[j])
    grad[d] = 0.5 * np.sum(W * K_nj)  # d/dlog sv: dK = K without jitter
    return lml, grad


def _log_bounds(d):
    lb = [np.log(LENGTHSCALE_BOUNDS[0])] * d + [np.log(SIGNAL_VARIANCE_BOUNDS[0])]
    ub = [np.log(LENGTHSCALE_BOUNDS[1])] * d + [np.log(SIGNAL_VARIANCE_BOUNDS[1])]
    return np.array(lb), np.array(ub)


def _theta_from_log(log_theta, d):
    return Hyperparams(
        lengthscales=np.exp(log_theta[:d]),
        signal_variance=float(np.exp(log_theta[d])),
    )


def fit(dataset, restarts=10, rng=None, warm_start=None):
    """Maximum-likelihood hyperparameters over `restarts` L-BFGS-B climbs.

    The first restart starts from `warm_start` (usually the previous
    refit's theta) or a fixed sane default; the rest start uniformly at
    random inside the log-space bound box. Returns the best model found.
    """
    if len(dataset.X) < 2:
        raise ValueError("fit needs at least 2 observations")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if rng is None:
        rng = np.random.default_rng(0)
    d = dataset.d
    lb, ub = _log_bounds(d)

    sq_diffs = _pairwise_sq_diffs(dataset.X)

    def objective(log_theta):
        try:
            lml, grad = lml_with_gradient(dataset, _theta_from_log(log_theta, d), sq_diffs)
        except FactorizationError:
            return _FAILED_OBJECTIVE, np.zeros(d + 1)
        return -lml, -grad

    if warm_start is not None:
        first = np.concatenate(
            [np.log(warm_start.lengthscales), [np.log(warm_start.signal_variance)]]
        )
        first = np.clip(first, lb, ub)
    else:
        first = np.concatenate(
            [np.full(d, np.log(_DEFAULT_LENGTHSCALE)), [np.log(_DEFAULT_SIGNAL_VARIANCE)]]
        )
    starts = [first] + [rng.uniform(lb, ub) for _ in range(restarts - 1)]

    best_log_theta, best_neg = None, np.inf
    for x0 in starts:
        res = minimize(objective, x0, jac=True, method="L-BFGS-B", bounds=list(zip(lb, ub)))
        if res.fun < best_neg and res.fun < _FAILED_OBJECTIVE:
            best_neg, best_log_theta = res.fun, res.x
    if best_log_theta is None:
        raise AllRestartsFailedError("no restart produced a factorizable model")

    theta = _theta_from_log(best_log_theta, d)
    L = _chol(dataset, theta)
    alpha = cho_solve((L, True), dataset.y)
    return GpModel(dataset=dataset, theta=theta, L=L, alpha=alpha, lml=-best_neg)


def model_from_theta(dataset, theta):
    """Model with fixed hyperparameters (no fitting)."""
    L = _chol(dataset, theta)
    alpha = cho_solve((L, True), dataset.y)
    return GpModel(
        dataset=dataset,
        theta=theta,
        L=L,
        alpha=alpha,
        lml=log_marginal_likelihood(dataset, theta),
    )


_CLAMP_TOL = 1e-9


def predict_batch(model, X):
    """Posterior mean and stdev at each row of X (unit-cube coords)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if np.any(X < -_CLAMP_TOL) or np.any(X > 1.0 + _CLAMP_TOL):
        raise ValueError("query outside the unit cube beyond tolerance")
    X = np.clip(X, 0.0, 1.0)
    k_star = kernel_matrix(model.dataset.X, X, model.theta)  # (m, n)
    mu = k_star.T @ model.alpha
    v = solve_triangular(model.L, k_star, lower=True)
    var = model.theta.signal_variance - np.sum(v * v, axis=0)
    sigma = np.sqrt(np.maximum(var, 0.0))
    return mu, sigma


def predict(model, x):
    mu, sigma = predict_batch(model, np.asarray(x, dtype=float).reshape(1, -1))
    return Prediction(mu=float(mu[0]), sigma=float(sigma[0]))
