"""Closed-form acquisition functions over (mu, sigma).

Everything uses the maximisation convention: f_star is the largest
standardised observation, and s = (mu - f_star) / sigma. All functions
broadcast over numpy arrays; scalars in, scalar out.

Deep-tail policy: for s < -8 the products s*Phi(s) and phi(s) underflow
or cancel, so EI and WEI switch to a log-space form built on log_ndtr.
"""

from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import log_ndtr, ndtr

_LOG_2PI = np.log(2.0 * np.pi)
_TAIL_S = -8.0


def _phi(s):
    return np.exp(-0.5 * s * s) / np.sqrt(2.0 * np.pi)


def _log_phi(s):
    return -0.5 * (s * s + _LOG_2PI)


def _improvement_terms(s):
    """sigma-free part of EI, sigma * ei_term = EI: s*Phi(s) + phi(s).

    Stable for arbitrarily negative s: with q = Phi(s)/phi(s), the term
    equals phi(s) * (1 + s*q), and 1 + s*q -> 1/s^2 keeps full precision
    when computed through log_ndtr.
    """
    s = np.asarray(s, dtype=float)
    out = s * ndtr(s) + _phi(s)
    tail = s < _TAIL_S
    if np.any(tail):
        st = s[tail]
        q = np.exp(log_ndtr(st) - _log_phi(st))
        out[tail] = np.exp(_log_phi(st) + np.log1p(st * q))
    return np.maximum(out, 0.0)


def ei(mu, sigma, f_star):
    """Expected improvement sigma*(s*Phi(s) + phi(s)); >= 0 everywhere."""
    mu, sigma, f_star = np.broadcast_arrays(
        np.asarray(mu, float), np.asarray(sigma, float), np.asarray(f_star, float)
    )
    scalar = mu.ndim == 0
    mu, sigma, f_star = np.atleast_1d(mu), np.atleast_1d(sigma), np.atleast_1d(f_star)
    out = np.empty_like(mu)
    degenerate = sigma <= 0.0
    out[degenerate] = np.maximum(mu[degenerate] - f_star[degenerate], 0.0)
    ok = ~degenerate
    s = (mu[ok] - f_star[ok]) / sigma[ok]
    out[ok] = sigma[ok] * _improvement_terms(s)
    return float(out[0]) if scalar else out


def wei(mu, sigma, f_star, omega):
    """Weighted EI sigma*(omega*s*Phi(s) + (1-omega)*phi(s)).

    omega = 0.5 halves EI; omega = 1 is the pure exploitation term
    (mu - f_star)*Phi(s), which can be negative below the incumbent.
    """
    if not 0.0 <= omega <= 1.0:
        raise ValueError("omega must lie in [0, 1]")
    mu, sigma, f_star = np.broadcast_arrays(
        np.asarray(mu, float), np.asarray(sigma, float), np.asarray(f_star, float)
    )
    scalar = mu.ndim == 0
    mu, sigma, f_star = np.atleast_1d(mu), np.atleast_1d(sigma), np.atleast_1d(f_star)
    out = np.empty_like(mu)
    degenerate = sigma <= 0.0
    out[degenerate] = omega * np.maximum(mu[degenerate] - f_star[degenerate], 0.0)
    ok = ~degenerate
    s = (mu[ok] - f_star[ok]) / sigma[ok]
    # omega*s*Phi + (1-omega)*phi == (1-2*omega)*phi + omega*(s*Phi + phi)
    vals = (1.0 - 2.0 * omega) * _phi(s) + omega * _improvement_terms(s)
    out[ok] = sigma[ok] * vals
    return float(out[0]) if scalar else out


def pi(mu, sigma, f_star):
    """Probability of improvement Phi(s); indicator(mu > f_star) at sigma=0."""
    mu, sigma, f_star = np.broadcast_arrays(
        np.asarray(mu, float), np.asarray(sigma, float), np.asarray(f_star, float)
    )
    scalar = mu.ndim == 0
    mu, sigma, f_star = np.atleast_1d(mu), np.atleast_1d(sigma), np.atleast_1d(f_star)
    out = np.empty_like(mu)
    degenerate = sigma <= 0.0
    out[degenerate] = (mu[degenerate] > f_star[degenerate]).astype(float)
    ok = ~degenerate
    out[ok] = ndtr((mu[ok] - f_star[ok]) / sigma[ok])
    return float(out[0]) if scalar else out


def ucb(mu, sigma, beta_t):
    """Upper confidence bound mu + sqrt(beta_t)*sigma."""
    if beta_t < 0:
        raise ValueError("beta_t must be >= 0")
    out = np.asarray(mu, float) + np.sqrt(beta_t) * np.asarray(sigma, float)
    return float(out) if np.ndim(out) == 0 else out


def beta_schedule(t, d, a=1.0, b=1.0, delta=0.01, r=1.0):
    """Confidence schedule for UCB on a continuous unit-cube domain.

    beta_t = 2 log(t^2 2 pi^2 / (3 delta))
           + 2 d log(t^2 d b r sqrt(log(4 d a / delta)))
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if t < 1:
        raise ValueError("t must be >= 1")
    inner = np.log(4.0 * d * a / delta)
    if inner <= 0.0:
        raise ValueError("log(4*d*a/delta) must be positive")
    arg1 = t * t * 2.0 * np.pi**2 / (3.0 * delta)
    arg2 = t * t * d * b * r * np.sqrt(inner)
    if arg1 <= 0.0 or arg2 <= 0.0:
        raise ValueError("beta schedule log arguments must be positive")
    return 2.0 * np.log(arg1) + 2.0 * d * np.log(arg2)


@lru_cache(maxsize=1)
def _gamma_pair():
    # maximize s*phi(s)/Phi(s) on [0, 10]
    res = minimize_scalar(
        lambda s: -s * _phi(s) / ndtr(s),
        bounds=(0.0, 10.0),
        method="bounded",
        options={"xatol": 1e-10},
    )
    gamma = -res.fun
    return float(gamma), float(gamma / (2.0 * gamma + 1.0))


def gamma_constant():
    """sup over s >= 0 of s*phi(s)/Phi(s), to absolute tolerance 1e-6."""
    return _gamma_pair()[0]


def wei_threshold():
    """gamma/(2*gamma + 1): smallest omega keeping dWEI/dmu >= 0 everywhere."""
    return _gamma_pair()[1]


def acq_partials(kind, mu, sigma, f_star=None, omega=None, beta_t=None):
    """Analytic (d/dmu, d/dsigma) of one acquisition at sigma > 0."""
    if sigma <= 0:
        raise ValueError("partials need sigma > 0")
    if kind == "UCB":
        if beta_t is None:
            raise ValueError("UCB partials need beta_t")
        return 1.0, float(np.sqrt(beta_t))
    if f_star is None:
        raise ValueError(f"{kind} partials need f_star")
    s = (mu - f_star) / sigma
    if kind == "EI":
        return float(ndtr(s)), float(_phi(s))
    if kind == "WEI":
        if omega is None:
            raise ValueError("WEI partials need omega")
        d_mu = omega * ndtr(s) + (2.0 * omega - 1.0) * s * _phi(s)
        d_sigma = (1.0 - omega + (1.0 - 2.0 * omega) * s * s) * _phi(s)
        return float(d_mu), float(d_sigma)
    if kind == "PI":
        return float(_phi(s) / sigma), float(-(s / sigma) * _phi(s))
    raise ValueError(f"unknown acquisition kind: {kind}")
