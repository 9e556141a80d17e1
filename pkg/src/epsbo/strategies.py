"""Selection policies: map a fitted model and data to the next query point.

All policies work in the unit cube. The scalar-acquisition policies and
the greedy branch of the epsilon-greedy pair pick from the NSGA-II
(mu, sigma) archive; PI uses its own sample-then-refine search. The two
GP-free baselines (LHS, Uniform) are driven directly by the harness and
have no selector here.

rng discipline: `rng_strategy` carries every policy-level draw (epsilon
coin, archive index, random point) and `rng_moea` is handed to NSGA-II,
so the coin is always drawn before any archive construction and the
greedy branches of EpsPF/EpsRS coincide for equal rng states.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .acquisition import beta_schedule, ei, pi, ucb
from .gp import predict_batch
from .pareto import MoeaParams, nsga2

STRATEGY_IDS = (
    "LHS",
    "Uniform",
    "Explore",
    "Exploit",
    "EI",
    "PI",
    "UCB",
    "PFRandom",
    "EpsPF",
    "EpsRS",
)
GP_FREE = ("LHS", "Uniform")
EPS_STRATEGIES = ("EpsPF", "EpsRS")

DUPLICATE_DIST = 1e-8
PERTURB_RADIUS = 1e-6


@dataclass
class SelectionTrace:
    x: np.ndarray  # chosen point, unit cube
    branch: str  # "greedy" | "explore" | "acq" | "archive-random" | "design"
    archive_size: int
    acq_value: float


def _evaluator(model):
    def evaluate(X):
        mu, sigma = predict_batch(model, X)
        return np.column_stack([mu, sigma])

    return evaluate


def pareto_front(model, dataset, rng_moea, moea_params=None):
    """NSGA-II archive over the posterior, seeded with the incumbent."""
    params = moea_params or MoeaParams.for_dim(dataset.d)
    incumbent = dataset.X[int(np.argmax(dataset.y))]
    return nsga2(_evaluator(model), dataset.d, params, rng_moea, seeds=[incumbent])


def _best_mu_index(archive):
    return int(np.argmax(archive.F[:, 0]))


def select_scalar_acq(model, dataset, kind, t, rng_moea, moea_params=None):
    """EI / UCB / Exploit / Explore: scan the archive for the best score."""
    archive = pareto_front(model, dataset, rng_moea, moea_params)
    mu, sigma = archive.F[:, 0], archive.F[:, 1]
    if kind == "EI":
        scores = ei(mu, sigma, float(np.max(dataset.y)))
    elif kind == "UCB":
        scores = ucb(mu, sigma, beta_schedule(t, dataset.d))
    elif kind == "Exploit":
        scores = mu
    elif kind == "Explore":
        scores = sigma
    else:
        raise ValueError(f"unknown scalar acquisition: {kind}")
    i = int(np.argmax(scores))
    return SelectionTrace(
        x=archive.X[i], branch="acq", archive_size=len(archive), acq_value=float(scores[i])
    )


def select_pi(model, dataset, rng, n_samples=None, n_refine=10, eval_cap=None):
    """Probability of improvement by uniform sampling plus local refinement.

    Samples 1000d candidates, then runs a bounded quasi-Newton climb
    (numeric gradients) from the 10 best; total posterior evaluations stay
    within the 5000d cap shared by the archive-based policies.
    """
    d = dataset.d
    if n_samples is None:
        n_samples = 1000 * d
    if eval_cap is None:
        eval_cap = 5000 * d
    f_star = float(np.max(dataset.y))

    X = rng.uniform(size=(n_samples, d))
    mu, sigma = predict_batch(model, X)
    values = pi(mu, sigma, f_star)
    evals = n_samples

    def objective(x):
        m, s = predict_batch(model, x.reshape(1, -1))
        return -pi(float(m[0]), float(s[0]), f_star)

    order = np.argsort(-values, kind="stable")[:n_refine]
    best_i = int(order[0])
    best_x, best_val = X[best_i], float(values[best_i])
    # leave headroom for the optimizer finishing its current FD batch
    per_start = max(1, (eval_cap - n_samples) // n_refine - 2 * (d + 1))
    for i in order:
        if evals >= eval_cap - (d + 1):
            break
        res = minimize(
            objective,
            X[i],
            method="L-BFGS-B",
            bounds=[(0.0, 1.0)] * d,
            options={"maxfun": per_start},
        )
        evals += res.nfev
        if -res.fun > best_val:
            best_val, best_x = float(-res.fun), np.clip(res.x, 0.0, 1.0)
    return SelectionTrace(x=best_x, branch="acq", archive_size=0, acq_value=best_val)


def select_pf_random(model, dataset, rng_strategy, rng_moea, moea_params=None):
    """Uniformly random member of the Pareto archive."""
    archive = pareto_front(model, dataset, rng_moea, moea_params)
    i = int(rng_strategy.integers(len(archive)))
    return SelectionTrace(
        x=archive.X[i],
        branch="archive-random",
        archive_size=len(archive),
        acq_value=float(archive.F[i, 0]),
    )


def select_eps_pf(model, dataset, epsilon, rng_strategy, rng_moea, moea_params=None):
    """With probability epsilon a random archive member, else argmax mu."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    explore = bool(rng_strategy.uniform() < epsilon)  # coin before the archive
    archive = pareto_front(model, dataset, rng_moea, moea_params)
    if explore:
        i = int(rng_strategy.integers(len(archive)))
        branch = "explore"
    else:
        i = _best_mu_index(archive)
        branch = "greedy"
    return SelectionTrace(
        x=archive.X[i], branch=branch, archive_size=len(archive), acq_value=float(archive.F[i, 0])
    )


def select_eps_rs(model, dataset, epsilon, rng_strategy, rng_moea, moea_params=None):
    """With probability epsilon a uniform random point, else argmax mu.

    The exploratory branch needs no archive, so NSGA-II is skipped there.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    explore = bool(rng_strategy.uniform() < epsilon)
    if explore:
        x = rng_strategy.uniform(size=dataset.d)
        return SelectionTrace(x=x, branch="explore", archive_size=0, acq_value=np.nan)
    archive = pareto_front(model, dataset, rng_moea, moea_params)
    i = _best_mu_index(archive)
    return SelectionTrace(
        x=archive.X[i], branch="greedy", archive_size=len(archive), acq_value=float(archive.F[i, 0])
    )


def duplicate_guard(x, dataset, rng):
    """Nudge a proposal that collides with an existing row.

    Collisions would make the kernel matrix singular on the next refit;
    the perturbation is componentwise uniform in +-1e-6, clipped to the
    cube. Returns (point, was_perturbed).
    """
    x = np.asarray(x, dtype=float)
    dists = np.linalg.norm(dataset.X - x, axis=1)
    if dists.min() >= DUPLICATE_DIST:
        return x, False
    nudged = x + rng.uniform(-PERTURB_RADIUS, PERTURB_RADIUS, size=x.shape)
    return np.clip(nudged, 0.0, 1.0), True


def select_next(method, model, dataset, t, rng_strategy, rng_moea, moea_params=None, epsilon=None):
    """Dispatch one BO-step selection for any model-based strategy id."""
    if method in ("EI", "UCB", "Exploit", "Explore"):
        return select_scalar_acq(model, dataset, method, t, rng_moea, moea_params)
    if method == "PI":
        return select_pi(model, dataset, rng_strategy)
    if method == "PFRandom":
        return select_pf_random(model, dataset, rng_strategy, rng_moea, moea_params)
    if method == "EpsPF":
        return select_eps_pf(model, dataset, 0.1 if epsilon is None else epsilon, rng_strategy, rng_moea, moea_params)
    if method == "EpsRS":
        return select_eps_rs(model, dataset, 0.1 if epsilon is None else epsilon, rng_strategy, rng_moea, moea_params)
    raise ValueError(f"unknown or GP-free strategy: {method}")
