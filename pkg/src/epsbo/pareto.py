"""Dominance machinery over (mu, sigma) and an NSGA-II optimiser.

Both objectives are maximised. The evaluator contract is batched: it maps
an (n, d) array of unit-cube points to an (n, 2) array of objectives,
which lets a GP posterior serve as the evaluator without per-point
overhead. Variation operators accept single points or (k, d) stacks.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class MoeaParams:
    pop_size: int
    generations: int = 50
    crossover_prob: float = 0.8
    mutation_prob: float = 0.1
    eta_crossover: float = 20.0
    eta_mutation: float = 20.0
    eval_budget_cap: int = 0

    @classmethod
    def for_dim(cls, d, pop_per_dim=100, generations=50, eval_cap_per_dim=5000):
        return cls(
            pop_size=pop_per_dim * d,
            generations=generations,
            crossover_prob=0.8,
            mutation_prob=1.0 / d,
            eta_crossover=20.0,
            eta_mutation=20.0,
            eval_budget_cap=eval_cap_per_dim * d,
        )

    def __post_init__(self):
        if self.pop_size < 2 or self.pop_size % 2:
            raise ValueError("pop_size must be even and >= 2")
        if self.eval_budget_cap <= 0:
            self.eval_budget_cap = self.pop_size * (self.generations + 1)


@dataclass
class Individual:
    x: np.ndarray
    obj: tuple  # (mu, sigma)
    rank: int
    crowding: float


@dataclass
class ParetoArchive:
    """Mutually non-dominated individuals from the final population."""

    members: list
    X: np.ndarray  # (k, d)
    F: np.ndarray  # (k, 2)
    evals_used: int

    def __len__(self):
        return len(self.members)


def dominates(a, b):
    """a dominates b: at least as large in both objectives, not equal."""
    return a[0] >= b[0] and a[1] >= b[1] and (a[0] > b[0] or a[1] > b[1])


def _dominance_matrix(F):
    mu, sg = F[:, 0], F[:, 1]
    ge0 = mu[:, None] >= mu[None, :]
    ge1 = sg[:, None] >= sg[None, :]
    eq = (mu[:, None] == mu[None, :]) & (sg[:, None] == sg[None, :])
    return ge0 & ge1 & ~eq


def non_dominated_filter(F):
    """Indices of points not dominated by any other; duplicates retained."""
    F = np.asarray(F, dtype=float).reshape(-1, 2)
    if len(F) == 0:
        raise ValueError("empty objective list")
    D = _dominance_matrix(F)
    return np.where(~D.any(axis=0))[0]


def fast_nondominated_sort(F):
    """Non-domination rank per point (0 = Pareto front of the set)."""
    F = np.asarray(F, dtype=float).reshape(-1, 2)
    n = len(F)
    D = _dominance_matrix(F)
    dom_count = D.sum(axis=0).astype(np.int64)
    ranks = np.full(n, -1, dtype=np.int64)
    rank = 0
    while True:
        front = np.where((ranks < 0) & (dom_count == 0))[0]
        if len(front) == 0:
            break
        ranks[front] = rank
        dom_count -= D[front].sum(axis=0)
        dom_count[front] = -1  # keep assigned points out of later fronts
        rank += 1
    return ranks


def crowding_distance(F):
    """Normalized cuboid side-length sums within one front; +inf at extremes."""
    F = np.asarray(F, dtype=float).reshape(-1, 2)
    k = len(F)
    dist = np.zeros(k)
    if k <= 2:
        return np.full(k, np.inf)
    for j in range(F.shape[1]):
        order = np.argsort(F[:, j], kind="stable")
        col = F[order, j]
        span = col[-1] - col[0]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span > 0:
            dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def sbx_crossover(p1, p2, eta, prob, rng):
    """Simulated binary crossover, clipped to [0,1]; accepts (d,) or (k,d)."""
    single = np.asarray(p1).ndim == 1
    p1 = np.atleast_2d(np.asarray(p1, dtype=float))
    p2 = np.atleast_2d(np.asarray(p2, dtype=float))
    k, d = p1.shape
    c1, c2 = p1.copy(), p2.copy()
    do_pair = rng.uniform(size=k) < prob
    do_var = (rng.uniform(size=(k, d)) < 0.5) & do_pair[:, None]
    u = rng.uniform(size=(k, d))
    bq = np.where(
        u <= 0.5,
        (2.0 * u) ** (1.0 / (eta + 1.0)),
        (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta + 1.0)),
    )
    a = 0.5 * ((1.0 + bq) * p1 + (1.0 - bq) * p2)
    b = 0.5 * ((1.0 - bq) * p1 + (1.0 + bq) * p2)
    c1[do_var] = a[do_var]
    c2[do_var] = b[do_var]
    np.clip(c1, 0.0, 1.0, out=c1)
    np.clip(c2, 0.0, 1.0, out=c2)
    if single:
        return c1[0], c2[0]
    return c1, c2


def polynomial_mutation(x, eta, prob, rng):
    """Bounded polynomial mutation on [0,1]; accepts (d,) or (k,d)."""
    single = np.asarray(x).ndim == 1
    x = np.atleast_2d(np.asarray(x, dtype=float)).copy()
    do = rng.uniform(size=x.shape) < prob
    u = rng.uniform(size=x.shape)
    # bounds are 0 and 1, so the normalized gap to each bound is x and 1-x
    low_side = u < 0.5
    dq_low = (2.0 * u + (1.0 - 2.0 * u) * (1.0 - x) ** (eta + 1.0)) ** (1.0 / (eta + 1.0)) - 1.0
    dq_high = 1.0 - (2.0 * (1.0 - u) + 2.0 * (u - 0.5) * x ** (eta + 1.0)) ** (1.0 / (eta + 1.0))
    dq = np.where(low_side, dq_low, dq_high)
    x[do] += dq[do]
    np.clip(x, 0.0, 1.0, out=x)
    return x[0] if single else x


def _tournament(ranks, crowding, n_picks, rng):
    a = rng.integers(len(ranks), size=n_picks)
    b = rng.integers(len(ranks), size=n_picks)
    a_wins = (ranks[a] < ranks[b]) | ((ranks[a] == ranks[b]) & (crowding[a] >= crowding[b]))
    return np.where(a_wins, a, b)


def _rank_crowd(F):
    ranks = fast_nondominated_sort(F)
    crowd = np.empty(len(F))
    for r in range(ranks.max() + 1):
        idx = np.where(ranks == r)[0]
        crowd[idx] = crowding_distance(F[idx])
    return ranks, crowd


def _truncate(F, pop_size):
    """Indices of the pop_size survivors by (rank, crowding) ordering."""
    ranks, crowd = _rank_crowd(F)
    chosen = []
    for r in range(ranks.max() + 1):
        idx = np.where(ranks == r)[0]
        if len(chosen) + len(idx) <= pop_size:
            chosen.extend(idx.tolist())
        else:
            take = pop_size - len(chosen)
            order = np.argsort(-crowd[idx], kind="stable")
            chosen.extend(idx[order[:take]].tolist())
        if len(chosen) == pop_size:
            break
    return np.array(chosen, dtype=np.int64)


def nsga2(evaluator, d, params, rng, seeds=None):
    """Approximate the (mu, sigma) Pareto set over [0,1]^d.

    Runs until `generations` offspring rounds or until another round would
    exceed eval_budget_cap evaluator calls, whichever binds first; returns
    the rank-0 members of the final population.
    """
    pop = rng.uniform(size=(params.pop_size, d))
    if seeds:
        for i, s in enumerate(seeds[: params.pop_size]):
            pop[i] = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    F = np.asarray(evaluator(pop), dtype=float).reshape(len(pop), 2)
    evals = len(pop)

    ranks, crowd = _rank_crowd(F)
    gen = 0
    while gen < params.generations and evals + params.pop_size <= params.eval_budget_cap:
        parents = _tournament(ranks, crowd, params.pop_size, rng)
        half = params.pop_size // 2
        p1, p2 = pop[parents[:half]], pop[parents[half:]]
        c1, c2 = sbx_crossover(p1, p2, params.eta_crossover, params.crossover_prob, rng)
        children = np.vstack([c1, c2])
        children = polynomial_mutation(children, params.eta_mutation, params.mutation_prob, rng)
        Fc = np.asarray(evaluator(children), dtype=float).reshape(len(children), 2)
        evals += len(children)

        pop = np.vstack([pop, children])
        F = np.vstack([F, Fc])
        keep = _truncate(F, params.pop_size)
        pop, F = pop[keep], F[keep]
        ranks, crowd = _rank_crowd(F)
        gen += 1

    front = np.where(ranks == 0)[0]
    members = [
        Individual(x=pop[i].copy(), obj=(float(F[i, 0]), float(F[i, 1])), rank=0, crowding=float(crowd[i]))
        for i in front
    ]
    return ParetoArchive(members=members, X=pop[front].copy(), F=F[front].copy(), evals_used=evals)
