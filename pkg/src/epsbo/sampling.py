"""Seeded initial-design generators and rng stream derivation.

Every random draw in a run comes from a named stream whose seed is a pure
function of (master seed, problem, repeat, stream name, optional method).
Parallel execution therefore cannot reorder draws, and the initial design
for a given (problem, repeat) is identical across methods by construction.
"""

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

# Streams used by the harness. "design" deliberately excludes the method id
# so all methods share initial samples; the others include it.
STREAM_DESIGN = "design"
STREAM_STRATEGY = "strategy"
STREAM_MOEA = "moea"
STREAM_GP = "gp"


def seed_for(master_seed, problem_id, repeat, stream, method=None):
    """Derive a 64-bit child seed for one named stream.

    The derivation is a SHA-256 hash of the '|'-joined decimal/string
    coordinates, truncated to 8 bytes. Stable across processes and
    platforms, unlike Python's builtin hash().
    """
    parts = [str(int(master_seed)), str(problem_id), str(int(repeat)), str(stream)]
    if method is not None:
        parts.append(str(method))
    digest = hashlib.sha256("|".join(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def rng_for(master_seed, problem_id, repeat, stream, method=None):
    """numpy Generator for one named stream."""
    return np.random.default_rng(seed_for(master_seed, problem_id, repeat, stream, method))


@dataclass
class Design:
    """A batch of points in the unit cube, tagged with how it was made."""

    points: np.ndarray  # (n, d), every coordinate in [0, 1)
    kind: str  # "lhs" | "uniform"
    seed: int


def _latin_hypercube(n, d, rng):
    # one point per stratum [i/n, (i+1)/n) in every dimension
    strata = np.empty((n, d), dtype=np.int64)
    for j in range(d):
        strata[:, j] = rng.permutation(n)
    return (strata + rng.uniform(size=(n, d))) / n


def maximin_lhs(n, d, seed, candidates=100):
    """Max-min Latin hypercube design.

    Draws `candidates` independent jittered LHS designs and keeps the one
    with the largest minimum pairwise Euclidean distance.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be at least 1")
    rng = np.random.default_rng(seed)
    best, best_sep = None, -np.inf
    for _ in range(candidates):
        pts = _latin_hypercube(n, d, rng)
        sep = pdist(pts).min() if n > 1 else np.inf
        if sep > best_sep:
            best, best_sep = pts, sep
    return Design(points=best, kind="lhs", seed=seed)


def uniform_design(n, d, seed):
    """n i.i.d. uniform points in [0,1)^d."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be at least 1")
    rng = np.random.default_rng(seed)
    return Design(points=rng.uniform(size=(n, d)), kind="uniform", seed=seed)
