"""Summary statistics and significance machinery for result tables.

The comparison convention follows the experiment write-up: per problem,
the method with the lowest median final regret is "best", every other
method is tested one-sided (best stochastically smaller) with a paired
Wilcoxon signed-rank test, and methods whose Holm-adjusted test fails to
reject at alpha are marked statistically equivalent to the best.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

EXACT_LIMIT = 25  # exact null enumeration up to this many non-zero pairs


class TooFewPairsError(ValueError):
    """Fewer than 5 non-zero differences; the test is meaningless."""


class PairingMismatchError(ValueError):
    """Methods do not have equal-length, repeat-aligned result vectors."""


def median_mad(values):
    """(median, median absolute deviation from the median)."""
    v = np.asarray(values, dtype=float)
    if len(v) == 0:
        raise ValueError("median_mad needs at least one value")
    med = float(np.median(v))
    return med, float(np.median(np.abs(v - med)))


def _midranks(v):
    """Average ranks (1-based) with ties sharing their mid-rank."""
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v))
    sv = v[order]
    i = 0
    while i < len(sv):
        j = i
        while j + 1 < len(sv) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _exact_lower_tail(ranks2, w2):
    """P(W+ <= w) under the null, by rank-sum counting.

    ranks2 are doubled ranks (integers even with mid-ranks); counts the
    subsets of ranks with sum <= w2 among all 2^n sign assignments.
    """
    total = int(ranks2.sum())
    dp = np.zeros(total + 1, dtype=float)
    dp[0] = 1.0
    for r in ranks2:
        r = int(r)
        dp[r:] = dp[r:] + dp[: total + 1 - r]
    return float(dp[: w2 + 1].sum() / 2.0 ** len(ranks2))


def wilcoxon_one_sided(a, b):
    """Paired signed-rank test of H1: a stochastically smaller than b.

    Zero differences are dropped, tied magnitudes share mid-ranks. Exact
    null enumeration for n <= 25 non-zero pairs; above that, a normal
    approximation with tie and continuity corrections.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise PairingMismatchError("paired vectors must have equal length")
    diffs = a - b
    diffs = diffs[diffs != 0.0]
    n = len(diffs)
    if n < 5:
        raise TooFewPairsError(f"need >= 5 non-zero differences, got {n}")
    mags = np.abs(diffs)
    ranks = _midranks(mags)
    w_plus = float(ranks[diffs > 0].sum())

    if n <= EXACT_LIMIT:
        ranks2 = np.rint(2.0 * ranks).astype(np.int64)
        w2 = int(np.floor(2.0 * w_plus + 1e-9))
        return _exact_lower_tail(ranks2, w2)

    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, counts = np.unique(mags, return_counts=True)
    var -= np.sum(counts**3 - counts) / 48.0
    z = (w_plus - mean + 0.5) / np.sqrt(var)
    return float(ndtr(z))


def holm_bonferroni(p_values, alpha=0.05):
    """Step-down rejection flags, returned in the input order."""
    p = np.asarray(p_values, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    m = len(p)
    reject = np.zeros(m, dtype=bool)
    order = np.argsort(p, kind="stable")
    for k, idx in enumerate(order):
        if p[idx] <= alpha / (m - k):
            reject[idx] = True
        else:
            break
    return reject


def holm_adjusted(p_values):
    """Monotone step-down adjusted p-values (reject iff adjusted <= alpha)."""
    p = np.asarray(p_values, dtype=float)
    m = len(p)
    order = np.argsort(p, kind="stable")
    adj = np.empty(m)
    running = 0.0
    for k, idx in enumerate(order):
        running = max(running, min(1.0, (m - k) * p[idx]))
        adj[idx] = running
    return adj


@dataclass
class TableRow:
    method: str
    median: float
    mad: float
    best: bool
    equivalent: bool
    p_value: float = np.nan  # raw one-sided p vs the best method
    p_adjusted: float = np.nan


@dataclass
class ComparisonTable:
    rows: list
    alpha: float
    metadata: dict = field(default_factory=dict)


def build_table(results, alpha=0.05):
    """Comparison table from {method: per-repeat final regrets}.

    `results` preserves registration order; vectors must be repeat-aligned
    (pairing is by index). Identical vectors yield p = 1 (no evidence of a
    difference), so such methods are marked equivalent.
    """
    methods = list(results.keys())
    if len(methods) < 2:
        raise PairingMismatchError("need at least 2 methods to compare")
    lengths = {len(np.asarray(results[m])) for m in methods}
    if len(lengths) != 1:
        raise PairingMismatchError(f"unequal repeat counts: {sorted(lengths)}")

    stats = {m: median_mad(results[m]) for m in methods}
    medians = np.array([stats[m][0] for m in methods])
    best_idx = int(np.argmin(medians))
    tied = [methods[i] for i in np.where(medians == medians[best_idx])[0]]

    others = [m for i, m in enumerate(methods) if i != best_idx]
    best_vals = np.asarray(results[methods[best_idx]], dtype=float)
    raw_p = []
    for m in others:
        try:
            raw_p.append(wilcoxon_one_sided(best_vals, np.asarray(results[m], dtype=float)))
        except TooFewPairsError:
            raw_p.append(1.0)
    reject = holm_bonferroni(raw_p, alpha) if others else np.array([], dtype=bool)
    adjusted = holm_adjusted(raw_p) if others else np.array([])

    rows = []
    for i, m in enumerate(methods):
        med, mad = stats[m]
        if i == best_idx:
            rows.append(TableRow(method=m, median=med, mad=mad, best=True, equivalent=True))
        else:
            j = others.index(m)
            rows.append(
                TableRow(
                    method=m,
                    median=med,
                    mad=mad,
                    best=False,
                    equivalent=not bool(reject[j]),
                    p_value=float(raw_p[j]),
                    p_adjusted=float(adjusted[j]),
                )
            )
    meta = {"tie_break": "first-listed", "tied_best_medians": tied if len(tied) > 1 else []}
    return ComparisonTable(rows=rows, alpha=alpha, metadata=meta)


def table_to_dict(table):
    return {
        "alpha": table.alpha,
        "metadata": table.metadata,
        "rows": [
            {
                "method": r.method,
                "median": r.median,
                "mad": r.mad,
                "best": r.best,
                "equivalent": r.equivalent,
                "p_value": None if np.isnan(r.p_value) else r.p_value,
                "p_adjusted": None if np.isnan(r.p_adjusted) else r.p_adjusted,
            }
            for r in table.rows
        ],
    }


def render_table(table):
    """Aligned text table; ** marks the best method, * equivalent ones."""
    lines = [f"{'method':<12} {'median':>12} {'MAD':>12} {'p-adj':>10}  flag"]
    for r in table.rows:
        flag = "**" if r.best else ("*" if r.equivalent else "")
        p = "-" if np.isnan(r.p_adjusted) else f"{r.p_adjusted:.4f}"
        lines.append(f"{r.method:<12} {r.median:>12.4e} {r.mad:>12.4e} {p:>10}  {flag}")
    if table.metadata.get("tied_best_medians"):
        lines.append(f"note: median tie broken by listing order: {table.metadata['tied_best_medians']}")
    return "\n".join(lines)
