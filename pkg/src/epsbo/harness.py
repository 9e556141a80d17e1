"""Optimisation driver, batch runner, persistence, and report emission.

A run evaluates exactly `budget` points: an initial max-min LHS design of
`init` points shared by every method at the same (master seed, problem,
repeat), then one point per iteration chosen by the configured strategy
with the model refit from scratch each time. Runs persist as one JSON
file each plus a batch manifest; resumption matches on a content hash of
the resolved configuration.
"""

import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from time import perf_counter

import numpy as np

from .benchmarks import evaluate, from_unit_cube, get_problem, observe_optimum
from .gp import append_observation, fit, make_dataset
from .pareto import MoeaParams
from .sampling import (
    STREAM_DESIGN,
    STREAM_GP,
    STREAM_MOEA,
    STREAM_STRATEGY,
    maximin_lhs,
    rng_for,
    seed_for,
)
from .strategies import DUPLICATE_DIST, EPS_STRATEGIES, GP_FREE, STRATEGY_IDS, duplicate_guard, select_next

log = logging.getLogger(__name__)

RUN_FORMAT = "epsbo-run-v1"
DEFAULT_EPSILON = 0.1
EPS_SWEEP_GRID = (0.01, 0.05, 0.1, 0.2, 0.3, 0.5)
SWEEP_SNAPSHOTS = (50, 150, 250)


@dataclass
class ExperimentConfig:
    problem: str
    method: str
    epsilon: float = None  # eps methods only; None -> 0.1
    budget: int = 250
    init: int = None  # None -> 2d
    repeats: int = 51
    master_seed: int = 0
    gp_restarts: int = 10
    moea: dict = field(default_factory=dict)  # MoeaParams field overrides
    out: str = "out"

    def label(self):
        if self.method in EPS_STRATEGIES:
            eps = DEFAULT_EPSILON if self.epsilon is None else self.epsilon
            return f"{self.method}({eps:g})"
        return self.method

    def slug(self):
        return self.label().replace("(", "-eps").replace(")", "")


def method_label(method, epsilon):
    if method in EPS_STRATEGIES:
        return f"{method}({epsilon:g})"
    return method


def resolve_config(config):
    """Concrete, hashable snapshot of a config with all defaults filled in."""
    problem = get_problem(config.problem)
    if config.method not in STRATEGY_IDS:
        raise ValueError(f"unknown method {config.method!r}")
    M = 2 * problem.d if config.init is None else int(config.init)
    T = int(config.budget)
    if M < 1 or M > T:
        raise ValueError(f"need 1 <= init <= budget, got init={M} budget={T}")
    if config.repeats < 1:
        raise ValueError("repeats must be >= 1")
    eps = None
    if config.method in EPS_STRATEGIES:
        eps = DEFAULT_EPSILON if config.epsilon is None else float(config.epsilon)
        if not 0.0 <= eps <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {eps}")
    elif config.epsilon is not None:
        raise ValueError(f"{config.method} does not take an epsilon")
    moea = None
    if config.method not in GP_FREE:
        params = MoeaParams.for_dim(problem.d)
        if config.moea:
            params = dataclasses.replace(params, **config.moea)
        moea = dataclasses.asdict(params)
    return {
        "problem": config.problem,
        "method": config.method,
        "epsilon": eps,
        "budget": T,
        "init": M,
        "master_seed": int(config.master_seed),
        "gp_restarts": int(config.gp_restarts),
        "moea": moea,
    }


def _canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(snapshot):
    """Short content hash of a resolved config (reference optimum excluded,

    so a later registry update cannot orphan persisted runs)."""
    hashed = {k: v for k, v in snapshot.items() if k != "f_opt_ref"}
    return hashlib.sha256(_canonical_json(hashed).encode()).hexdigest()[:12]


@dataclass
class RunRecord:
    config: dict  # resolved snapshot, plus repeat and the reference optimum used
    rows: list  # per-evaluation dicts: t, x (native), f, best, branch
    timing: dict
    final_regret: float

    def to_dict(self):
        return {
            "format": RUN_FORMAT,
            "run_key": config_hash(self.config),
            "config": self.config,
            "rows": self.rows,
            "final_regret": self.final_regret,
            "timing": self.timing,
        }

    def canonical_bytes(self):
        """Deterministic serialization; wall-times are excluded."""
        d = self.to_dict()
        del d["timing"]
        return _canonical_json(d).encode()

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path):
        d = json.loads(Path(path).read_text())
        if d.get("format") != RUN_FORMAT:
            raise ValueError(f"{path}: not a {RUN_FORMAT} file")
        return cls(
            config=d["config"],
            rows=d["rows"],
            timing=d["timing"],
            final_regret=d["final_regret"],
        )


def _row(t, x_native, f, best, branch):
    return {
        "t": int(t),
        "x": [float(v) for v in np.atleast_1d(x_native)],
        "f": float(f),
        "best": float(best),
        "branch": branch,
    }


def _lhs_baseline_next(pool, X_seen):
    """First pool row not already evaluated (within the duplicate radius)."""
    for i, row in enumerate(pool):
        if np.min(np.linalg.norm(X_seen - row, axis=1)) >= DUPLICATE_DIST:
            return row, pool[i + 1 :]
    return pool[0], pool[1:]  # all residual rows duplicate; take one anyway


def run_bo(config, repeat_index):
    """One full optimisation run; deterministic given (config, repeat_index)."""
    snapshot = resolve_config(config)
    problem = get_problem(config.problem)
    T, M = snapshot["budget"], snapshot["init"]
    method, eps = snapshot["method"], snapshot["epsilon"]
    seed_args = (snapshot["master_seed"], problem.id, repeat_index)

    t_start = perf_counter()
    fit_s = 0.0
    select_s = 0.0

    design = maximin_lhs(M, problem.d, seed_for(*seed_args, STREAM_DESIGN))
    rows = []
    X_unit = list(design.points)
    y_obs = []
    best = np.inf
    for t, xu in enumerate(design.points, start=1):
        xn = from_unit_cube(problem, xu)
        f = evaluate(problem, xn)
        best = min(best, f)
        y_obs.append(f)
        rows.append(_row(t, xn, f, best, "design"))

    if method in GP_FREE:
        rng = rng_for(*seed_args, STREAM_STRATEGY, method)
        pool = None
        if method == "LHS":
            pool = maximin_lhs(T, problem.d, seed_for(*seed_args, STREAM_STRATEGY, method)).points
        for t in range(M + 1, T + 1):
            if method == "Uniform" or (pool is not None and len(pool) == 0):
                xu = rng.uniform(size=problem.d)
            else:
                xu, pool = _lhs_baseline_next(pool, np.asarray(X_unit))
            xn = from_unit_cube(problem, xu)
            f = evaluate(problem, xn)
            best = min(best, f)
            X_unit.append(xu)
            rows.append(_row(t, xn, f, best, "design"))
    else:
        rng_strategy = rng_for(*seed_args, STREAM_STRATEGY, method)
        rng_moea = rng_for(*seed_args, STREAM_MOEA, method)
        rng_gp = rng_for(*seed_args, STREAM_GP, method)
        moea_params = MoeaParams(**snapshot["moea"])
        dataset = make_dataset(np.asarray(X_unit), np.asarray(y_obs))
        warm = None
        for t in range(M + 1, T + 1):
            t0 = perf_counter()
            model = fit(dataset, restarts=snapshot["gp_restarts"], rng=rng_gp, warm_start=warm)
            warm = model.theta
            t1 = perf_counter()
            fit_s += t1 - t0
            trace = select_next(
                method, model, dataset, t, rng_strategy, rng_moea, moea_params, epsilon=eps
            )
            xu, perturbed = duplicate_guard(trace.x, dataset, rng_strategy)
            select_s += perf_counter() - t1
            if perturbed:
                log.info("%s r%d t%d: duplicate proposal perturbed", problem.id, repeat_index, t)
            xn = from_unit_cube(problem, xu)
            f = evaluate(problem, xn)
            best = min(best, f)
            dataset = append_observation(dataset, xu, f)
            rows.append(_row(t, xn, f, best, trace.branch))

    observe_optimum(problem, best)
    record_config = dict(snapshot, repeat=int(repeat_index), f_opt_ref=float(problem.f_opt_ref))
    timing = {
        "total_s": perf_counter() - t_start,
        "fit_s": fit_s,
        "select_s": select_s,
    }
    return RunRecord(
        config=record_config,
        rows=rows,
        timing=timing,
        final_regret=float(best - problem.f_opt_ref),
    )


def _run_path(runs_dir, config, repeat_index):
    snapshot = resolve_config(config)
    key = config_hash(dict(snapshot, repeat=int(repeat_index)))
    return Path(runs_dir) / f"{config.problem}__{config.slug()}__r{repeat_index}__{key}.json"


def run_experiment(configs, resume=False):
    """Execute a config matrix, persist records, and build per-problem tables.

    Failures are collected and reported without aborting the batch.
    """
    from .stats import PairingMismatchError, build_table, table_to_dict

    configs = list(configs)
    records = []
    failures = []
    out_dirs = set()
    for cfg in configs:
        out_dir = Path(cfg.out)
        runs_dir = out_dir / "runs"
        runs_dir.mkdir(parents=True, exist_ok=True)
        out_dirs.add(out_dir)
        for rep in range(cfg.repeats):
            path = _run_path(runs_dir, cfg, rep)
            if resume and path.exists():
                try:
                    records.append(RunRecord.load(path))
                    continue
                except (ValueError, KeyError, json.JSONDecodeError):
                    log.warning("unreadable run file %s; re-running", path)
            try:
                rec = run_bo(cfg, rep)
            except Exception as exc:  # partial-failure contract
                log.error("run failed: %s %s r%d: %r", cfg.problem, cfg.label(), rep, exc)
                failures.append(
                    {"problem": cfg.problem, "method": cfg.label(), "repeat": rep, "error": repr(exc)}
                )
                continue
            rec.save(path)
            records.append(rec)

    tables = {}
    by_problem = {}
    for rec in records:
        by_problem.setdefault(rec.config["problem"], []).append(rec)
    for problem_id, recs in by_problem.items():
        grouped = group_final_regrets(recs)
        if len(grouped) < 2:
            continue
        try:
            tables[problem_id] = table_to_dict(build_table(grouped))
        except PairingMismatchError as exc:
            failures.append({"problem": problem_id, "method": "<table>", "repeat": -1, "error": repr(exc)})

    manifest = {
        "format": "epsbo-manifest-v1",
        "runs": [_run_path(Path(c.out) / "runs", c, r).name for c in configs for r in range(c.repeats)],
        "n_completed": len(records),
        "failures": failures,
    }
    for out_dir in out_dirs:
        (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1))

    return {
        "n_runs": len(records),
        "failures": failures,
        "tables": tables,
        "records": records,
    }


def _label_of(record):
    return method_label(record.config["method"], record.config["epsilon"])


def group_final_regrets(records):
    """{method label: regret vector aligned by repeat}, first-seen label order.

    Only repeats present for every label are kept, so vectors stay paired
    when some runs failed.
    """
    per_label = {}
    for rec in records:
        per_label.setdefault(_label_of(rec), {})[rec.config["repeat"]] = rec.final_regret
    if not per_label:
        return {}
    common = set.intersection(*(set(d) for d in per_label.values()))
    if not common:
        return {}
    reps = sorted(common)
    return {label: np.array([d[r] for r in reps]) for label, d in per_label.items()}


def _regret_traces(records):
    """(labels in first-seen order, T, {label: (n_records, T) regret matrix})."""
    budgets = {rec.config["budget"] for rec in records}
    if len(budgets) != 1:
        raise ValueError(f"records mix budgets {sorted(budgets)}")
    T = budgets.pop()
    traces = {}
    for rec in records:
        ref = rec.config["f_opt_ref"]
        trace = [row["best"] - ref for row in rec.rows]
        traces.setdefault(_label_of(rec), []).append(trace)
    return list(traces), T, {k: np.asarray(v) for k, v in traces.items()}


def emit_convergence(records, path):
    """Per-strategy quartile regret curves as CSV (strategy, t, q25, median, q75)."""
    problems = {rec.config["problem"] for rec in records}
    if len(problems) != 1:
        raise ValueError(f"records mix problems {sorted(problems)}; emit per problem")
    labels, T, traces = _regret_traces(records)
    lines = ["strategy,t,q25,median,q75"]
    for label in labels:
        mat = traces[label]
        quarts = np.percentile(mat, [25, 50, 75], axis=0)
        for t in range(T):
            q25, med, q75 = (float(q[t]) for q in quarts)
            lines.append(f"{label},{t + 1},{q25!r},{med!r},{q75!r}")
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)


def emit_eps_sweep(records, path):
    """Quartile regret at snapshot budgets per (method, epsilon), as CSV."""
    eps_records = [r for r in records if r.config["method"] in EPS_STRATEGIES]
    if not eps_records:
        raise ValueError("no epsilon-strategy records to sweep")
    lines = ["method,epsilon,t,q25,median,q75"]
    by_combo = {}
    for rec in eps_records:
        key = (rec.config["method"], rec.config["epsilon"], rec.config["budget"])
        by_combo.setdefault(key, []).append(rec)
    for (method, eps, T), recs in sorted(by_combo.items()):
        snapshots = sorted({s for s in SWEEP_SNAPSHOTS if s <= T} | {T})
        traces = np.asarray(
            [[row["best"] - rec.config["f_opt_ref"] for row in rec.rows] for rec in recs]
        )
        for t in snapshots:
            q25, med, q75 = (float(q) for q in np.percentile(traces[:, t - 1], [25, 50, 75]))
            lines.append(f"{method},{eps!r},{t},{q25!r},{med!r},{q75!r}")
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)


def load_records(out_dir):
    """All persisted runs under out_dir/runs, sorted by file name."""
    runs_dir = Path(out_dir) / "runs"
    if not runs_dir.is_dir():
        raise FileNotFoundError(f"no runs directory under {out_dir}")
    return [RunRecord.load(p) for p in sorted(runs_dir.glob("*.json"))]
