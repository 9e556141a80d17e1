"""Command-line front end: single runs, batch matrices, and report emission."""

import argparse
import json
import sys
from pathlib import Path

from .benchmarks import catalog
from .harness import (
    ExperimentConfig,
    emit_convergence,
    emit_eps_sweep,
    group_final_regrets,
    load_records,
    run_experiment,
)
from .stats import PairingMismatchError, build_table, render_table, table_to_dict


def _add_run_args(p):
    p.add_argument("--problem", required=True, help="registered problem id")
    p.add_argument("--method", required=True, help="strategy id")
    p.add_argument("--epsilon", type=float, default=None, help="exploration rate for EpsPF/EpsRS")
    p.add_argument("--budget", type=int, default=250, help="total expensive evaluations T")
    p.add_argument("--init", type=int, default=None, help="initial design size M (default 2d)")
    p.add_argument("--repeats", type=int, default=51)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--gp-restarts", type=int, default=10)
    p.add_argument("--moea-pop", type=int, default=None)
    p.add_argument("--moea-generations", type=int, default=None)
    p.add_argument("--moea-cap", type=int, default=None, help="front-search evaluation budget")
    p.add_argument("--resume", action="store_true", help="reuse persisted runs with matching hashes")


def build_parser():
    parser = argparse.ArgumentParser(prog="epsbo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    _add_run_args(sub.add_parser("run", help="run one problem/method configuration"))

    batch = sub.add_parser("batch", help="run a config-file matrix of experiments")
    batch.add_argument("--config", required=True, help="JSON config file")
    batch.add_argument("--resume", action="store_true")

    report = sub.add_parser("report", help="emit tables and curves from persisted runs")
    report.add_argument("--in", dest="in_dir", required=True, help="directory holding runs/")
    report.add_argument("--table", action="store_true")
    report.add_argument("--convergence", action="store_true")
    report.add_argument("--eps-sweep", action="store_true")

    sub.add_parser("problems", help="list the registered benchmark problems")
    return parser


def _moea_overrides(args):
    moea = {}
    if args.moea_pop is not None:
        moea["pop_size"] = args.moea_pop
    if args.moea_generations is not None:
        moea["generations"] = args.moea_generations
    if args.moea_cap is not None:
        moea["eval_budget_cap"] = args.moea_cap
    return moea


def cmd_run(args):
    cfg = ExperimentConfig(
        problem=args.problem,
        method=args.method,
        epsilon=args.epsilon,
        budget=args.budget,
        init=args.init,
        repeats=args.repeats,
        master_seed=args.seed,
        gp_restarts=args.gp_restarts,
        moea=_moea_overrides(args),
        out=args.out,
    )
    summary = run_experiment([cfg], resume=args.resume)
    regrets = [r.final_regret for r in summary["records"]]
    print(f"{cfg.problem} {cfg.label()}: {summary['n_runs']} runs -> {args.out}/runs/")
    if regrets:
        import numpy as np

        print(f"final regret median {np.median(regrets):.4e} (min {min(regrets):.4e})")
    for failure in summary["failures"]:
        print(f"FAILED: {failure}", file=sys.stderr)
    return 1 if summary["failures"] else 0


_CONFIG_KEYS = {
    "problem", "method", "epsilon", "budget", "init", "repeats",
    "seed", "master_seed", "gp_restarts", "moea", "out",
}


def _expand_batch_entry(entry, defaults):
    """One config per (problem x method x epsilon) combination in the entry."""
    merged = dict(defaults)
    merged.update(entry)
    unknown = set(merged) - _CONFIG_KEYS - {"problems", "methods", "epsilons"}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    problems = merged.pop("problems", None) or [merged.pop("problem")]
    methods = merged.pop("methods", None) or [merged.pop("method")]
    epsilons = merged.pop("epsilons", None) or [merged.pop("epsilon", None)]
    merged.pop("problem", None)
    merged.pop("method", None)
    if "seed" in merged:
        merged["master_seed"] = merged.pop("seed")
    configs = []
    for prob in problems:
        for meth in methods:
            for eps in epsilons:
                kwargs = dict(merged)
                if meth not in ("EpsPF", "EpsRS"):
                    eps = None
                configs.append(ExperimentConfig(problem=prob, method=meth, epsilon=eps, **kwargs))
    return configs


def cmd_batch(args):
    doc = json.loads(Path(args.config).read_text())
    defaults = doc.get("defaults", {})
    entries = doc.get("experiments")
    if not entries:
        print("config file has no experiments", file=sys.stderr)
        return 2
    configs = []
    for entry in entries:
        configs.extend(_expand_batch_entry(entry, defaults))
    # identical (problem, method, eps, seed) rows would collide on run files
    seen = set()
    for cfg in configs:
        key = (cfg.problem, cfg.label(), cfg.master_seed, cfg.out)
        if key in seen:
            print(f"duplicate experiment {key}", file=sys.stderr)
            return 2
        seen.add(key)
    summary = run_experiment(configs, resume=args.resume)
    print(f"{summary['n_runs']} runs completed, {len(summary['failures'])} failed")
    for problem_id, table in summary["tables"].items():
        print(f"\n== {problem_id} ==")
        for row in table["rows"]:
            flag = "**" if row["best"] else ("*" if row["equivalent"] else "")
            print(f"  {row['method']:<14} median {row['median']:.4e}  {flag}")
    for failure in summary["failures"]:
        print(f"FAILED: {failure}", file=sys.stderr)
    return 1 if summary["failures"] else 0


def cmd_report(args):
    records = load_records(args.in_dir)
    if not records:
        print(f"no runs under {args.in_dir}", file=sys.stderr)
        return 2
    want_all = not (args.table or args.convergence or args.eps_sweep)
    reports = Path(args.in_dir) / "reports"
    reports.mkdir(parents=True, exist_ok=True)
    by_problem = {}
    for rec in records:
        by_problem.setdefault(rec.config["problem"], []).append(rec)

    if args.table or want_all:
        for problem_id, recs in by_problem.items():
            grouped = group_final_regrets(recs)
            if len(grouped) < 2:
                print(f"{problem_id}: need >= 2 methods for a table", file=sys.stderr)
                continue
            try:
                table = build_table(grouped)
            except PairingMismatchError as exc:
                print(f"{problem_id}: {exc}", file=sys.stderr)
                continue
            text = render_table(table)
            (reports / f"table_{problem_id}.txt").write_text(text + "\n")
            (reports / f"table_{problem_id}.json").write_text(
                json.dumps(table_to_dict(table), indent=1)
            )
            print(f"== {problem_id} ==\n{text}\n")

    if args.convergence or want_all:
        for problem_id, recs in by_problem.items():
            path = emit_convergence(recs, reports / f"convergence_{problem_id}.csv")
            print(f"wrote {path}")

    if args.eps_sweep or want_all:
        try:
            path = emit_eps_sweep(records, reports / "eps_sweep.csv")
            print(f"wrote {path}")
        except ValueError as exc:
            if args.eps_sweep:  # explicit request for a sweep that cannot be built
                print(str(exc), file=sys.stderr)
                return 2
    return 0


def cmd_problems(_args):
    rows = catalog()
    print(f"{'id':<24} {'d':>2}  {'transform':<12} {'f_opt_ref':>18}  domain")
    for row in rows:
        box = f"[{row['lower'][0]:g}, {row['upper'][0]:g}]"
        if len(set(zip(row["lower"], row["upper"]))) > 1:
            box = " x ".join(f"[{lo:g}, {hi:g}]" for lo, hi in zip(row["lower"], row["upper"]))
        elif row["d"] > 1:
            box += f"^{row['d']}"
        partial = "  (partial domain)" if row["partial"] else ""
        print(f"{row['id']:<24} {row['d']:>2}  {row['transform']:<12} {row['f_opt_ref']:>18.12g}  {box}{partial}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {
        "run": cmd_run,
        "batch": cmd_batch,
        "report": cmd_report,
        "problems": cmd_problems,
    }[args.command]
    try:
        return handler(args)
    except (ValueError, FileNotFoundError) as exc:
        # config mistakes are unusable input, not runtime failures
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
