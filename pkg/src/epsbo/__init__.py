"""Bayesian optimisation with Pareto-front epsilon-greedy acquisition strategies."""

from .acquisition import (
    acq_partials,
    beta_schedule,
    ei,
    gamma_constant,
    pi,
    ucb,
    wei,
    wei_threshold,
)
from .benchmarks import MAIN_SUITE, Problem, catalog, evaluate, get_problem
from .gp import Dataset, GpModel, Hyperparams, fit, make_dataset, predict, predict_batch
from .harness import (
    ExperimentConfig,
    RunRecord,
    emit_convergence,
    emit_eps_sweep,
    load_records,
    run_bo,
    run_experiment,
)
from .pareto import MoeaParams, ParetoArchive, nsga2
from .sampling import Design, maximin_lhs, seed_for, uniform_design
from .stats import build_table, holm_bonferroni, median_mad, wilcoxon_one_sided
from .strategies import STRATEGY_IDS, select_next

__version__ = "0.1.0"

__all__ = [
    "MAIN_SUITE",
    "STRATEGY_IDS",
    "Dataset",
    "Design",
    "ExperimentConfig",
    "GpModel",
    "Hyperparams",
    "MoeaParams",
    "ParetoArchive",
    "Problem",
    "RunRecord",
    "acq_partials",
    "beta_schedule",
    "build_table",
    "catalog",
    "ei",
    "emit_convergence",
    "emit_eps_sweep",
    "evaluate",
    "fit",
    "gamma_constant",
    "get_problem",
    "holm_bonferroni",
    "load_records",
    "make_dataset",
    "maximin_lhs",
    "median_mad",
    "nsga2",
    "pi",
    "predict",
    "predict_batch",
    "run_bo",
    "run_experiment",
    "seed_for",
    "select_next",
    "ucb",
    "uniform_design",
    "wei",
    "wei_threshold",
    "wilcoxon_one_sided",
]
