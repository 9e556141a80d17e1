"""Command-line interface tests.

Every test drives `main(argv)` in process and checks exit codes, emitted
files, and printed summaries. Real runs use second-scale budgets.
"""

import json
import subprocess
import sys

import pytest

from epsbo import harness
from epsbo.cli import main
from epsbo.harness import RunRecord, run_experiment


def run_args(out, method="LHS", budget="5", repeats="2", **extra):
    argv = [
        "run",
        "--problem", "WangFreitas",
        "--method", method,
        "--budget", budget,
        "--repeats", repeats,
        "--out", str(out),
        "--gp-restarts", "1",
    ]
    for flag, value in extra.items():
        argv += [f"--{flag.replace('_', '-')}", str(value)]
    return argv


def tiny_batch_configs(out, methods):
    from test_harness import tiny_config

    return [tiny_config(m, out=str(out), budget=5, repeats=2) for m in methods]


@pytest.fixture(scope="module")
def eps_out(tmp_path_factory):
    """Persisted runs for one problem with an epsilon method present."""
    out = tmp_path_factory.mktemp("eps_out")
    run_experiment(tiny_batch_configs(out, ("LHS", "EpsRS")))
    return out


@pytest.fixture(scope="module")
def plain_out(tmp_path_factory):
    """Persisted runs containing no epsilon-strategy records."""
    out = tmp_path_factory.mktemp("plain_out")
    run_experiment(tiny_batch_configs(out, ("LHS", "Uniform")))
    return out


class TestProblemsCommand:
    def test_lists_registered_problems(self, capsys):
        assert main(["problems"]) == 0
        out = capsys.readouterr().out
        for expected in ("WangFreitas", "Branin", "Hartmann6", "logSixHumpCamel"):
            assert expected in out
        assert out.splitlines()[0].startswith("id")

    def test_console_script_is_installed(self):
        proc = subprocess.run(
            [sys.executable, "-c", "from epsbo.cli import main; raise SystemExit(main(['problems']))"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "WangFreitas" in proc.stdout


class TestRunCommand:
    def test_design_baseline(self, tmp_path, capsys):
        assert main(run_args(tmp_path)) == 0
        out = capsys.readouterr().out
        assert "2 runs" in out and "final regret median" in out
        assert len(list((tmp_path / "runs").glob("*.json"))) == 2

    def test_config_mistakes_exit_two(self, tmp_path, capsys):
        assert main(run_args(tmp_path, method="Sobol")) == 2
        assert "unknown method" in capsys.readouterr().err
        assert main(run_args(tmp_path, epsilon="0.3")) == 2
        assert "does not take an epsilon" in capsys.readouterr().err

    def test_moea_flags_reach_the_config(self, tmp_path):
        argv = run_args(
            tmp_path, method="EI", repeats="1", init="2",
            moea_pop="10", moea_generations="2", moea_cap="100",
        )
        assert main(argv) == 0
        (path,) = (tmp_path / "runs").glob("*.json")
        moea = RunRecord.load(path).config["moea"]
        assert moea["pop_size"] == 10
        assert moea["generations"] == 2
        assert moea["eval_budget_cap"] == 100

    def test_resume_reuses_persisted_runs(self, tmp_path, monkeypatch):
        argv = run_args(tmp_path) + ["--resume"]
        assert main(argv) == 0
        monkeypatch.setattr(
            harness, "run_bo", lambda *a: pytest.fail("resume must reuse the files")
        )
        assert main(argv) == 0

    def test_runtime_failure_exits_nonzero(self, tmp_path, monkeypatch, capsys):
        def broken(cfg, rep):
            raise RuntimeError("boom")

        monkeypatch.setattr(harness, "run_bo", broken)
        assert main(run_args(tmp_path, repeats="1")) == 1
        assert "FAILED" in capsys.readouterr().err


class TestBatchCommand:
    def write_config(self, tmp_path, body):
        path = tmp_path / "matrix.json"
        path.write_text(json.dumps(body))
        return path

    def test_matrix_expansion_and_table(self, tmp_path, capsys):
        config = self.write_config(
            tmp_path,
            {
                "defaults": {
                    "problem": "WangFreitas",
                    "budget": 5,
                    "repeats": 1,
                    "seed": 3,
                    "out": str(tmp_path / "out"),
                },
                "experiments": [{"methods": ["LHS", "Uniform"]}],
            },
        )
        assert main(["batch", "--config", str(config)]) == 0
        out = capsys.readouterr().out
        assert "2 runs completed, 0 failed" in out
        assert "== WangFreitas ==" in out and "**" in out
        assert len(list((tmp_path / "out" / "runs").glob("*.json"))) == 2

    def test_epsilon_axis_expands_eps_methods(self, tmp_path):
        config = self.write_config(
            tmp_path,
            {
                "defaults": {
                    "problem": "WangFreitas",
                    "budget": 5,
                    "repeats": 1,
                    "gp_restarts": 1,
                    "moea": {"pop_size": 10, "generations": 2},
                    "out": str(tmp_path / "out"),
                },
                "experiments": [{"methods": ["EpsRS"], "epsilons": [0.0, 0.5]}],
            },
        )
        assert main(["batch", "--config", str(config)]) == 0
        names = sorted(p.name for p in (tmp_path / "out" / "runs").glob("*.json"))
        assert any("EpsRS-eps0__" in n for n in names)
        assert any("EpsRS-eps0.5__" in n for n in names)

    def test_epsilon_axis_collapses_to_duplicates_for_plain_methods(self, tmp_path, capsys):
        config = self.write_config(
            tmp_path,
            {
                "defaults": {"problem": "WangFreitas", "budget": 5, "repeats": 1},
                "experiments": [{"methods": ["LHS"], "epsilons": [0.1, 0.2]}],
            },
        )
        assert main(["batch", "--config", str(config)]) == 2
        assert "duplicate experiment" in capsys.readouterr().err

    def test_empty_config_rejected(self, tmp_path, capsys):
        config = self.write_config(tmp_path, {"experiments": []})
        assert main(["batch", "--config", str(config)]) == 2
        assert "no experiments" in capsys.readouterr().err

    def test_unknown_keys_rejected(self, tmp_path, capsys):
        config = self.write_config(
            tmp_path,
            {"experiments": [{"method": "LHS", "problem": "Branin", "wat": 1}]},
        )
        assert main(["batch", "--config", str(config)]) == 2
        assert "wat" in capsys.readouterr().err


class TestReportCommand:
    def test_default_emits_everything(self, eps_out, capsys):
        assert main(["report", "--in", str(eps_out)]) == 0
        out = capsys.readouterr().out
        assert "== WangFreitas ==" in out
        reports = eps_out / "reports"
        for name in (
            "table_WangFreitas.txt",
            "table_WangFreitas.json",
            "convergence_WangFreitas.csv",
            "eps_sweep.csv",
        ):
            assert (reports / name).exists()
        table = json.loads((reports / "table_WangFreitas.json").read_text())
        assert {row["method"] for row in table["rows"]} == {"LHS", "EpsRS(0.1)"}

    def test_single_report_flags(self, eps_out, capsys):
        assert main(["report", "--in", str(eps_out), "--convergence"]) == 0
        assert "convergence_WangFreitas.csv" in capsys.readouterr().out
        assert main(["report", "--in", str(eps_out), "--eps-sweep"]) == 0
        header = (eps_out / "reports" / "eps_sweep.csv").read_text().splitlines()[0]
        assert header == "method,epsilon,t,q25,median,q75"

    def test_explicit_sweep_without_eps_runs_fails(self, plain_out, capsys):
        assert main(["report", "--in", str(plain_out), "--eps-sweep"]) == 2
        assert "epsilon" in capsys.readouterr().err

    def test_default_report_tolerates_missing_sweep(self, plain_out):
        assert main(["report", "--in", str(plain_out)]) == 0
        assert (plain_out / "reports" / "convergence_WangFreitas.csv").exists()
        assert not (plain_out / "reports" / "eps_sweep.csv").exists()

    def test_empty_runs_directory(self, tmp_path, capsys):
        (tmp_path / "runs").mkdir()
        assert main(["report", "--in", str(tmp_path)]) == 2
        assert "no runs" in capsys.readouterr().err

    def test_missing_runs_directory(self, tmp_path, capsys):
        assert main(["report", "--in", str(tmp_path / "nowhere")]) == 2
        assert "no runs directory" in capsys.readouterr().err
