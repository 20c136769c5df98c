import csv
import json
from pathlib import Path
from textwrap import dedent

import numpy as np
import pytest

from altlin.bench import cli
from altlin.bench.config import OUT_DIR_ENV, load_experiment, validate_config
from altlin.bench import runner
from altlin.bench.runner import EXIT_CONFIG_ERROR, EXIT_DIVERGED, EXIT_OK, EXIT_SOLVER_FAILED, run_experiment
from altlin.core.matrix_io import read_mask, read_matrix
from altlin.errors import ConfigError, NumericFailureError
from altlin.problems.completion import CompletionSpec, generate_completion
from altlin.solvers.trace import read_trace_csv

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

LASSO = """
[problem]
kind = lasso
m = 30
n = 50
rho = 0.1
seed = 1

[solver:fista]
max_iter = 60

[solver:alm_s]
method = alm_s
max_iter = 60

[report]
checkpoints = 10, 50
"""


def write_config(tmp_path, text, name="experiment.ini"):
    path = tmp_path / name
    path.write_text(dedent(text))
    return path


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


class TestValidation:
    def test_valid_config(self, tmp_path):
        assert validate_config(write_config(tmp_path, LASSO)) == []

    def test_collects_every_problem(self, tmp_path):
        path = write_config(tmp_path, """
            [problem]
            kind = lasso
            m = -3

            [solver:bad]
            method = admm

            [solver:alm]
            mu = -1
            mu0 = 1.0

            [extra]
            key = 1
        """)
        problems = validate_config(path)
        assert len(problems) >= 5
        joined = "\n".join(problems)
        assert "[problem] m" in joined
        assert "[solver:bad] method" in joined
        assert "[solver:alm] mu:" in joined
        assert "missing eta, mu_bar" in joined
        assert "[extra]: unknown section" in joined

    def test_missing_file(self, tmp_path):
        assert validate_config(tmp_path / "absent.ini") == [f"{tmp_path / 'absent.ini'}: file not found"]

    def test_pair_form_only_for_matrix_problems(self, tmp_path):
        path = write_config(tmp_path, """
            [problem]
            kind = rpca
            m = 10
            n = 10
            rank = 1

            [solver:fista]
        """)
        assert any("[solver:fista] method" in p for p in validate_config(path))

    def test_load_raises_with_all_problems(self, tmp_path):
        path = write_config(tmp_path, "[problem]\nkind = sudoku\n")
        with pytest.raises(ConfigError) as info:
            load_experiment(path)
        locations = [loc for loc, _ in info.value.problems]
        assert "[problem] kind" in locations and "[solver:*]" in locations

    def test_output_dir_override(self, tmp_path, monkeypatch):
        path = write_config(tmp_path, LASSO)
        monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path / "from_env"))
        assert load_experiment(path).output_dir == tmp_path / "from_env"
        assert load_experiment(path, out_dir=str(tmp_path / "flag")).output_dir == tmp_path / "flag"
        monkeypatch.delenv(OUT_DIR_ENV)
        assert load_experiment(path).output_dir == Path("out") / "experiment"

    def test_shipped_configs_are_valid(self):
        paths = sorted(CONFIG_DIR.glob("*.ini"))
        assert paths
        for path in paths:
            assert validate_config(path) == [], path.name


class TestRunExperiment:
    def test_outputs(self, tmp_path):
        config = load_experiment(write_config(tmp_path, LASSO), out_dir=str(tmp_path / "out"))
        assert run_experiment(config) == EXIT_OK

        out = tmp_path / "out"
        summary = read_csv(out / "summary.csv")
        assert [row["solver"] for row in summary] == ["fista", "alm_s"]
        for row in summary:
            assert row["iterations"] == "60"
            trace = read_trace_csv(out / f"trace_{row['solver']}.csv")
            assert len(trace) == 60
            assert row["obj@10"] == trace[9]["obj"]
            assert row["obj@50"] == trace[49]["obj"]
            assert row["final_obj"] == trace[-1]["obj"]

        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["problem"]["kind"] == "lasso"
        assert manifest["solvers"]["alm_s"]["skips"] == int(summary[1]["skips"])

    def test_reruns_are_reproducible(self, tmp_path):
        path = write_config(tmp_path, LASSO)
        for name in ("first", "second"):
            assert run_experiment(load_experiment(path, out_dir=str(tmp_path / name))) == EXIT_OK
        first, second = tmp_path / "first", tmp_path / "second"
        for name in ("summary.csv", "manifest.json"):
            assert (first / name).read_bytes() == (second / name).read_bytes()
        for solver in ("fista", "alm_s"):
            a = read_trace_csv(first / f"trace_{solver}.csv")
            b = read_trace_csv(second / f"trace_{solver}.csv")
            strip = lambda rows: [{k: v for k, v in r.items() if k != "elapsed_ms"} for r in rows]
            assert strip(a) == strip(b)

    def test_divergence_keeps_the_partial_trace(self, tmp_path):
        path = write_config(tmp_path, """
            [problem]
            kind = lasso
            seed = 2

            [solver:ista]
            mu = 100
            max_iter = 500
        """)
        out = tmp_path / "out"
        assert run_experiment(load_experiment(path, out_dir=str(out))) == EXIT_DIVERGED
        trace = read_trace_csv(out / "trace_ista.csv")
        assert 0 < len(trace) < 500
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["solvers"]["ista"]["stop_reason"] == "diverged"

    def test_bound_check(self, tmp_path):
        path = write_config(tmp_path, """
            [problem]
            kind = lasso
            seed = 3

            [solver:ista]
            max_iter = 100

            [report]
            check_bounds = yes
        """)
        out = tmp_path / "out"
        assert run_experiment(load_experiment(path, out_dir=str(out))) == EXIT_OK
        bound = json.loads((out / "manifest.json").read_text())["solvers"]["ista"]["bound"]
        assert bound == {"kind": "ista", "passed": True, "first_violation": None}

    def test_completion_reports_recovery_errors(self, tmp_path):
        path = write_config(tmp_path, """
            [problem]
            kind = completion
            n = 20
            r = 2
            spr = 0.05
            sr = 0.8
            seed = 4

            [solver:alm]
            mu0 = auto
            mu_bar = 1e-6
            eta = 0.6667
            max_iter = 80
            infeas_tol = 1e-5

            [solver:falm]
            mu0 = auto
            mu_bar = 1e-6
            eta = 0.6667
            max_iter = 80
            infeas_tol = 1e-5
        """)
        out = tmp_path / "out"
        assert run_experiment(load_experiment(path, out_dir=str(out))) == EXIT_OK
        for row in read_csv(out / "summary.csv"):
            assert float(row["rel_x"]) >= 0.0
            assert float(row["rel_y"]) >= 0.0

    def test_solver_failure_is_reported(self, tmp_path, monkeypatch, capsys):
        def broken(obj, config):
            raise NumericFailureError("conjugate gradients did not converge")

        monkeypatch.setitem(runner.SOLVERS, "alm_s", broken)
        out = tmp_path / "out"
        assert run_experiment(load_experiment(write_config(tmp_path, LASSO), out_dir=str(out))) == EXIT_SOLVER_FAILED
        assert "✗ alm_s: failed (NumericFailureError: conjugate gradients did not converge)" in capsys.readouterr().out

        assert read_trace_csv(out / "trace_alm_s.csv") == []
        summary = {row["solver"]: row for row in read_csv(out / "summary.csv")}
        assert summary["alm_s"]["stop_reason"] == "failed"
        assert summary["alm_s"]["final_obj"] == ""
        assert summary["fista"]["iterations"] == "60"
        solvers = json.loads((out / "manifest.json").read_text())["solvers"]
        assert solvers["alm_s"]["failure"].startswith("NumericFailureError")
        assert solvers["fista"]["failure"] is None

    def test_parallel_workers_match_serial(self, tmp_path):
        serial = write_config(tmp_path, LASSO, "serial.ini")
        parallel = write_config(tmp_path, LASSO.replace("checkpoints = 10, 50", "checkpoints = 10, 50\nworkers = 2"), "parallel.ini")
        run_experiment(load_experiment(serial, out_dir=str(tmp_path / "s")))
        run_experiment(load_experiment(parallel, out_dir=str(tmp_path / "p")))
        assert (tmp_path / "s" / "summary.csv").read_bytes() == (tmp_path / "p" / "summary.csv").read_bytes()


class TestCli:
    def test_validate(self, tmp_path, capsys):
        good = write_config(tmp_path, LASSO, "good.ini")
        bad = write_config(tmp_path, "[problem]\nkind = lasso\n", "bad.ini")
        assert cli.main(["validate", str(good)]) == EXIT_OK
        assert "✓" in capsys.readouterr().out
        assert cli.main(["validate", str(bad)]) == EXIT_CONFIG_ERROR
        assert "[solver:*]" in capsys.readouterr().out

    def test_run(self, tmp_path, capsys):
        path = write_config(tmp_path, LASSO)
        assert cli.main(["run", str(path), "--out-dir", str(tmp_path / "cli")]) == EXIT_OK
        assert (tmp_path / "cli" / "summary.csv").exists()
        assert "Output saved to" in capsys.readouterr().out

    def test_run_invalid_config(self, tmp_path, capsys):
        path = write_config(tmp_path, "[problem]\nkind = lasso\nrho = 0\n[solver:ista]\n")
        assert cli.main(["run", str(path)]) == EXIT_CONFIG_ERROR
        assert "[problem] rho" in capsys.readouterr().out

    def test_gen_instance_completion(self, tmp_path):
        path = write_config(tmp_path, """
            [problem]
            kind = completion
            n = 12
            r = 2
            spr = 0.05
            sr = 0.75
            seed = 3
        """)
        out = tmp_path / "instance"
        assert cli.main(["gen-instance", str(path), str(out)]) == EXIT_OK

        expected = generate_completion(CompletionSpec(n=12, r=2, spr=0.05, sr=0.75, rng_seed=3))
        np.testing.assert_array_equal(read_matrix(out / "M.txt"), expected.instance.M)
        np.testing.assert_array_equal(read_matrix(out / "A.txt"), expected.A)
        assert read_mask(out / "mask.txt") == expected.instance.mask

        reloaded = load_experiment(out / "spec.ini", require_solvers=False)
        assert reloaded.problem.kind == "completion"
        for key, value in {"n": 12, "r": 2, "spr": 0.05, "sr": 0.75, "seed": 3}.items():
            assert reloaded.problem.params[key] == value

    def test_gen_instance_lasso_round_trip(self, tmp_path):
        path = write_config(tmp_path, "[problem]\nkind = lasso\nm = 5\nn = 8\nseed = 7\n")
        out = tmp_path / "instance"
        assert cli.main(["gen-instance", str(path), str(out)]) == EXIT_OK
        from_files = write_config(out, "[problem]\nkind = lasso\na = A.txt\nb = b.txt\n[solver:fista]\nmax_iter = 5\n", "files.ini")
        generated = write_config(tmp_path, "[problem]\nkind = lasso\nm = 5\nn = 8\nseed = 7\n[solver:fista]\nmax_iter = 5\n", "generated.ini")
        run_experiment(load_experiment(from_files, out_dir=str(tmp_path / "a")))
        run_experiment(load_experiment(generated, out_dir=str(tmp_path / "b")))
        assert (tmp_path / "a" / "summary.csv").read_bytes() == (tmp_path / "b" / "summary.csv").read_bytes()

    def test_step_summary(self, tmp_path, monkeypatch):
        summary_file = tmp_path / "step_summary.md"
        monkeypatch.setenv("GITHUB_STEP_SUMMARY", str(summary_file))
        path = write_config(tmp_path, LASSO)
        assert run_experiment(load_experiment(path, out_dir=str(tmp_path / "out"))) == EXIT_OK
        text = summary_file.read_text()
        assert text.startswith("## 📉 Experiment experiment\n\n`lasso` instance, completed\n")
        assert "| solver | method | iterations |" in text
        assert "| solver | stop reason | wall ms |" in text
        assert "| ✓ fista | max_iter |" in text
        assert "Finished " in text

    def test_step_summary_marks_failed_solvers(self, tmp_path, monkeypatch):
        def broken(obj, config):
            raise NumericFailureError("svd did not converge")

        summary_file = tmp_path / "step_summary.md"
        monkeypatch.setenv("GITHUB_STEP_SUMMARY", str(summary_file))
        monkeypatch.setitem(runner.SOLVERS, "fista", broken)
        path = write_config(tmp_path, LASSO)
        assert run_experiment(load_experiment(path, out_dir=str(tmp_path / "out"))) == EXIT_SOLVER_FAILED
        text = summary_file.read_text()
        assert f"`lasso` instance, exit code {EXIT_SOLVER_FAILED}" in text
        assert "| ✗ fista | failed |" in text
        assert "| ✓ alm_s | max_iter |" in text
