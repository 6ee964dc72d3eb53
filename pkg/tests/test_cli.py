import csv
import io
import json
import subprocess
import sys

import pytest

from saddlescape import __version__
from saddlescape.cli import EXIT_ASSERT, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main

CONFIG = """
[problem]
kind = eigen
lambda1 = 10
eigengap = 5
orientation_seed = 7

[optimizer]
algorithm = pgd

[sweep]
dims = 8
epsilons = 0.2, 0.1, 0.05
seeds = 2
"""


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "exp.ini"
    p.write_text(CONFIG)
    return p


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestExitCodes:
    def test_usage_error(self, capsys):
        assert main(["certify", "--frobnicate"]) == EXIT_CONFIG
        assert "error" in capsys.readouterr().err

    def test_missing_command(self):
        assert main([]) == EXIT_CONFIG

    def test_unknown_config_key(self, tmp_path, capsys):
        p = tmp_path / "bad.ini"
        p.write_text("[optimizer]\nlearning_rate = 0.1\n")
        assert main(["run", "--config", str(p)]) == EXIT_CONFIG
        assert "optimizer.learning_rate" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.ini")]) == EXIT_CONFIG

    def test_bad_jobs(self, cfg_path):
        assert main(["run", "--config", str(cfg_path), "--jobs", "0"]) == EXIT_CONFIG

    def test_problem_required(self):
        assert main(["certify"]) == EXIT_CONFIG

    def test_point_dimension(self, capsys):
        assert main(["certify", "--problem", "eigen:2,1", "--point", "1,2,3"]) == EXIT_CONFIG
        assert "--point" in capsys.readouterr().err

    def test_precondition_is_runtime_failure(self, capsys):
        code = main(["escape-rate", "--problem", "eigen:2,1", "--point", "1.4142135623730951,0",
                     "--epsilon", "0.01", "--trials", "5"])
        assert code == EXIT_RUNTIME
        assert "not a strict saddle" in capsys.readouterr().err

    def test_unwritable_output_is_runtime_failure(self, cfg_path, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        assert main(["run", "--config", str(cfg_path), "--out", str(blocker / "x")]) == EXIT_RUNTIME

    def test_assert_failure(self, capsys):
        code = main(["certify", "--problem", "eigen:2,1", "--point", "0,1", "--epsilon", "0.01", "--assert"])
        assert code == EXIT_ASSERT
        assert _rows(capsys.readouterr().out)[0]["is_sosp"] == "false"

    def test_failed_check_without_assert_is_ok(self):
        assert main(["certify", "--problem", "eigen:2,1", "--point", "0,1", "--epsilon", "0.01"]) == EXIT_OK


class TestCommands:
    def test_certify_minimum(self, capsys):
        code = main(["certify", "--problem", "eigen:2,1", "--point", "1.4142135623730951,0",
                     "--epsilon", "0.01", "--assert"])
        assert code == EXIT_OK
        (row,) = _rows(capsys.readouterr().out)
        assert row["is_fosp"] == "true" and row["is_sosp"] == "true"

    def test_certify_point_file(self, tmp_path, capsys):
        f = tmp_path / "x.txt"
        f.write_text("0.0 1.0\n")
        assert main(["certify", "--problem", "eigen:2,1", "--point-file", str(f), "--epsilon", "0.01"]) == EXIT_OK
        assert _rows(capsys.readouterr().out)[0]["is_sosp"] == "false"

    def test_run_writes_files(self, cfg_path, tmp_path):
        out = tmp_path / "res"
        assert main(["run", "--config", str(cfg_path), "--out", str(out), "--seed", "3"]) == EXIT_OK
        man = json.loads((out / "manifest.json").read_text())
        assert man["commands"]["run"]["config"]["output"]["master_seed"] == 3
        assert (out / "run.csv").exists() and (out / "run_summary.csv").exists()

    def test_run_is_reproducible(self, cfg_path, tmp_path):
        for name in ("a", "b"):
            assert main(["run", "--config", str(cfg_path), "--out", str(tmp_path / name)]) == EXIT_OK
        a = (tmp_path / "a" / "run.csv").read_text().splitlines()
        b = (tmp_path / "b" / "run.csv").read_text().splitlines()
        # wallclock_ms is the last column
        assert [x.rsplit(",", 1)[0] for x in a] == [x.rsplit(",", 1)[0] for x in b]

    def test_sweep_eps_reports_slope(self, cfg_path, tmp_path, capsys):
        code = main(["sweep-eps", "--config", str(cfg_path), "--out", str(tmp_path),
                     "--slope-min", "-10", "--slope-max", "10", "--assert"])
        assert code == EXIT_OK
        assert "log-log slope" in capsys.readouterr().err

    def test_sweep_eps_band_violation(self, cfg_path, tmp_path):
        code = main(["sweep-eps", "--config", str(cfg_path), "--out", str(tmp_path),
                     "--slope-min", "5", "--slope-max", "6", "--assert"])
        assert code == EXIT_ASSERT

    def test_sweep_dim_needs_two_dims(self, cfg_path, tmp_path):
        assert main(["sweep-dim", "--config", str(cfg_path), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_escape_rate(self, tmp_path, capsys):
        code = main(["escape-rate", "--problem", "quadratic:1,-1", "--trials", "50",
                     "--out", str(tmp_path), "--assert"])
        assert code == EXIT_OK
        (row,) = _rows(capsys.readouterr().out)
        assert float(row["rate"]) >= 0.9
        assert (tmp_path / "escape_rate.csv").read_text().startswith("trials,")

    def test_couple(self, capsys):
        code = main(["couple", "--problem", "quadratic:1,-1", "--trials", "20", "--r0-omega", "0,2", "--assert"])
        assert code == EXIT_OK
        rows = _rows(capsys.readouterr().out)
        assert len(rows) == 2
        assert float(rows[1]["rate"]) == 1.0

    def test_conc_check(self, capsys):
        assert main(["conc-check", "--lemma", "squares", "--trials", "1000", "--assert"]) == EXIT_OK
        assert _rows(capsys.readouterr().out)[0]["passed"] == "true"

    def test_conc_check_too_few_trials(self):
        assert main(["conc-check", "--lemma", "hoeffding", "--trials", "10"]) == EXIT_CONFIG


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "saddlescape.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.strip() == __version__
