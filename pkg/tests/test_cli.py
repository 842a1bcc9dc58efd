from __future__ import annotations

import json
import subprocess
import sys

import pytest

from admissibility import cli
from admissibility.matrix import Disagreement


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestRiskset:
    def test_default_output(self, capsys):
        code, out, _ = run(capsys, "riskset")
        lines = out.splitlines()
        assert code == 0
        # 5 metadata lines, header, 1001 boundary rows, 3 named rules
        assert len(lines) == 1010
        assert lines[-1].startswith("rule,plug-in,") and lines[-1].endswith("inf,inf")

    def test_json(self, capsys):
        code, out, _ = run(capsys, "riskset", "--grid", "3", "--format", "json")
        payload = json.loads(out)
        assert code == 0 and len(payload["rows"]) == 6
        assert payload["rows"][-1]["risk_theta1"] == "inf"

    def test_check_gate(self, capsys):
        code, out, _ = run(capsys, "riskset", "--grid", "11", "--check")
        assert code == 0 and "PASS [ 9]" in out


class TestUsageErrors:
    @pytest.mark.parametrize(
        "argv",
        [
            ["nonsense"],
            ["eprocess", "--alpha", "1.5"],
            ["eprocess", "--looks", "20,10"],
            ["eprocess", "--looks", "ten"],
            ["bernoulli", "--theta", "0"],
            ["bernoulli", "--n-list", "0,5"],
            ["riskset", "--grid", "2"],
            ["riskset", "--theta1", "0.8", "--theta2", "0.2"],
            ["gaussian", "--sigma", "-1"],
            ["defensive", "--horizon", "0"],
            ["tables"],
            ["acceptance", "--only", "99"],
            ["bernoulli", "--reps", "0"],
            ["bernoulli", "--config", "/nonexistent/file.cfg"],
        ],
    )
    def test_exit_2_and_no_output(self, capsys, tmp_path, argv):
        out_path = tmp_path / "out.csv"
        code, out, err = run(capsys, *argv, "--out", str(out_path))
        assert code == 2
        assert out == "" and err
        assert not out_path.exists()
        assert list(tmp_path.iterdir()) == []


class TestConfigPrecedence:
    def test_flag_beats_file_beats_default(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("reps = 7\ntheta = 0.4\n")
        _, out, _ = run(capsys, "bernoulli", "--config", str(cfg), "--reps", "9", "--n-list", "5")
        meta = dict(line[2:].split("=", 1) for line in out.splitlines() if line.startswith("# "))
        assert meta["reps"] == "9" and meta["theta"] == "0.4" and meta["seed"] == "20240601"

    def test_subcommand_default_yields_to_file(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("alpha = 0.2\n")
        _, out, _ = run(capsys, "conformal", "--config", str(cfg), "--reps", "2", "--scenario", "A")
        assert "# alpha=0.2" in out


class TestOutputs:
    def test_out_file_matches_stdout(self, capsys, tmp_path):
        path = tmp_path / "t3.csv"
        _, stdout_text, _ = run(capsys, "eprocess", "--reps", "50")
        code, out, _ = run(capsys, "eprocess", "--reps", "50", "--out", str(path))
        assert code == 0 and out == ""
        assert path.read_text() == stdout_text

    @pytest.mark.parametrize(
        "argv",
        [
            ["defensive", "--horizon", "200", "--every", "50"],
            ["gaussian", "--reps", "200"],
            ["tables", "--which", "2", "--reps", "100"],
            ["tables", "--which", "4", "--reps", "3", "--scenario", "B"],
        ],
    )
    def test_deterministic(self, capsys, argv):
        first = run(capsys, *argv)
        second = run(capsys, *argv)
        assert first[0] == 0 and first[:2] == second[:2]

    def test_seed_changes_output(self, capsys):
        a = run(capsys, "eprocess", "--reps", "300", "--seed", "1")[1]
        b = run(capsys, "eprocess", "--reps", "300", "--seed", "2")[1]
        assert a != b


class TestGates:
    def test_matrix_check_passes(self, capsys):
        code, out, err = run(capsys, "matrix", "--check", "--reps", "2000")
        assert code == 0 and err == ""
        assert out.startswith("procedure")

    def test_matrix_check_fails_on_disagreement(self, capsys, monkeypatch):
        monkeypatch.setattr(cli, "compare_with_reference",
                            lambda cells: [Disagreement("P1", "blackwell", "cross", "check")])
        code, _, err = run(capsys, "matrix", "--check", "--reps", "2000")
        assert code == 1 and "P1/blackwell" in err

    def test_failed_gate_exits_1(self, capsys, monkeypatch):
        monkeypatch.setattr(cli, "_run_checks", lambda numbers, cfg: False)
        code, out, _ = run(capsys, "eprocess", "--reps", "20", "--check")
        assert code == 1 and out

    def test_acceptance_subset(self, capsys):
        code, out, _ = run(capsys, "acceptance", "--only", "3,4")
        assert code == 0
        assert [line[:8] for line in out.splitlines()[:2]] == ["PASS [ 3", "PASS [ 4"]


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "admissibility.cli", "riskset", "--grid", "3", "--format", "text"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert "plug-in" in proc.stdout
