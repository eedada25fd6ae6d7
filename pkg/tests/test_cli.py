import json
import subprocess
import sys

import pytest

from scarce_rl.cli import main


@pytest.fixture
def run_spec(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(
        json.dumps(
            {
                "env": "env_a",
                "agent": "random_search",
                "runs": 3,
                "episodes": 20,
                "seeds": [0, 1, 2],
            }
        )
    )
    return path


def write_spec(tmp_path, name, agent, seeds=(0, 1, 2)):
    path = tmp_path / name
    path.write_text(
        json.dumps(
            {"env": "env_a", "agent": agent, "runs": len(seeds), "seeds": list(seeds)}
        )
    )
    return path


class TestRun:
    def test_writes_csv_rows(self, run_spec, tmp_path, capsys):
        out = tmp_path / "out.csv"
        assert main(["run", str(run_spec), "-o", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 4
        assert "random_search" in lines[1]

    def test_reruns_are_byte_identical(self, run_spec, tmp_path):
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["run", str(run_spec), "-o", str(out_a), "--runs", "1", "--seed", "42"]) == 0
        assert main(["run", str(run_spec), "-o", str(out_b), "--runs", "1", "--seed", "42"]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_missing_spec_exits_2(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "nope.json")]) == 2
        assert "not found" in capsys.readouterr().err

    def test_invalid_spec_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"env": "env_a", "agent": "unknown_agent"}')
        assert main(["run", str(bad)]) == 2

    def test_json_format(self, run_spec, tmp_path):
        out = tmp_path / "out.json"
        assert main(["run", str(run_spec), "-o", str(out), "--format", "json"]) == 0
        payload = json.loads(out.read_text())
        assert payload["schema_version"] == 1
        assert len(payload["runs"]) == 3

    def test_unwritable_output_exits_1(self, run_spec, tmp_path, capsys):
        missing_dir = tmp_path / "no" / "such" / "dir" / "out.csv"
        assert main(["run", str(run_spec), "-o", str(missing_dir)]) == 1
        assert "runtime failure" in capsys.readouterr().err


class TestCompare:
    def test_baseline_only_row(self, run_spec, capsys):
        assert main(["compare", str(run_spec)]) == 0
        out = capsys.readouterr().out
        assert "random_search" in out
        assert "100.0%" in out

    def test_multi_agent_table(self, tmp_path, capsys):
        baseline = write_spec(tmp_path, "baseline.json", "random_search")
        seq = write_spec(tmp_path, "seq.json", "qlearning_seq_break")
        out = tmp_path / "table.csv"
        assert main(["compare", str(baseline), str(seq), "-o", str(out)]) == 0
        text = capsys.readouterr().out
        assert "qlearning_seq_break" in text
        assert len(out.read_text().splitlines()) == 3

    def test_mismatched_seeds_exit_2(self, tmp_path, capsys):
        a = write_spec(tmp_path, "a.json", "random_search", seeds=(0, 1, 2))
        b = write_spec(tmp_path, "b.json", "qlearning", seeds=(5, 6, 7))
        assert main(["compare", str(a), str(b)]) == 2

    def test_json_output(self, tmp_path, run_spec):
        out = tmp_path / "table.json"
        assert main(["compare", str(run_spec), "-o", str(out), "--format", "json"]) == 0
        assert json.loads(out.read_text())["rows"][0]["pct_of_baseline"] == 100.0


class TestLandscape:
    def test_forty_grid_csv(self, tmp_path):
        out = tmp_path / "scan.csv"
        assert main(["landscape", "env_a", "--year", "1", "-n", "40", "-o", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 1 + 1600

    def test_tiny_grid(self, tmp_path):
        out = tmp_path / "scan.csv"
        assert main(["landscape", "env_a", "-n", "2", "-o", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 1 + 4

    def test_scale_display(self, tmp_path):
        raw = tmp_path / "raw.csv"
        scaled = tmp_path / "scaled.csv"
        assert main(["landscape", "env_a", "-n", "5", "-o", str(raw)]) == 0
        assert main(["landscape", "env_a", "-n", "5", "-o", str(scaled), "--scale-display"]) == 0
        raw_vals = [float(line.split(",")[2]) for line in raw.read_text().splitlines()[1:]]
        scaled_vals = [float(line.split(",")[2]) for line in scaled.read_text().splitlines()[1:]]
        assert scaled_vals == [v / 100.0 for v in raw_vals]

    def test_unknown_env_exits_2(self, tmp_path, capsys):
        assert main(["landscape", "env_q"]) == 2


class TestServeConfig:
    def test_missing_config_file_exits_2(self, tmp_path, capsys):
        assert main(["serve", "--config", str(tmp_path / "absent.json")]) == 2
        assert "not found" in capsys.readouterr().err

    def test_invalid_config_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "envs.json"
        bad.write_text('{"env_x": {"years": "nope"}}')
        assert main(["serve", "--config", str(bad)]) == 2


class TestDemo:
    def test_demo_runs(self, capsys):
        assert main(["demo", "--seed", "0"]) == 0
        out = capsys.readouterr().out
        assert "random_search" in out
        assert "landscape" in out


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        result = subprocess.run(
            [sys.executable, "-m", "scarce_rl", "--version"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0
        assert "scarce-rl" in result.stdout

    def test_usage_error_exit_code(self):
        result = subprocess.run(
            [sys.executable, "-m", "scarce_rl", "frobnicate"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 2
