"""Tests for the bilinorm command-line interface."""

import json

import pytest

from bilinorm.cli import cli


def _lines(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.strip()]


# ---------------------------------------------------------------------------
# Single computations
# ---------------------------------------------------------------------------


class TestNormCommand:
    def test_norm(self, cli_runner):
        result = cli_runner.invoke(cli, ["norm", "--space", "lp:inf:2", "--x", "3,-4"])
        assert result.exit_code == 0
        assert result.stdout.strip() == "4"

    def test_dual_norm(self, cli_runner):
        result = cli_runner.invoke(
            cli, ["norm", "--space", "lp:inf:2", "--x", "3,-4", "--dual"]
        )
        assert result.exit_code == 0
        assert result.stdout.strip() == "7"

    def test_bad_space(self, cli_runner):
        result = cli_runner.invoke(cli, ["norm", "--space", "sphere:2", "--x", "1,0"])
        assert result.exit_code == 2

    def test_dimension_mismatch_is_usage_error(self, cli_runner):
        result = cli_runner.invoke(cli, ["norm", "--space", "lp:2:2", "--x", "1,2,3"])
        assert result.exit_code == 2


class TestOrthCommand:
    """Birkhoff-James orthogonality with optional oracle cross-check."""

    def test_corner_of_square(self, cli_runner):
        result = cli_runner.invoke(
            cli,
            ["orth", "--space", "lp:inf:2", "--x", "1,1", "--y", "1,-1", "--oracle"],
        )
        assert result.exit_code == 0
        report = json.loads(result.stdout)
        assert report["verdict"] == "holds"
        assert report["d_plus"] == 1.0
        assert report["d_minus"] == -1.0
        assert report["positive_part"] == "holds"
        assert report["negative_part"] == "holds"
        assert report["oracle"]["verdict"] == "holds"
        assert report["agree"] is True

    def test_not_orthogonal(self, cli_runner):
        result = cli_runner.invoke(
            cli, ["orth", "--space", "lp:2:2", "--x", "1,0", "--y", "1,1"]
        )
        assert result.exit_code == 0
        report = json.loads(result.stdout)
        assert report["verdict"] == "fails"
        assert report["positive_part"] == "holds"
        assert report["negative_part"] == "fails"
        assert "oracle" not in report

    def test_zero_anchor_reported_as_json(self, cli_runner):
        result = cli_runner.invoke(
            cli, ["orth", "--space", "lp:2:2", "--x", "0,0", "--y", "1,0"]
        )
        assert result.exit_code == 1
        assert json.loads(result.stdout)["error"] == "ZeroAnchor"


class TestOperatorCommands:
    def test_opnorm_smooth_example(self, cli_runner):
        result = cli_runner.invoke(cli, ["opnorm", "--operator", "smooth-example"])
        assert result.exit_code == 0
        report = json.loads(result.stdout)
        assert report["value"] == 1.0
        assert report["exact"] is True
        assert len(report["certificate"]) == 4

    def test_opnorm_ascent_flags(self, cli_runner):
        result = cli_runner.invoke(
            cli,
            ["opnorm", "--operator", "first-coordinates", "--starts", "4", "--seed", "1"],
        )
        assert result.exit_code == 0
        report = json.loads(result.stdout)
        assert report["value"] == pytest.approx(1.0, abs=1e-9)
        assert report["exact"] is False

    def test_attain_coordinate_product(self, cli_runner):
        result = cli_runner.invoke(cli, ["attain", "--operator", "coordinate-product"])
        assert result.exit_code == 0
        report = json.loads(result.stdout)
        assert report["value"] == 1.0
        assert len(report["orbits"]) == 4

    def test_operator_from_file(self, cli_runner, tmp_path, smooth_example):
        path = tmp_path / "operator.json"
        path.write_text(json.dumps(smooth_example.to_dict()))
        result = cli_runner.invoke(cli, ["attain", "--operator", str(path)])
        assert result.exit_code == 0
        assert len(json.loads(result.stdout)["orbits"]) == 1

    def test_unknown_operator(self, cli_runner):
        result = cli_runner.invoke(cli, ["opnorm", "--operator", "no-such-operator"])
        assert result.exit_code == 2

    def test_invalid_tolerances(self, cli_runner):
        result = cli_runner.invoke(
            cli, ["opnorm", "--operator", "smooth-example", "--eps-eq", "1e-3"]
        )
        assert result.exit_code == 2
        assert "Invalid configuration" in result.output


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


class TestExampleCommand:
    def test_five_checks_hold(self, cli_runner):
        result = cli_runner.invoke(cli, ["example", "--no-timestamp"])
        assert result.exit_code == 0
        records = _lines(result.stdout)
        assert len(records) == 5
        assert {r["verdict"] for r in records} == {"holds"}
        assert all("timestamp" not in r for r in records)

    def test_reproducible(self, cli_runner):
        first = cli_runner.invoke(cli, ["example", "--no-timestamp"]).stdout
        second = cli_runner.invoke(cli, ["example", "--no-timestamp"]).stdout
        assert first == second


class TestVerifyCommand:
    """verify SUITE prints one line per check, then a summary."""

    def test_smooth_example_suite(self, cli_runner):
        result = cli_runner.invoke(cli, ["verify", "smooth-example", "--no-timestamp"])
        assert result.exit_code == 0
        lines = _lines(result.stdout)
        summary = lines[-1]
        assert summary["passed"] is True
        assert summary["summary"] == [
            {"suite": "smooth-example", "checks": 5, "holds": 5, "fails": 0,
             "inconclusive": 0}
        ]
        assert all(line["suite"] == "smooth-example" for line in lines[:-1])

    def test_paper_example_name(self, cli_runner):
        result = cli_runner.invoke(cli, ["verify", "paper-example", "--no-timestamp"])
        assert result.exit_code == 0
        lines = _lines(result.stdout)
        assert lines[-1]["passed"] is True
        assert lines[-1]["summary"] == [
            {"suite": "paper-example", "checks": 5, "holds": 5, "fails": 0,
             "inconclusive": 0}
        ]
        assert all(line["verdict"] == "holds" for line in lines[:-1])

    def test_paper_example_operator(self, cli_runner):
        result = cli_runner.invoke(cli, ["opnorm", "--operator", "paper-example"])
        assert result.exit_code == 0
        assert json.loads(result.stdout)["value"] == 1.0

    def test_output_file(self, cli_runner, tmp_path):
        report = tmp_path / "report.jsonl"
        result = cli_runner.invoke(
            cli, ["verify", "smooth-example", "--no-timestamp", "--output", str(report)]
        )
        assert result.exit_code == 0
        assert result.stdout == ""
        lines = _lines(report.read_text())
        assert len(lines) == 6
        assert lines[-1]["passed"] is True

    def test_metrics_file(self, cli_runner, tmp_path):
        metrics = tmp_path / "metrics.prom"
        result = cli_runner.invoke(
            cli, ["verify", "smooth-example", "--metrics-file", str(metrics)]
        )
        assert result.exit_code == 0
        assert "bilinorm_checks_total" in metrics.read_text()

    def test_timestamps_by_default(self, cli_runner):
        result = cli_runner.invoke(cli, ["verify", "smooth-example"])
        lines = _lines(result.stdout)
        assert all("timestamp" in line for line in lines[:-1])
        assert "duration_s" in lines[-1]["summary"][0]

    def test_unknown_suite(self, cli_runner):
        result = cli_runner.invoke(cli, ["verify", "nonsense"])
        assert result.exit_code == 2

