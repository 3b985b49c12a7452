"""
Tests for the command line.
"""

import json
import math

import numpy as np
import pytest

from fourphoton import report as report_module
from fourphoton.cli import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, main
from fourphoton.constants import THETA_STAR
from fourphoton.fitkit import FringeModelParams, eval_model
from fourphoton.scan import ScanTable
from fourphoton.tableio import read_table, write_table
from fourphoton.types import ScanVariable


def write_config(path, data):
    """Write a JSON run config and return its path."""
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


@pytest.fixture
def fringe_config(tmp_path):
    """Config for a 72-point ideal fringe written next to the config."""
    return write_config(
        tmp_path / "run.json",
        {
            "sweep": {"variable": "phi", "from": "0 deg", "to": "355 deg", "steps": 72},
            "output": {"table": "fringe.csv"},
        },
    )


@pytest.fixture
def uneven_table(tmp_path):
    """Noiseless fringe with V4 = 0.62 and V2 = 0.39."""
    phi = 2 * math.pi * np.arange(36) / 36
    y = eval_model("fringe", FringeModelParams(100.0, 0.62, 0.39), phi)
    table = ScanTable(ScanVariable.PHI, tuple(phi), tuple(y / np.max(y)))
    return write_table(table, tmp_path / "uneven.csv")


class TestParser:
    """Test argument handling."""

    def test_version(self, capsys):
        """Test --version."""
        assert main(["--version"]) == EXIT_OK
        assert capsys.readouterr().out.strip()

    def test_missing_command(self):
        """Test that a subcommand is required."""
        assert main([]) == EXIT_INPUT

    @pytest.mark.parametrize("seed", ["-1", "abc", str(2**64)])
    def test_bad_seed(self, uneven_table, seed):
        """Test seed validation on the command line."""
        args = ["sample", str(uneven_table), "--counts", "10", "--seed", seed]
        assert main(args) == EXIT_INPUT

    def test_bad_tolerance_syntax(self):
        """Test that report overrides need NAME=VALUE."""
        assert main(["report", "--tolerance", "fringe_v4"]) == EXIT_INPUT


class TestSimulate:
    """Test the simulate command."""

    def test_writes_configured_table(self, fringe_config, tmp_path):
        """Test that the table lands next to the config."""
        assert main(["simulate", "--config", str(fringe_config)]) == EXIT_OK
        table = read_table(tmp_path / "fringe.csv")
        assert len(table) == 72
        assert table.probability[0] == pytest.approx(0.25, abs=1e-12)

    def test_out_overrides_config(self, fringe_config, tmp_path):
        """Test --out."""
        out = tmp_path / "other.csv"
        args = ["simulate", "--config", str(fringe_config), "--out", str(out)]
        assert main(args) == EXIT_OK
        assert out.read_text(encoding="utf-8").startswith("# fourphoton v1 fringe\n")
        assert not (tmp_path / "fringe.csv").exists()

    def test_stdout_without_output(self, tmp_path, capsys):
        """Test that a config without outputs prints the table."""
        cfg = write_config(
            tmp_path / "run.json",
            {"sweep": {"variable": "delay", "from": -100, "to": 100, "steps": 3}},
        )
        assert main(["simulate", "--config", str(cfg)]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("# fourphoton v1 hom_dip\nx,probability\n")

    def test_sampling_section(self, tmp_path):
        """Test that configured sampling adds counts."""
        cfg = write_config(
            tmp_path / "run.json",
            {
                "sweep": {
                    "variable": "phi",
                    "from": "0 deg",
                    "to": "90 deg",
                    "steps": 5,
                },
                "sampling": {"mean_counts_at_max": 500},
                "seed": 11,
                "output": {"table": "noisy.csv"},
            },
        )
        assert main(["simulate", "--config", str(cfg)]) == EXIT_OK
        assert read_table(tmp_path / "noisy.csv").has_counts

    def test_huge_delay_sweep(self, tmp_path):
        """Test that delays far beyond Lc simulate instead of failing."""
        cfg = write_config(
            tmp_path / "run.json",
            {
                "sweep": {"variable": "delay", "from": -1e200, "to": 1e200, "steps": 3},
                "output": {"table": "far.csv"},
            },
        )
        assert main(["simulate", "--config", str(cfg)]) == EXIT_OK
        table = read_table(tmp_path / "far.csv")
        assert table.probability[0] == pytest.approx(0.5, abs=1e-12)

    def test_unknown_key(self, tmp_path):
        """Test that config errors exit with 1."""
        cfg = write_config(tmp_path / "run.json", {"sweep": {}, "colour": "red"})
        assert main(["simulate", "--config", str(cfg)]) == EXIT_INPUT

    def test_no_sweep(self, tmp_path):
        """Test that simulate needs a sweep."""
        cfg = write_config(tmp_path / "run.json", {})
        assert main(["simulate", "--config", str(cfg)]) == EXIT_INPUT

    def test_missing_config_file(self, tmp_path):
        """Test that unreadable files exit with 1."""
        assert main(["simulate", "--config", str(tmp_path / "nope.json")]) == 1


class TestSample:
    """Test the sample command."""

    def test_same_seed_same_bytes(self, uneven_table, tmp_path):
        """Test byte-identical output for a repeated seed."""
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            args = ["sample", str(uneven_table), "--counts", "1000", "--seed", "7"]
            assert main([*args, "--out", str(path)]) == EXIT_OK
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_zero_counts(self, uneven_table, tmp_path):
        """Test that a zero mean gives zero counts."""
        out = tmp_path / "zero.csv"
        args = ["sample", str(uneven_table), "--counts", "0", "--seed", "1"]
        assert main([*args, "--out", str(out)]) == EXIT_OK
        assert set(read_table(out).counts) == {0}

    def test_negative_counts(self, uneven_table):
        """Test that a negative mean is rejected."""
        args = ["sample", str(uneven_table), "--counts", "-5", "--seed", "1"]
        assert main(args) == EXIT_INPUT


class TestFit:
    """Test the fit command."""

    def test_fringe_recovery(self, uneven_table, tmp_path):
        """Test that the fringe fit reports the true amplitudes."""
        out = tmp_path / "fit.json"
        args = ["fit", str(uneven_table), "--model", "fringe", "--out", str(out)]
        assert main(args) == EXIT_OK
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["model"] == "fringe"
        assert report["converged"] is True
        assert report["params"]["v4"] == pytest.approx(0.62, abs=1e-9)
        assert report["params"]["v2"] == pytest.approx(0.39, abs=1e-9)

    def test_json_to_stdout(self, uneven_table, capsys):
        """Test that the report prints without --out."""
        assert main(["fit", str(uneven_table), "--model", "fringe"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["params"]["scale"] > 0

    def test_options_from_config(self, uneven_table, tmp_path):
        """Test that the fit section supplies the model and output path."""
        cfg = write_config(
            tmp_path / "run.json",
            {"fit": {"model": "fringe"}, "output": {"report": "cfg_fit.json"}},
        )
        assert main(["fit", str(uneven_table), "--config", str(cfg)]) == EXIT_OK
        report = json.loads((tmp_path / "cfg_fit.json").read_text(encoding="utf-8"))
        assert report["model"] == "fringe"
        assert report["params"]["v4"] == pytest.approx(0.62, abs=1e-9)

    def test_model_required(self, uneven_table):
        """Test that a model must come from the flag or the config."""
        assert main(["fit", str(uneven_table)]) == EXIT_INPUT

    def test_too_few_rows(self, tmp_path):
        """Test that a two-row table cannot be fitted."""
        table = ScanTable(ScanVariable.DELAY, (0.0, 1.0), (0.5, 0.25))
        path = write_table(table, tmp_path / "short.csv")
        assert main(["fit", str(path), "--model", "dip"]) == EXIT_INPUT

    def test_unknown_model(self, uneven_table):
        """Test model choices."""
        assert main(["fit", str(uneven_table), "--model", "lorentz"]) == EXIT_INPUT

    def test_malformed_table(self, tmp_path):
        """Test that a bad table exits with 1."""
        path = tmp_path / "bad.csv"
        path.write_text("not a table\n", encoding="utf-8")
        assert main(["fit", str(path), "--model", "fringe"]) == EXIT_INPUT


class TestBalance:
    """Test the balance command."""

    def test_ideal_source(self, tmp_path):
        """Test that ideal pairs balance near the magic angle."""
        cfg = write_config(tmp_path / "run.json", {"output": {"report": "bal.json"}})
        assert main(["balance", "--config", str(cfg)]) == EXIT_OK
        result = json.loads((tmp_path / "bal.json").read_text(encoding="utf-8"))
        assert result["balanced"] is True
        assert result["theta1_rad"] == pytest.approx(THETA_STAR, abs=1e-3)

    def test_fock_source(self, tmp_path):
        """Test that a Fock input cannot be balanced."""
        cfg = write_config(
            tmp_path / "run.json", {"source": {"kind": "fock", "counts": [2, 2]}}
        )
        assert main(["balance", "--config", str(cfg)]) == EXIT_INPUT


class TestReport:
    """Test the report command."""

    def test_unknown_check(self):
        """Test that unknown tolerance overrides exit with 1."""
        assert main(["report", "--tolerance", "bogus=1"]) == EXIT_INPUT

    def test_exit_codes_are_distinct(self):
        """Test the exit code constants."""
        assert len({EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL}) == 3

    @pytest.mark.slow
    def test_repeated_runs_identical(self, tmp_path, monkeypatch, capsys):
        """Test byte-identical summaries and tables across runs."""
        monkeypatch.setattr(report_module, "_SCAN_BUDGET_S", math.inf)
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        tables = []
        for path in paths:
            assert main(["report", "--out", str(path)]) == EXIT_OK
            tables.append(capsys.readouterr().out)
        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert tables[0] == tables[1]
        assert json.loads(paths[0].read_text(encoding="utf-8"))["all_passed"]
