"""Tests for the graftlab command line

Covers:
- Help text documents the CSV columns of every subcommand
- Subcommands write their tables; flags override config files
- Exit codes of cli(): bad config 2, missing input 3, failed experiment 4
- Tracebacks follow the log_level of the settings file
"""

import json
import sys

import pytest
from typer.testing import CliRunner

from graftlab.__main__ import GraftlabCli, cli
from graftlab.models import CSV_COLUMNS
from graftlab.runner import MANIFEST_NAME, read_table

runner = CliRunner()

HELP_COLUMNS = {
    "devmap": ("devmap", "devmap-path"),
    "graft": ("graft",),
    "qc": ("qc",),
    "raycompare": ("raycompare",),
    "tt-approx": ("tt-approx",),
    "pipeline": ("pipeline-weights", "pipeline-graft"),
}


def _exit_code(monkeypatch, *args: str) -> int:
    monkeypatch.setattr(sys, "argv", ["graftlab", *args])
    with pytest.raises(SystemExit) as exc:
        cli()
    return exc.value.code


class TestHelp:
    def test_lists_subcommands(self):
        result = runner.invoke(GraftlabCli, ["--help"])
        assert result.exit_code == 0
        for name in ("version", *HELP_COLUMNS):
            assert name in result.output

    @pytest.mark.parametrize("command", list(HELP_COLUMNS))
    def test_documents_columns(self, command):
        result = runner.invoke(GraftlabCli, [command, "--help"], env={"COLUMNS": "200", "TERMINAL_WIDTH": "200"})
        assert result.exit_code == 0
        for table in HELP_COLUMNS[command]:
            for column in CSV_COLUMNS[table]:
                assert column in result.output

    def test_version(self):
        result = runner.invoke(GraftlabCli, ["version"])
        assert result.exit_code == 0
        assert "Installed version" in result.output


class TestCommands:
    def test_raycompare(self, settings, tmp_path):
        result = runner.invoke(GraftlabCli, ["-o", str(tmp_path / "out"), "raycompare", "--s", "0", "--s", "1"])
        assert result.exit_code == 0, result.output
        rows = read_table(tmp_path / "out" / "raycompare.csv")
        assert [r["s"] for r in rows] == ["0.0", "1.0"]

    def test_flags_override_config(self, settings, tmp_path):
        config = tmp_path / "ray.json"
        config.write_text(json.dumps({"kind": "raycompare", "s_range": [0, 1, 2], "tau": "0.1+2j"}))
        result = runner.invoke(
            GraftlabCli, ["-o", str(tmp_path / "out"), "--seed", "5", "raycompare", "-c", str(config), "--s", "3"]
        )
        assert result.exit_code == 0, result.output
        assert [r["s"] for r in read_table(tmp_path / "out" / "raycompare.csv")] == ["3.0"]
        manifest = json.loads((tmp_path / "out" / MANIFEST_NAME).read_text())
        assert manifest["seed"] == 5
        assert complex(manifest["parameters"]["tau"]) == 0.1 + 2j

    def test_slope_and_tau(self, settings, tmp_path):
        args = ["-o", str(tmp_path / "out"), "raycompare", "--tau", "0.5+0.8j", "--slope", "2/1", "--s", "1"]
        assert runner.invoke(GraftlabCli, args).exit_code == 0
        manifest = json.loads((tmp_path / "out" / MANIFEST_NAME).read_text())
        assert manifest["parameters"]["slope"] == [2, 1]

    def test_tt_approx_weights(self, settings, tmp_path):
        args = ["-o", str(tmp_path / "out"), "tt-approx", "--track", "annulus", "--weight", "5/2"]
        assert runner.invoke(GraftlabCli, args).exit_code == 0
        (row,) = read_table(tmp_path / "out" / "tt-approx.csv")
        assert row["integral"] == "2"

    def test_qc(self, settings, tmp_path):
        args = ["-o", str(tmp_path / "out"), "qc", "--width", "0.2", "--mesh-size", "8"]
        assert runner.invoke(GraftlabCli, args).exit_code == 0
        (row,) = read_table(tmp_path / "out" / "qc.csv")
        assert float(row["supK"]) > 1

    def test_default_output_dir(self, settings, tmp_path):
        assert runner.invoke(GraftlabCli, ["graft", "--t", "1"]).exit_code == 0
        assert (tmp_path / "graftlab-out" / "graft.csv").is_file()

    def test_settings_file(self, settings, tmp_path):
        lab = tmp_path / "lab.yaml"
        lab.write_text(f"output_dir: {tmp_path / 'from-settings'}\n")
        assert runner.invoke(GraftlabCli, ["-s", str(lab), "raycompare", "--s", "1"]).exit_code == 0
        assert (tmp_path / "from-settings" / "raycompare.csv").is_file()


class TestExitCodes:
    def test_success(self, settings, monkeypatch, tmp_path):
        assert _exit_code(monkeypatch, "-o", str(tmp_path / "out"), "raycompare", "--s", "1") == 0

    def test_malformed_json_writes_nothing(self, settings, monkeypatch, tmp_path):
        config = tmp_path / "bad.json"
        config.write_text('{"kind": "qc", "widths": [0.2')
        assert _exit_code(monkeypatch, "-o", str(tmp_path / "out"), "qc", "-c", str(config)) == 2
        assert not (tmp_path / "out").exists()

    def test_schema_violation(self, settings, monkeypatch, tmp_path):
        config = tmp_path / "bad.json"
        config.write_text(json.dumps({"kind": "qc", "widths": [-1]}))
        assert _exit_code(monkeypatch, "qc", "-c", str(config)) == 2

    def test_kind_mismatch(self, settings, monkeypatch, tmp_path):
        config = tmp_path / "graft.json"
        config.write_text(json.dumps({"kind": "graft"}))
        assert _exit_code(monkeypatch, "qc", "-c", str(config)) == 2

    def test_missing_input(self, settings, monkeypatch):
        assert _exit_code(monkeypatch, "tt-approx", "--track", "absent.json") == 3

    def test_every_point_failed(self, settings, monkeypatch, tmp_path):
        args = ("-o", str(tmp_path / "out"), "pipeline", "--surface", "square-torus", "--s", "2")
        assert _exit_code(monkeypatch, *args) == 4
        manifest = json.loads((tmp_path / "out" / MANIFEST_NAME).read_text())
        assert manifest["errors"][0]["exit_code"] == 4

    def test_debug_level_prints_traceback(self, settings, monkeypatch, tmp_path, capsys):
        lab = tmp_path / "lab.yaml"
        lab.write_text("log_level: DEBUG\n")
        assert _exit_code(monkeypatch, "-s", str(lab), "tt-approx", "--track", "absent.json") == 3
        assert "Traceback" in capsys.readouterr().err

    def test_info_level_hides_traceback(self, settings, monkeypatch, capsys):
        assert _exit_code(monkeypatch, "tt-approx", "--track", "absent.json") == 3
        assert "Traceback" not in capsys.readouterr().err
