"""Tests for the eos-lab command line."""
import json

import pandas as pd
import pytest
from click.testing import CliRunner

from app import __version__
from app.cli.main import cli


@pytest.fixture
def runner():
    return CliRunner()


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_s_curves_writes_table_and_manifest(runner, config_file, tmp_path):
    path = config_file("zetas: {values: [0.5, 1.0]}\norderings: [0.0, -1.0]\n")
    out = tmp_path / "s_curves"
    result = runner.invoke(cli, ["s-curves", "--config", str(path), "--out", str(out)])
    assert result.exit_code == 0, result.output

    frame = pd.read_csv(out / "s_curves.csv")
    assert list(frame["zeta"]) == [0.5, 1.0]
    assert "s_prime(-1)" in frame.columns
    assert (frame["s_tilde_x"] < -1).all()

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "s-curves"
    assert set(manifest["files"]) >= {"s_curves.csv", "s_tilde.svg", "s_prime.svg"}


def test_count_dist_writes_one_table_per_zeta(runner, config_file, tmp_path):
    path = config_file("state: {kind: vacuum}\nsetup: {preset: symmetric_xy, zeta: 1, beta: 10}\n")
    out = tmp_path / "count"
    result = runner.invoke(cli, ["count-dist", "--config", str(path), "--out", str(out), "--seed", "3"])
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(out / "count_dist_zeta1.csv")
    assert frame["p"].sum() == pytest.approx(1.0, abs=1e-3)
    assert json.loads((out / "manifest.json").read_text())["seed"] == 3


def test_malformed_config_exits_with_config_code(runner, config_file, tmp_path):
    path = config_file("state: [vacuum\n")
    out = tmp_path / "bad"
    result = runner.invoke(cli, ["s-curves", "--config", str(path), "--out", str(out)])
    assert result.exit_code == 1
    assert not out.exists()


def test_oracle_outside_envelope_is_refused(runner, config_file, tmp_path):
    path = config_file("oracle: {beta: 3}\n")
    out = tmp_path / "oracle"
    result = runner.invoke(cli, ["oracle-check", "--config", str(path), "--out", str(out)])
    assert result.exit_code == 3
    assert not out.exists()
    assert not list(tmp_path.glob(".oracle.*"))
