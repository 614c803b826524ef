"""Tests for the ris-anm-sim command line."""

import pytest

from hybridris import cli
from hybridris.harness import RunSummary


def test_missing_config(tmp_path):
    assert cli.main(["run", "--config", str(tmp_path / "absent.toml")]) == cli.EXIT_CONFIG


def test_invalid_config(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text('[setup]\nname = "setup9"\n')
    assert cli.main(["run", "-c", str(path)]) == cli.EXIT_CONFIG


def test_config_required():
    with pytest.raises(SystemExit):
        cli.main(["run"])


def test_crlb_only_run(small_setup, tmp_path):
    out = tmp_path / "results"
    code = cli.main(["run", "-c", str(small_setup), "-n", "1", "-o", str(out), "--crlb-only", "--emit-plots"])
    assert code == cli.EXIT_OK
    assert (out / "custom.csv").exists()
    assert (out / "custom.gp").exists()


def test_overrides_reach_the_driver(small_setup, tmp_path, monkeypatch):
    seen = {}

    def fake_run(config, out_dir, **kwargs):
        seen.update(trials=config.trials, seed=config.seed, workers=config.workers, out=out_dir, **kwargs)
        return RunSummary()

    monkeypatch.setattr(cli, "run", fake_run)
    code = cli.main(["run", "-c", str(small_setup), "-n", "9", "-s", "5", "-w", "3", "-o", str(tmp_path), "--trace-solver"])
    assert code == cli.EXIT_OK
    assert seen["trials"] == 9
    assert seen["seed"] == 5
    assert seen["workers"] == 3
    assert seen["trace_solver"] is True
    assert seen["crlb_only"] is False


def test_config_output_is_default(small_setup, tmp_path, monkeypatch):
    seen = {}

    def fake_run(config, out_dir, **kwargs):
        seen["out"] = out_dir
        return RunSummary()

    monkeypatch.setattr(cli, "run", fake_run)
    cli.main(["run", "-c", str(small_setup)])
    assert seen["out"] == (tmp_path / "out").as_posix()


def test_failures_exit_code(small_setup, monkeypatch):
    monkeypatch.setattr(cli, "run", lambda config, out_dir, **kwargs: RunSummary(rows=3, failures=1))
    assert cli.main(["run", "-c", str(small_setup)]) == cli.EXIT_FAILURES


def test_sweep_distance(small_setup, tmp_path):
    code = cli.main(["sweep-distance", "-c", str(small_setup), "-n", "1", "-o", str(tmp_path), "--crlb-only"])
    assert code == cli.EXIT_OK
    assert (tmp_path / "custom_summary.csv").exists()


def test_plot_bad_csv(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("not,a,results,file\n")
    assert cli.main(["plot", str(path)]) == cli.EXIT_CONFIG


def test_plot(small_setup, tmp_path):
    cli.main(["run", "-c", str(small_setup), "-n", "1", "-o", str(tmp_path), "--crlb-only"])
    target = tmp_path / "custom_plot.gp"
    assert cli.main(["plot", str(tmp_path / "custom.csv"), "--output", str(target)]) == cli.EXIT_OK
    assert target.exists()
