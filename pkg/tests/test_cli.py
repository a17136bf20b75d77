import json

import pytest

from psclab.harness.cli import main
from psclab.scenario import icy_scenario


@pytest.fixture(scope="module")
def scenario_file(tmp_path_factory):
    p = tmp_path_factory.mktemp("sc") / "short.yaml"
    icy_scenario(duration_s=4.0).to_yaml(p)
    return str(p)


def test_run_with_check_passes(scenario_file, tmp_path, capsys):
    rc = main(["run", "--scenario", scenario_file, "--controller", "nominal",
               "--seed", "2", "--out", str(tmp_path / "r"), "--mc-samples", "16",
               "--check"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "replay check: ok" in out
    metrics = json.loads(out[:out.rindex("}") + 1])
    assert metrics["steps"] > 0


def test_replay_detects_tampering(scenario_file, tmp_path, capsys):
    rc = main(["run", "--scenario", scenario_file, "--controller", "nominal",
               "--seed", "2", "--out", str(tmp_path / "r"), "--mc-samples", "16"])
    assert rc == 0
    assert main(["replay", "--run", str(tmp_path / "r")]) == 0
    steps = tmp_path / "r" / "steps.csv"
    text = steps.read_text()
    steps.write_text(text.replace(text.split("\n")[1], text.split("\n")[1] + "1", 1))
    assert main(["replay", "--run", str(tmp_path / "r")]) == 1


def test_grid_check_and_plot(scenario_file, tmp_path, capsys):
    out = tmp_path / "g"
    rc = main(["grid", "--scenario", scenario_file, "--classes", "icy",
               "--controllers", "nominal", "--runs", "2", "--seed", "1",
               "--out", str(out), "--mc-samples", "16", "--workers", "1",
               "--check"])
    assert rc == 0
    assert "grid check: ok" in capsys.readouterr().out
    run_dir = sorted(out.glob("runs/*/nominal/seed000"))[0]
    rc = main(["plot", "--runs", str(run_dir),
               "--summary", str(out / "summary.json"), "--out", str(tmp_path / "p")])
    assert rc == 0
    assert (tmp_path / "p" / "trajectories.png").exists()
    assert (tmp_path / "p" / "tradeoff.png").exists()


def test_horizon_sweep_empty_and_check(scenario_file, tmp_path):
    rc = main(["horizon-sweep", "--scenario", scenario_file, "--horizons", "",
               "--seeds", "1", "--out", str(tmp_path / "h"), "--check"])
    assert rc == 0
