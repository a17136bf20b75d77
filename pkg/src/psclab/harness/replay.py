"""Replay a logged run from its scenario and seed and verify byte identity."""

from __future__ import annotations

from pathlib import Path

from ..control.episode import run_episode
from ..runlog import RunLog
from ..scenario import Scenario


def replay_run(run_dir: str | Path) -> tuple[bool, RunLog]:
    """Re-execute the run recorded in run_dir.

    Returns (identical, fresh_log) where identical means the regenerated
    steps.csv matches the stored one byte for byte.
    """
    run_dir = Path(run_dir)
    stored = RunLog.read(run_dir)
    scenario = Scenario.from_dict(stored.scenario_dict)
    if scenario.content_hash() != stored.scenario_hash:
        raise ValueError(f"scenario hash mismatch in {run_dir}")
    fresh = run_episode(scenario, stored.controller, stored.seed)
    identical = fresh.steps_csv_bytes() == (run_dir / "steps.csv").read_bytes()
    return identical, fresh
