"""Batch experiments: grids over road classes and settings, horizon sweeps.

Cells and seeds run in a small process pool; each run writes its own output
directory and the summary reduces after the pool drains, so results do not
depend on worker count or completion order. Per-run seeds derive from the
(base seed, cell, controller, run index) path, never from pool scheduling.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..control.episode import run_episode
from ..runlog import RunLog
from ..scenario import FRICTION_CLASSES, EstimatorSpec, FrictionSpec, Scenario

INFEASIBLE_THRESHOLD = 0.3   # cell infeasible when every method stays below


@dataclass(frozen=True)
class ExperimentGrid:
    road_classes: tuple[str, ...] = ("icy",)
    prior_means: tuple[float, ...] = (0.3,)
    prior_stds: tuple[float, ...] = (0.05,)
    meas_stds: tuple[float, ...] = (0.05,)
    e_maxes: tuple[float, ...] = (3.0,)
    t_mpcs: tuple[int, ...] = (10,)
    runs_per_cell: int = 20
    base: Scenario = field(default_factory=Scenario)

    def __post_init__(self):
        for name in self.road_classes:
            if name not in FRICTION_CLASSES:
                raise ValueError(f"unknown road class {name!r}")
        if self.runs_per_cell < 1:
            raise ValueError("need at least one run per cell")
        if not all((self.road_classes, self.prior_means, self.prior_stds,
                    self.meas_stds, self.e_maxes, self.t_mpcs)):
            raise ValueError("grid axes must be nonempty")

    def cells(self) -> list[tuple[str, Scenario]]:
        out = []
        for road in self.road_classes:
            for pm in self.prior_means:
                for ps in self.prior_stds:
                    for ms in self.meas_stds:
                        for em in self.e_maxes:
                            for tm in self.t_mpcs:
                                cell_id = f"{road}_pm{pm}_ps{ps}_ms{ms}_em{em}_T{tm}"
                                sc = self.base.with_updates(
                                    friction=FrictionSpec(kind="class", name=road),
                                    estimator=EstimatorSpec(
                                        prior_mean=pm, prior_var=ps ** 2,
                                        meas_var=ms ** 2,
                                        clamp=self.base.estimator.clamp,
                                        cadence=self.base.estimator.cadence),
                                    e_max=em,
                                    mpc=type(self.base.mpc)(**{**self.base.mpc.__dict__,
                                                               "horizon": tm}),
                                )
                                out.append((cell_id, sc))
        return out


def _run_seed(base_seed: int, cell_id: str, controller: str, idx: int) -> int:
    digest = hashlib.sha256(f"{base_seed}/{cell_id}/{controller}/{idx}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


def _job(args):
    scenario_dict, controller, seed, run_dir, mc_samples = args
    scenario = Scenario.from_dict(scenario_dict)
    log = run_episode(scenario, controller, seed, mc_samples=mc_samples)
    if run_dir is not None:
        log.write(run_dir)
    return log.metrics.to_dict()


def _pool_init():
    try:
        import numba
        numba.set_num_threads(1)
    except Exception:
        pass


def _execute(jobs, workers: int | None):
    if workers is None:
        workers = 2
    if workers <= 1 or len(jobs) <= 1:
        return [_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers, initializer=_pool_init) as pool:
        return list(pool.map(_job, jobs))


def aggregate(metrics: list[dict]) -> dict:
    """Reduce per-run metrics to the trade-off quantities."""
    if not metrics:
        raise ValueError("nothing to aggregate")
    arr = lambda key: np.array([m[key] for m in metrics], dtype=float)
    return {
        "runs": len(metrics),
        "avg_min_safety": float(arr("min_safety_prob").mean()),
        "avg_v_x": float(arr("mean_v_x").mean()),
        "avg_abs_e": float(arr("mean_abs_e").mean()),
        "std_abs_e_mean": float(arr("std_abs_e").mean()),
        "avg_empirical_safety": float(arr("empirical_safety").mean()),
        "completed_fraction": float(arr("completed").mean()),
        "terminal_unsafe_fraction": float(arr("terminal_unsafe").mean()),
        "avg_wall_per_step_s": float(arr("wall_time_per_step_s").mean()),
    }


def run_grid(grid: ExperimentGrid, controllers: list[str], out_dir: str | Path,
             base_seed: int = 0, workers: int | None = None,
             mc_samples: int | None = None, write_runs: bool = True) -> dict:
    """Run every cell x controller x seed; write logs, aggregates, trade-offs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cells = grid.cells()
    jobs, keys = [], []
    for cell_id, sc in cells:
        sd = sc.to_dict()
        for ctrl in controllers:
            for i in range(grid.runs_per_cell):
                seed = _run_seed(base_seed, cell_id, ctrl, i)
                run_dir = out / "runs" / cell_id / ctrl / f"seed{i:03d}" if write_runs else None
                jobs.append((sd, ctrl, seed, run_dir, mc_samples))
                keys.append((cell_id, ctrl))
    t0 = time.perf_counter()
    results = _execute(jobs, workers)

    by_key: dict[tuple[str, str], list[dict]] = {}
    failures = []
    for key, res in zip(keys, results):
        by_key.setdefault(key, []).append(res)
        if res.get("terminal_unsafe"):
            failures.append({"cell": key[0], "controller": key[1]})

    cells_out = {}
    for cell_id, _ in cells:
        methods = {ctrl: aggregate(by_key[(cell_id, ctrl)]) for ctrl in controllers}
        infeasible = all(m["avg_min_safety"] < INFEASIBLE_THRESHOLD for m in methods.values())
        cells_out[cell_id] = {"methods": methods, "infeasible": infeasible}

    summary = {
        "base_seed": base_seed,
        "controllers": controllers,
        "runs_per_cell": grid.runs_per_cell,
        "cells": cells_out,
        "early_terminations": failures,
        "wall_time_s": time.perf_counter() - t0,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    lines = ["cell,controller,avg_min_safety,avg_v_x,infeasible"]
    for cell_id, entry in cells_out.items():
        for ctrl, agg in entry["methods"].items():
            lines.append(f"{cell_id},{ctrl},{agg['avg_min_safety']!r},"
                         f"{agg['avg_v_x']!r},{int(entry['infeasible'])}")
    (out / "tradeoff.csv").write_text("\n".join(lines) + "\n")
    return summary


def horizon_sweep(t_mpcs: list[int], scenario: Scenario, controllers: list[str],
                  out_dir: str | Path, seeds: int = 20, base_seed: int = 0,
                  workers: int | None = None, mc_samples: int | None = None,
                  write_runs: bool = False) -> list[dict]:
    """Safety and per-step compute cost per MPC horizon on one scenario."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for tm in t_mpcs:
        sc = scenario.with_updates(
            mpc=type(scenario.mpc)(**{**scenario.mpc.__dict__, "horizon": int(tm)}))
        grid = ExperimentGrid(
            road_classes=(scenario.friction.name,) if scenario.friction.kind == "class" else ("icy",),
            prior_means=(sc.estimator.prior_mean,),
            prior_stds=(float(np.sqrt(sc.estimator.prior_var)),),
            meas_stds=(float(np.sqrt(sc.estimator.meas_var)),),
            e_maxes=(sc.e_max,), t_mpcs=(int(tm),),
            runs_per_cell=seeds, base=sc)
        summary = run_grid(grid, controllers, out / f"T{tm}", base_seed=base_seed,
                           workers=workers, mc_samples=mc_samples, write_runs=write_runs)
        cell = next(iter(summary["cells"].values()))
        for ctrl, agg in cell["methods"].items():
            rows.append({"t_mpc": int(tm), "controller": ctrl,
                         "avg_min_safety": agg["avg_min_safety"],
                         "avg_v_x": agg["avg_v_x"],
                         "avg_wall_per_step_s": agg["avg_wall_per_step_s"]})
    lines = ["t_mpc,controller,avg_min_safety,avg_v_x,avg_wall_per_step_s"]
    for r in rows:
        lines.append(f"{r['t_mpc']},{r['controller']},{r['avg_min_safety']!r},"
                     f"{r['avg_v_x']!r},{r['avg_wall_per_step_s']!r}")
    (out / "horizon_sweep.csv").write_text("\n".join(lines) + "\n")
    return rows
