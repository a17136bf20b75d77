"""Command-line interface: run, grid, horizon-sweep, plot, replay, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..control.episode import CONTROLLER_KINDS, run_episode
from ..runlog import RunLog
from ..scenario import Scenario, icy_scenario
from .grid import ExperimentGrid, aggregate, horizon_sweep, run_grid
from .plots import emit_plots, plot_tradeoff
from .replay import replay_run


def _load_scenario(path: str | None) -> Scenario:
    return Scenario.from_yaml(path) if path else icy_scenario()


def _cmd_run(args) -> int:
    scenario = _load_scenario(args.scenario)
    log = run_episode(scenario, args.controller, args.seed, mc_samples=args.mc_samples)
    out = Path(args.out)
    log.write(out)
    print(json.dumps(log.metrics.to_dict(), indent=2, sort_keys=True))
    if args.check:
        ok, _ = replay_run(out)
        print(f"replay check: {'ok' if ok else 'MISMATCH'}")
        return 0 if ok else 1
    return 0


def _cmd_grid(args) -> int:
    base = _load_scenario(args.scenario)
    grid = ExperimentGrid(
        road_classes=tuple(args.classes.split(",")),
        e_maxes=tuple(float(v) for v in args.e_max.split(",")),
        runs_per_cell=args.runs, base=base)
    controllers = args.controllers.split(",")
    summary = run_grid(grid, controllers, args.out, base_seed=args.seed,
                       workers=args.workers, mc_samples=args.mc_samples)
    print(json.dumps({c: e["methods"] for c, e in summary["cells"].items()},
                     indent=2, sort_keys=True))
    if args.check:
        ok = _check_grid(Path(args.out), summary)
        print(f"grid check: {'ok' if ok else 'FAILED'}")
        return 0 if ok else 1
    return 0


def _check_grid(out: Path, summary: dict) -> bool:
    """Aggregates must equal recomputation from the raw logs on disk."""
    runs_root = out / "runs"
    for cell_id, entry in summary["cells"].items():
        for ctrl, agg in entry["methods"].items():
            dirs = sorted((runs_root / cell_id / ctrl).glob("seed*"))
            metrics = [RunLog.read(d).metrics.to_dict() for d in dirs]
            fresh = aggregate(metrics)
            if any(abs(fresh[k] - agg[k]) > 1e-12 for k in fresh):
                return False
    sample = next(runs_root.rglob("seed*/meta.json"), None)
    if sample is not None:
        ok, _ = replay_run(sample.parent)
        if not ok:
            return False
    return True


def _cmd_horizon_sweep(args) -> int:
    scenario = _load_scenario(args.scenario)
    horizons = [int(v) for v in args.horizons.split(",")] if args.horizons else []
    rows = horizon_sweep(horizons, scenario, args.controllers.split(","),
                         args.out, seeds=args.seeds, base_seed=args.seed,
                         workers=args.workers, mc_samples=args.mc_samples)
    print(json.dumps(rows, indent=2))
    if args.check:
        times = {}
        for r in rows:
            times.setdefault(r["controller"], []).append((r["t_mpc"], r["avg_wall_per_step_s"]))
        ok = all(sorted(v) == sorted(v, key=lambda p: p[0]) for v in times.values())
        print(f"sweep check: {'ok' if ok else 'FAILED'}")
        return 0 if ok else 1
    return 0


def _cmd_plot(args) -> int:
    summary = None
    if args.summary:
        summary = json.loads(Path(args.summary).read_text())
    written = emit_plots(args.runs, args.out, summary=summary)
    for p in written:
        print(p)
    return 0


def _cmd_replay(args) -> int:
    ok, fresh = replay_run(args.run)
    print(f"replay of {args.run}: {'byte-identical' if ok else 'MISMATCH'} "
          f"({len(fresh.rows)} steps)")
    return 0 if ok else 1


def _cmd_serve(args) -> int:
    import uvicorn

    from ..service.app import create_app
    app = create_app(Path(args.data_dir))
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="psclab",
                                description="Adaptive probabilistic safety certificate lab")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_required=True):
        sp.add_argument("--scenario", help="scenario YAML file")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", required=out_required, help="output directory")
        sp.add_argument("--mc-samples", type=int, default=None,
                        help="override Monte Carlo rollouts per safety evaluation")
        sp.add_argument("--workers", type=int, default=None)
        sp.add_argument("--check", action="store_true",
                        help="verify outputs (replay, aggregate recompute); nonzero exit on failure")

    sp = sub.add_parser("run", help="run one episode")
    common(sp)
    sp.add_argument("--controller", default="apsc-filter", choices=CONTROLLER_KINDS)
    sp.set_defaults(fn=_cmd_run)

    sp = sub.add_parser("grid", help="run an experiment grid")
    common(sp)
    sp.add_argument("--classes", default="icy", help="comma list of road classes")
    sp.add_argument("--e-max", default="3.0", help="comma list of lane-error limits")
    sp.add_argument("--controllers", default="apsc-mpc,ampc")
    sp.add_argument("--runs", type=int, default=20, help="runs per cell")
    sp.set_defaults(fn=_cmd_grid)

    sp = sub.add_parser("horizon-sweep", help="safety/compute vs MPC horizon")
    common(sp)
    sp.add_argument("--horizons", default="5,10,20", help="comma list of T_mpc values")
    sp.add_argument("--controllers", default="apsc-mpc,ampc")
    sp.add_argument("--seeds", type=int, default=20)
    sp.set_defaults(fn=_cmd_horizon_sweep)

    sp = sub.add_parser("plot", help="render figures from run logs")
    sp.add_argument("--runs", nargs="+", required=True, help="run directories")
    sp.add_argument("--summary", help="summary.json for the trade-off scatter")
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=_cmd_plot)

    sp = sub.add_parser("replay", help="re-execute a run and compare bytes")
    sp.add_argument("--run", required=True, help="run directory")
    sp.set_defaults(fn=_cmd_replay)

    sp = sub.add_parser("serve", help="start the session service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8008)
    sp.add_argument("--data-dir", default="service_data")
    sp.set_defaults(fn=_cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
