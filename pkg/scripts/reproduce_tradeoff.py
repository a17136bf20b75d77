#!/usr/bin/env python3
"""Desk-scale safety-vs-efficiency trade-off over road classes.

Runs the certificate-constrained MPC against the unconstrained baseline on
icy/wet/dry cells and renders the trade-off scatter (average minimum safety
probability vs average speed).

Run: python3 scripts/reproduce_tradeoff.py [out_dir] [runs_per_cell]
"""

import json
import sys
from pathlib import Path

from psclab.harness.grid import ExperimentGrid, run_grid
from psclab.harness.plots import plot_tradeoff
from psclab.scenario import Scenario


def main() -> None:
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "tradeoff_out")
    runs = int(sys.argv[2]) if len(sys.argv) > 2 else 10
    grid = ExperimentGrid(road_classes=("icy", "wet", "dry"),
                          runs_per_cell=runs, base=Scenario())
    summary = run_grid(grid, ["apsc-mpc", "ampc"], out, base_seed=17, workers=2,
                       write_runs=False)
    for cell, entry in summary["cells"].items():
        for ctrl, agg in entry["methods"].items():
            print(f"{cell:30s} {ctrl:10s} safety={agg['avg_min_safety']:.3f} "
                  f"v={agg['avg_v_x']:.2f} m/s"
                  f"{'  [infeasible cell]' if entry['infeasible'] else ''}")
    plot_tradeoff(summary, out)
    print("wrote", out / "tradeoff.png")
    (out / "summary_pretty.json").write_text(json.dumps(summary, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
