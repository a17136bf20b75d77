#!/usr/bin/env python3
"""One icy episode per controller, with plots: the quickest full-stack demo.

Run: python3 scripts/run_icy_demo.py [out_dir]
"""

import sys
from pathlib import Path

from psclab.control.episode import run_episode
from psclab.harness.plots import emit_plots
from psclab.scenario import icy_scenario


def main() -> None:
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
    scenario = icy_scenario()
    run_dirs = []
    for controller in ("nominal", "apsc-filter", "apsc-mpc"):
        log = run_episode(scenario, controller, seed=7)
        d = out / controller
        log.write(d)
        run_dirs.append(d)
        m = log.metrics
        print(f"{controller:12s} min-safety={m.min_safety_prob:.2f} "
              f"mean v={m.mean_v_x:.2f} m/s  mean |e|={m.mean_abs_e:.2f} m "
              f"empirical={m.empirical_safety:.2f} "
              f"{'terminal-unsafe' if m.terminal_unsafe else ''}")
    written = emit_plots(run_dirs, out / "plots")
    print("plots:", *[str(w) for w in written if w.suffix == ".png"])


if __name__ == "__main__":
    main()
