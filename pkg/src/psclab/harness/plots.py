"""Plot emission: trajectory overlays, trade-off scatter, posterior curves.

Every figure writes its plotted data next to it as CSV with the same values,
so the images stay reproducible and diffable against the run logs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ..runlog import RunLog
from ..scenario import Scenario


def _road_xy(scenario: Scenario, s, e):
    road = scenario.road()
    x, y, th = road.frame_at(np.asarray(s, dtype=float))
    e = np.asarray(e, dtype=float)
    return x - e * np.sin(th), y + e * np.cos(th)


def _require(paths) -> list[Path]:
    paths = [Path(p) for p in paths]
    missing = [str(p) for p in paths if not (p / "meta.json").exists()]
    if missing:
        raise FileNotFoundError("missing run logs: " + ", ".join(missing))
    return paths


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(repr(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n")


def plot_trajectories(run_dirs, out_dir: str | Path) -> list[Path]:
    """Vehicle paths over the road geometry with the lane band."""
    run_dirs = _require(run_dirs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    fig, ax = plt.subplots(figsize=(9, 5))
    first_scenario = None
    for rd in run_dirs:
        log = RunLog.read(rd)
        sc = Scenario.from_dict(log.scenario_dict)
        first_scenario = first_scenario or sc
        s = np.array([r.state[9] for r in log.rows])
        e = np.array([r.state[10] for r in log.rows])
        x, y = _road_xy(sc, s, e)
        ax.plot(x, y, lw=1.2, label=f"{log.controller} seed={log.seed}")
        data = out / f"trajectory_{rd.name}_{log.controller}.csv"
        _write_csv(data, ["s", "e", "x", "y"], [s, e, x, y])
        written.append(data)
    sc = first_scenario
    road = sc.road()
    line = road.centerline()
    ax.plot(line[:, 1], line[:, 2], "k--", lw=0.8, label="centerline")
    for sign in (+1, -1):
        bx, by = _road_xy(sc, line[:, 0], sign * sc.e_max * np.ones(len(line)))
        ax.plot(bx, by, "r:", lw=0.8)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_aspect("equal")
    ax.legend(fontsize=7)
    fig.tight_layout()
    img = out / "trajectories.png"
    fig.savefig(img, dpi=130)
    plt.close(fig)
    written.append(img)
    return written


def plot_posterior(run_dir, out_dir: str | Path) -> list[Path]:
    """Belief mean with a +-1 sigma band over time, plus the true value."""
    (rd,) = _require([run_dir])
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log = RunLog.read(rd)
    t = np.array([r.t for r in log.rows])
    mean = np.array([r.belief_mean for r in log.rows])
    std = np.sqrt(np.array([r.belief_var for r in log.rows]))
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(t, mean, label="posterior mean")
    ax.fill_between(t, mean - std, mean + std, alpha=0.25, label="+-1 sigma")
    ax.axhline(log.true_mu, color="k", ls="--", lw=0.8, label="true friction")
    ax.set_xlabel("t (s)")
    ax.set_ylabel("friction estimate")
    ax.legend(fontsize=8)
    fig.tight_layout()
    img = out / f"posterior_{rd.name}.png"
    fig.savefig(img, dpi=130)
    plt.close(fig)
    data = out / f"posterior_{rd.name}.csv"
    _write_csv(data, ["t", "mean", "std"], [t, mean, std])
    return [img, data]


def plot_tradeoff(summary: dict, out_dir: str | Path) -> list[Path]:
    """Average minimum safety probability vs average speed per method."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 5))
    rows = {"controller": [], "avg_v_x": [], "avg_min_safety": []}
    markers = {}
    for cell_id, entry in summary["cells"].items():
        for ctrl, agg in entry["methods"].items():
            m = markers.setdefault(ctrl, "osv^D"[len(markers) % 5])
            ax.scatter(agg["avg_v_x"], agg["avg_min_safety"], marker=m,
                       label=ctrl if cell_id == next(iter(summary["cells"])) else None,
                       alpha=0.8)
            rows["controller"].append(ctrl)
            rows["avg_v_x"].append(agg["avg_v_x"])
            rows["avg_min_safety"].append(agg["avg_min_safety"])
    ax.set_xlabel("average v_x (m/s)")
    ax.set_ylabel("average min safety probability")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(fontsize=8)
    fig.tight_layout()
    img = out / "tradeoff.png"
    fig.savefig(img, dpi=130)
    plt.close(fig)
    data = out / "tradeoff_points.csv"
    lines = ["controller,avg_v_x,avg_min_safety"]
    for c, v, s in zip(rows["controller"], rows["avg_v_x"], rows["avg_min_safety"]):
        lines.append(f"{c},{v!r},{s!r}")
    data.write_text("\n".join(lines) + "\n")
    return [img, data]


def emit_plots(run_dirs, out_dir: str | Path, summary: dict | None = None) -> list[Path]:
    """All standard figures for a set of runs (plus trade-off if a summary)."""
    run_dirs = _require(run_dirs)
    written = plot_trajectories(run_dirs, out_dir)
    for rd in run_dirs:
        written += plot_posterior(rd, out_dir)
    if summary is not None:
        written += plot_tradeoff(summary, out_dir)
    return written
