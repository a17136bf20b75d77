"""Run logs: per-step rows, derived metrics, and deterministic serialization.

A run writes one directory: meta.json (scenario, seed, hash, flags, metrics)
and steps.csv (one row per executed control step). Rows use shortest
round-trip float formatting, so a bit-identical re-execution produces
byte-identical steps.csv; wall-clock figures live only in meta.json.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .vehicle.state import STATE_FIELDS

EMPIRICAL_SAFETY_E = 3.0   # |e| threshold of the empirical safety fraction (m)

ROW_COLUMNS = (
    ("k", "t") + STATE_FIELDS
    + ("d_delta", "d_tau_e", "measurement", "belief_mean", "belief_var",
       "safety_prob", "safety_hw", "safety_n", "margin", "feasible")
)


@dataclass(frozen=True)
class StepRow:
    k: int
    t: float
    state: tuple[float, ...]          # 12 entries in STATE_FIELDS order
    d_delta: float
    d_tau_e: float
    measurement: float                # nan when no measurement this step
    belief_mean: float
    belief_var: float
    safety_prob: float
    safety_hw: float
    safety_n: int
    margin: float                     # nan for unconstrained controllers
    feasible: int                     # 1 feasible, 0 infeasible, -1 not applicable

    def values(self) -> tuple:
        return (self.k, self.t) + tuple(self.state) + (
            self.d_delta, self.d_tau_e, self.measurement, self.belief_mean,
            self.belief_var, self.safety_prob, self.safety_hw, self.safety_n,
            self.margin, self.feasible)


@dataclass(frozen=True)
class RunMetrics:
    min_safety_prob: float
    mean_v_x: float
    mean_abs_e: float
    std_abs_e: float
    empirical_safety: float      # fraction of steps with |e| < 3 m
    feasible_fraction: float     # over steps where the certificate applied
    steps: int
    completed: bool              # reached the end of the road
    terminal_unsafe: bool        # numeric/speed-floor failure
    gate_value: float            # Psi(X_0) under the prior
    gate_passed: bool
    wall_time_s: float
    wall_time_per_step_s: float  # compute only, logging excluded

    def to_dict(self) -> dict:
        return asdict(self)


def compute_metrics(rows: list[StepRow], *, completed: bool, terminal_unsafe: bool,
                    gate_value: float, gate_passed: bool,
                    wall_time_s: float = 0.0, wall_time_per_step_s: float = 0.0) -> RunMetrics:
    if not rows:
        raise ValueError("cannot compute metrics for an empty run")
    e_idx = 2 + STATE_FIELDS.index("e")
    vx_idx = 2 + STATE_FIELDS.index("v_x")
    vals = np.array([r.values() for r in rows], dtype=float)
    abs_e = np.abs(vals[:, e_idx])
    psi = vals[:, [ROW_COLUMNS.index("safety_prob")]].ravel()
    feas = vals[:, ROW_COLUMNS.index("feasible")]
    applicable = feas >= 0
    return RunMetrics(
        min_safety_prob=float(np.nanmin(psi)),
        mean_v_x=float(vals[:, vx_idx].mean()),
        mean_abs_e=float(abs_e.mean()),
        std_abs_e=float(abs_e.std()),
        empirical_safety=float((abs_e < EMPIRICAL_SAFETY_E).mean()),
        feasible_fraction=float(feas[applicable].mean()) if applicable.any() else 1.0,
        steps=len(rows),
        completed=completed,
        terminal_unsafe=terminal_unsafe,
        gate_value=gate_value,
        gate_passed=gate_passed,
        wall_time_s=wall_time_s,
        wall_time_per_step_s=wall_time_per_step_s,
    )


@dataclass
class RunLog:
    scenario_dict: dict
    scenario_hash: str
    controller: str
    seed: int
    true_mu: float
    rows: list[StepRow] = field(default_factory=list)
    metrics: RunMetrics | None = None

    # serialization -----------------------------------------------------

    def steps_csv_bytes(self) -> bytes:
        lines = [",".join(ROW_COLUMNS)]
        for r in self.rows:
            lines.append(",".join(_fmt(v) for v in r.values()))
        return ("\n".join(lines) + "\n").encode()

    def write(self, run_dir: str | Path) -> Path:
        d = Path(run_dir)
        d.mkdir(parents=True, exist_ok=True)
        (d / "steps.csv").write_bytes(self.steps_csv_bytes())
        meta = {
            "scenario": self.scenario_dict,
            "scenario_hash": self.scenario_hash,
            "controller": self.controller,
            "seed": self.seed,
            "true_mu": self.true_mu,
            "metrics": self.metrics.to_dict() if self.metrics else None,
        }
        (d / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
        return d

    @staticmethod
    def read(run_dir: str | Path) -> "RunLog":
        d = Path(run_dir)
        meta = json.loads((d / "meta.json").read_text())
        rows = read_steps_csv(d / "steps.csv")
        metrics = RunMetrics(**meta["metrics"]) if meta.get("metrics") else None
        return RunLog(
            scenario_dict=meta["scenario"], scenario_hash=meta["scenario_hash"],
            controller=meta["controller"], seed=meta["seed"],
            true_mu=meta["true_mu"], rows=rows, metrics=metrics,
        )


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def read_steps_csv(path: str | Path) -> list[StepRow]:
    text = Path(path).read_text().strip().split("\n")
    header = text[0].split(",")
    if tuple(header) != ROW_COLUMNS:
        raise ValueError(f"unexpected columns in {path}")
    n_state = len(STATE_FIELDS)
    rows = []
    for line in text[1:]:
        parts = line.split(",")
        vals = [float(p) for p in parts]
        rows.append(StepRow(
            k=int(vals[0]), t=vals[1],
            state=tuple(vals[2:2 + n_state]),
            d_delta=vals[2 + n_state], d_tau_e=vals[3 + n_state],
            measurement=vals[4 + n_state], belief_mean=vals[5 + n_state],
            belief_var=vals[6 + n_state], safety_prob=vals[7 + n_state],
            safety_hw=vals[8 + n_state], safety_n=int(vals[9 + n_state]),
            margin=vals[10 + n_state], feasible=int(vals[11 + n_state]),
        ))
    return rows
