"""Short-horizon MPC by discretized candidate-set search.

Decision variables are the first control_horizon inputs, each drawn from a
quantized grid of steering-rate x torque-rate levels; the last decided input
holds for the remaining prediction steps. The prediction model is the full
vehicle drift with the belief mean as friction (that is the adaptive part).
Cost:  sum_{k=1..T_mpc} w_speed (v_x - V_ref)^2 + w_lat e^2 + w_head psi^2.

With a certificate config the safety constraint applies to the first input
only: the distinct first-step levels are certified in one shared-sample
batch and the cheapest sequence with a feasible first input wins. When no
first input is feasible, the max-margin first input is applied and the plan
is flagged infeasible. The AMPC baseline is the same search without the
constraint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..estimator import GaussianBelief
from ..safety.closed_loop import VehicleClosedLoop
from ..safety.generator import PSCConfig, StepCertificate, evaluate_candidates
from ..safety.psi import SafetyHorizon
from ..vehicle.state import ControlInput


@dataclass(frozen=True)
class MPCConfig:
    horizon: int = 10            # T_mpc prediction steps
    dt: float = 0.2              # control interval (s)
    control_horizon: int = 2     # decided steps; last one holds afterwards
    w_speed: float = 0.05
    w_lateral: float = 1.0
    w_heading: float = 1.0
    steer_levels: int = 7
    torque_levels: int = 5
    substeps: int = 2            # integrator substeps per prediction step

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("prediction horizon must be at least 1")
        if not (1 <= self.control_horizon <= self.horizon):
            raise ValueError("control horizon must lie in [1, horizon]")
        if min(self.w_speed, self.w_lateral, self.w_heading) < 0:
            raise ValueError("cost weights must be nonnegative")
        if self.steer_levels < 1 or self.torque_levels < 1:
            raise ValueError("need at least one level per channel")


@dataclass(frozen=True)
class MPCPlan:
    sequence: np.ndarray        # (control_horizon, 2) planned inputs
    cost: float
    feasible: bool              # certificate feasibility of the first input
    margin: float               # margin of the applied first input (nan without PSC)
    fallback: bool              # True when the search produced no valid plan

    @property
    def first(self) -> ControlInput:
        return ControlInput.from_array(self.sequence[0])


def step_level_grid(cfg: MPCConfig, bounds: tuple[float, float]) -> np.ndarray:
    """Per-step input levels, shape (S, 2): steer x torque cross product."""
    dd = np.linspace(-bounds[0], bounds[0], cfg.steer_levels)
    dt_ = np.linspace(-bounds[1], bounds[1], cfg.torque_levels)
    a, b = np.meshgrid(dd, dt_, indexing="ij")
    return np.column_stack([a.ravel(), b.ravel()])


def candidate_sequences(cfg: MPCConfig, bounds: tuple[float, float]) -> tuple[np.ndarray, np.ndarray]:
    """All input sequences (S**Hc, Hc, 2) and each row's first-level index.

    Enumeration is first-step-major, so sequence i uses level i // S**(Hc-1)
    at step 0.
    """
    levels = step_level_grid(cfg, bounds)
    S = levels.shape[0]
    Hc = cfg.control_horizon
    idx = np.indices((S,) * Hc).reshape(Hc, -1).T     # (S**Hc, Hc)
    seqs = levels[idx]                                # (S**Hc, Hc, 2)
    return seqs, idx[:, 0]


def mpc_plan(model: VehicleClosedLoop, x: np.ndarray, belief: GaussianBelief,
             cfg: MPCConfig, psc: PSCConfig | None = None,
             belief_next: GaussianBelief | None = None,
             horizon: SafetyHorizon | None = None,
             seed: int = 0, tags: tuple[int, ...] = (),
             nominal_input: np.ndarray | None = None) -> MPCPlan:
    """Plan one control interval; returns the sequence, first element applied."""
    bounds = (model.params.d_delta_max, model.params.d_tau_max)
    seqs, first_idx = candidate_sequences(cfg, bounds)
    mu_hat = float(np.clip(belief.mean, *model.xi_clamp))
    costs = model.mpc_costs(np.asarray(x, dtype=float), seqs, cfg.horizon, cfg.dt,
                            mu_hat, (cfg.w_speed, cfg.w_lateral, cfg.w_heading),
                            substeps=cfg.substeps)
    valid = costs < 1e17
    if not valid.any():
        hold = nominal_input if nominal_input is not None else np.zeros(2)
        seq = np.tile(np.asarray(hold, dtype=float), (cfg.control_horizon, 1))
        return MPCPlan(sequence=seq, cost=float("nan"), feasible=False,
                       margin=float("nan"), fallback=True)

    if psc is None:
        best = int(np.lexsort((np.arange(costs.size), costs))[0])
        return MPCPlan(sequence=seqs[best].copy(), cost=float(costs[best]),
                       feasible=True, margin=float("nan"), fallback=False)

    if belief_next is None or horizon is None:
        raise ValueError("certificate-constrained MPC needs belief_next and horizon")
    levels = step_level_grid(cfg, bounds)
    cert: StepCertificate = evaluate_candidates(
        model, x, belief, belief_next, levels, horizon, psc, seed, tags,
        dt_first=cfg.dt)
    margins = cert.margins
    feas_first = margins >= 0.0

    seq_feasible = feas_first[first_idx] & valid
    if seq_feasible.any():
        cand = np.flatnonzero(seq_feasible)
        best = int(cand[np.lexsort((cand, costs[cand]))[0]])
        return MPCPlan(sequence=seqs[best].copy(), cost=float(costs[best]),
                       feasible=True, margin=float(margins[first_idx[best]]),
                       fallback=False)

    # No feasible first input: apply the max-margin one, keep the cheapest
    # continuation within that group.
    u0_best = int(np.argmax(margins))
    group = np.flatnonzero((first_idx == u0_best) & valid)
    if group.size == 0:
        group = np.flatnonzero(valid)
    best = int(group[np.lexsort((group, costs[group]))[0]])
    seq = seqs[best].copy()
    seq[0] = levels[u0_best]
    return MPCPlan(sequence=seq, cost=float(costs[best]), feasible=False,
                   margin=float(margins[u0_best]), fallback=False)
