"""Closed-loop episode execution for every controller variant.

Per control step: take a friction measurement and advance the belief, build
the certificate quantities for the active controller, pick the input, log
the row, then step the plant with the true (unknown) friction. The belief
available to the controller at step k is H_k (built from measurements up to
k-1) while the freshly updated H_{k+1} enters only through the predicted
term of the generator, matching the information pattern of the certificate.

Controller kinds:
  nominal            state feedback only, no certificate
  apsc-filter        minimal-deviation projection onto the certificate set
  apsc-filter-frozen same filter but the belief never updates (non-adaptive)
  ampc               candidate-search MPC on the belief mean, no certificate
  apsc-mpc           same MPC with the certificate on the first input

Episodes are deterministic functions of (scenario, controller, seed): all
randomness derives from the seed through tagged streams.
"""

from __future__ import annotations

import time
from typing import TYPE_CHECKING

import numpy as np

from .. import rng as rngmod
from ..estimator import GaussianBelief, MeasurementModel, sample_measurement, update
from ..runlog import RunLog, StepRow, compute_metrics
from ..safety.closed_loop import VehicleClosedLoop
from ..safety.generator import evaluate_candidates
from ..safety.psi import SafetyHorizon, estimate_psi
from ..vehicle.dynamics import step_batch
from .filter import safe_filter
from .mpc import mpc_plan
from .nominal import nominal_batch

if TYPE_CHECKING:
    from ..scenario import Scenario

CONTROLLER_KINDS = ("nominal", "apsc-filter", "apsc-filter-frozen", "ampc", "apsc-mpc")
PLANT_SUBSTEPS = 4


def run_episode(scenario: Scenario, controller: str, seed: int,
                mc_samples: int | None = None) -> RunLog:
    """Execute one episode and return its complete log.

    mc_samples optionally overrides the certificate Monte Carlo budget
    (CLI flag); everything else comes from the scenario.
    """
    if controller == "cdbf":
        raise ValueError("the cdbf baseline is unavailable: its lateral-stability "
                         "constraints are defined outside this package")
    if controller not in CONTROLLER_KINDS:
        raise ValueError(f"unknown controller {controller!r}; pick one of {CONTROLLER_KINDS}")
    if mc_samples is not None:
        psc0 = scenario.psc
        per_inner = max(1, int(np.ceil(mc_samples / psc0.mc_inner)))
        # Fold the budget override into the scenario so the stored log
        # replays without out-of-band inputs.
        scenario = scenario.with_updates(
            psc=type(psc0)(**{**psc0.__dict__, "mc_samples": int(mc_samples),
                              "mc_per_inner": per_inner}))
    psc = scenario.psc
    mpc_cfg = scenario.mpc
    is_mpc = controller in ("ampc", "apsc-mpc")
    dt_ctrl = mpc_cfg.dt if is_mpc else psc.dt
    if is_mpc:
        psc = type(psc)(**{**psc.__dict__, "dt": mpc_cfg.dt})

    params = scenario.params()
    road = scenario.road()
    noise = scenario.noise_spec()
    horizon = SafetyHorizon(T=scenario.horizon_T, dt_eval=scenario.horizon_dt)
    model = VehicleClosedLoop(params=params, road=road, noise=noise,
                              nominal_cfg=scenario.nominal, e_max=scenario.e_max,
                              xi_clamp=scenario.estimator.clamp)
    meas_model = MeasurementModel(noise_var=scenario.estimator.meas_var,
                                  clamp=scenario.estimator.clamp)
    belief = GaussianBelief(scenario.estimator.prior_mean, scenario.estimator.prior_var)
    frozen = controller == "apsc-filter-frozen"

    true_mu = scenario.friction.draw(rngmod.derive_rng(seed, rngmod.TAG_TRUE_PARAM))
    x = scenario.initial_state().to_array()
    bounds = (params.d_delta_max, params.d_tau_max)
    scales = noise.scales()

    gate = estimate_psi(model, x, belief, horizon, psc.mc_samples,
                        seed, tags=(rngmod.TAG_GATE,))
    gate_passed = gate.value > 1.0 - psc.epsilon

    rows: list[StepRow] = []
    n_steps = int(np.ceil(scenario.duration_s / dt_ctrl))
    completed = False
    terminal_unsafe = False
    t_wall0 = time.perf_counter()
    compute_time = 0.0

    for k in range(n_steps):
        tic = time.perf_counter()
        # Measurement and belief transition H_k -> H_{k+1}.
        if not frozen and k % scenario.estimator.cadence == 0:
            meas = sample_measurement(true_mu, meas_model,
                                      rngmod.derive_rng(seed, rngmod.TAG_MEASUREMENT, k))
            belief_next = update(belief, meas, meas_model)
        else:
            meas = float("nan")
            belief_next = belief

        u_nom = nominal_batch(x[None, :], road, scenario.nominal, params)[0]

        margin = float("nan")
        feasible = -1
        if controller in ("nominal",):
            u = u_nom
            psi_est = estimate_psi(model, x, belief, horizon, psc.mc_samples,
                                   seed, tags=(k,))
        elif controller in ("apsc-filter", "apsc-filter-frozen"):
            candidates = np.vstack([u_nom, psc.candidate_grid()])
            cert = evaluate_candidates(model, x, belief, belief_next, candidates,
                                       horizon, psc, seed, tags=(k,))
            res = safe_filter(candidates, cert.margins, u_nom, bounds)
            u = res.input.to_array()
            margin, feasible = res.margin, int(res.feasible)
            psi_est = cert.psi_k
        elif controller == "ampc":
            plan = mpc_plan(model, x, belief, mpc_cfg, psc=None,
                            nominal_input=u_nom)
            u = plan.first.to_array()
            psi_est = estimate_psi(model, x, belief, horizon, psc.mc_samples,
                                   seed, tags=(k,))
        else:  # apsc-mpc
            plan = mpc_plan(model, x, belief, mpc_cfg, psc=psc,
                            belief_next=belief_next, horizon=horizon,
                            seed=seed, tags=(k,), nominal_input=u_nom)
            u = plan.first.to_array()
            margin = plan.margin
            feasible = int(plan.feasible) if not plan.fallback else 0
            cert_psi = estimate_psi(model, x, belief, horizon, psc.mc_samples,
                                    seed, tags=(k,))
            psi_est = cert_psi

        u = np.clip(u, [-bounds[0], -bounds[1]], [bounds[0], bounds[1]])

        # Plant step under the true friction.
        z = rngmod.derive_rng(seed, rngmod.TAG_PLANT, k).standard_normal((PLANT_SUBSTEPS, 1, 3))
        x_next, alive = step_batch(x[None, :], u, true_mu, road, params,
                                   dt=dt_ctrl, substeps=PLANT_SUBSTEPS,
                                   noise_scales=scales, z=z)
        compute_time += time.perf_counter() - tic

        rows.append(StepRow(
            k=k, t=k * dt_ctrl, state=tuple(float(v) for v in x),
            d_delta=float(u[0]), d_tau_e=float(u[1]), measurement=meas,
            belief_mean=belief_next.mean, belief_var=belief_next.var,
            safety_prob=psi_est.value, safety_hw=psi_est.half_width,
            safety_n=psi_est.n_samples, margin=margin, feasible=feasible,
        ))

        x = x_next[0]
        belief = belief_next
        if not alive[0]:
            terminal_unsafe = True
            break
        if x[9] >= road.length:
            completed = True
            break

    wall = time.perf_counter() - t_wall0
    metrics = compute_metrics(
        rows, completed=completed, terminal_unsafe=terminal_unsafe,
        gate_value=gate.value, gate_passed=gate_passed,
        wall_time_s=wall,
        wall_time_per_step_s=compute_time / max(len(rows), 1),
    )
    return RunLog(
        scenario_dict=scenario.to_dict(), scenario_hash=scenario.content_hash(),
        controller=controller, seed=seed, true_mu=true_mu,
        rows=rows, metrics=metrics,
    )
