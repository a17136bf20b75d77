"""Acceptance criteria, one test per criterion at its stated tolerance.

Each test prints one [PASS]/[FAIL] line. Heavy closed-loop criteria use the
harness process pool; all randomness is seed-derived, so reruns reproduce
the same numbers. Criterion 2 is implemented faithfully as stated and is
expected to fail: with a prior of (0.3, 0.01) and measurement variance 0.1,
the conjugate posterior mean after 50 measurements of a 0.7 truth has an
expected shortfall of about 0.067 from prior inertia alone (0.084 with the
default measurement clamp), which already exceeds the 0.05 tolerance before
any sampling variability; see the analysis in the test body.
"""

import itertools
import json
import time

import numpy as np
import pytest

from psclab.estimator import (GaussianBelief, MeasurementModel, conjugate_posterior,
                              posterior_after_n, sample_measurement)
from psclab.guidance.schema import (ALLOWED_BAR_SIGMA, ALLOWED_E_MAX, ALLOWED_MU_0,
                                    ALLOWED_SIGMA_0, SchemaValidationError,
                                    validate_executables)
from psclab.harness.grid import horizon_sweep, run_grid, ExperimentGrid
from psclab.harness.llm_cases import (CASE_PREFERENCE, CASE_WRONG_PREMISE, case_means,
                                      run_llm_case)
from psclab.harness.replay import replay_run
from psclab.rng import derive_rng
from psclab.control.episode import run_episode
from psclab.control.nominal import NominalControllerConfig
from psclab.safety.closed_loop import VehicleClosedLoop
from psclab.safety.generator import PSCConfig, evaluate_candidates
from psclab.safety.psi import SafetyHorizon
from psclab.scenario import dry_scenario, icy_scenario
from psclab.toy import ToyClosedLoop, exact_psi, three_point_map
from psclab.vehicle.dynamics import NoiseSpec
from psclab.vehicle.params import VehicleParams
from psclab.vehicle.state import rolling_state

WORKERS = 2


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


# 1 ---------------------------------------------------------------------------

def test_c01_estimator_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1001)
    model = MeasurementModel(noise_var=0.1)
    worst = 0.0
    for _ in range(1000):
        prior = GaussianBelief(rng.uniform(0.1, 1.0), rng.uniform(1e-4, 0.5))
        ms = rng.uniform(0.05, 1.2, size=rng.integers(1, 60))
        fold = posterior_after_n(prior, ms, model)
        closed = conjugate_posterior(prior, ms, model)
        worst = max(worst, abs(fold.mean - closed.mean), abs(fold.var - closed.var))
    wall = time.perf_counter() - t0
    _report("C1 estimator oracle equivalence", worst <= 1e-12 and wall < 5.0,
            f"worst |fold - closed| = {worst:.2e}, wall {wall:.2f}s (< 5s)")


# 2 ---------------------------------------------------------------------------

def test_c02_posterior_drift_within_tolerance():
    # Faithful implementation of the stated check. Analysis: the posterior
    # mean is (mu0/var0 + sum(M)/nv) / (1/var0 + n/nv); with mu0=0.3,
    # var0=0.01, nv=0.1, n=50 and E[M] ~= 0.68 (clamped normal around 0.7)
    # the expected mean is ~0.616, i.e. 0.084 short of 0.7, so no sampling
    # luck can put 95% of seeds within 0.05.
    t0 = time.perf_counter()
    model = MeasurementModel(noise_var=0.1)
    hits = 0
    n_seeds = 200
    for seed in range(n_seeds):
        rng = derive_rng(2002, seed)
        belief = GaussianBelief(0.3, 0.01)
        for _ in range(50):
            m = sample_measurement(0.7, model, rng)
            belief = posterior_after_n(belief, [m], model)
        if abs(belief.mean - 0.7) <= 0.05:
            hits += 1
    wall = time.perf_counter() - t0
    frac = hits / n_seeds
    _report("C2 posterior drift (50 measurements within 0.05 of 0.7)",
            frac >= 0.95 and wall < 10.0,
            f"fraction within tolerance = {frac:.3f} (needs >= 0.95), wall {wall:.1f}s; "
            "expected shortfall from prior inertia is ~0.084 > 0.05, see decisions ledger")


# 3 ---------------------------------------------------------------------------

def test_c03_theorem1_property_on_enumerable_toy():
    t0 = time.perf_counter()
    toy = ToyClosedLoop(sigma=0.55, x_max=1.0, k_fb=1.2, u_max=1.5, three_point=True)
    T, dt, eps, gain = 5, 0.5, 0.1, 1.0
    n_ep, n_steps = 500, 25
    cands = np.linspace(-toy.u_max, toy.u_max, 5)

    x = np.zeros(n_ep)
    psi0 = exact_psi(toy, 0.0, 0.0, T, dt)
    assert psi0 > 1.0 - eps, "initial-condition premise"
    rng = derive_rng(3003, 1)
    infeasible_events = 0
    mean_trace, slack_trace = [], []
    for _ in range(n_steps):
        psi = exact_psi(toy, x, 0.0, T, dt)
        se = psi.std() / np.sqrt(n_ep)
        mean_trace.append(psi.mean())
        slack_trace.append(psi.mean() - (1.0 - eps) + 3.0 * se)
        expected = np.stack([exact_psi(toy, x, 0.0, T, dt, u0=np.full(n_ep, u))
                             for u in cands])
        margins = (expected - psi[None, :]) / dt + gain * (psi[None, :] - (1.0 - eps))
        feasible = margins >= 0.0
        infeasible_events += int((~feasible.any(axis=0)).sum())
        u_nom = np.clip(-toy.k_fb * x, -toy.u_max, toy.u_max)
        dev = np.abs(cands[:, None] - u_nom[None, :])
        choice = np.where(feasible.any(axis=0),
                          np.where(feasible, dev, np.inf).argmin(axis=0),
                          margins.argmax(axis=0))
        u = cands[choice]
        x = x + u * dt + toy.sigma * np.sqrt(dt) * three_point_map(rng.standard_normal(n_ep))
    wall = time.perf_counter() - t0
    ok = (infeasible_events == 0 and min(slack_trace) >= 0.0 and wall < 120.0)
    _report("C3 closed-loop certificate property on the enumerable toy", ok,
            f"psi0={psi0:.3f}, min mean Psi_k={min(mean_trace):.4f} "
            f"(bound 0.9 - 3SE), worst slack={min(slack_trace):+.4f}, "
            f"infeasible events={infeasible_events}, wall {wall:.1f}s (< 120s)")


# 4 ---------------------------------------------------------------------------

def test_c04_generator_decomposition_identity():
    t0 = time.perf_counter()
    params = VehicleParams()
    sc = icy_scenario()
    model = VehicleClosedLoop(params=params, road=sc.road(), noise=NoiseSpec(),
                              nominal_cfg=NominalControllerConfig(), e_max=3.0)
    horizon = SafetyHorizon(T=10, dt_eval=0.1)
    cfg = PSCConfig(epsilon=0.1, gamma_gain=1.0, dt=0.1, mc_samples=8,
                    mc_inner=4, mc_per_inner=2)
    rng = np.random.default_rng(4004)
    worst = 0.0
    for i in range(100):
        x = rolling_state(rng.uniform(4.0, 12.0), params.R_e,
                          s=rng.uniform(0.0, 200.0), e=rng.uniform(-2.5, 2.5),
                          v_y=rng.uniform(-0.5, 0.5), r=rng.uniform(-0.2, 0.2),
                          delta=rng.uniform(-0.1, 0.1)).to_array()
        b_k = GaussianBelief(rng.uniform(0.2, 0.9), rng.uniform(1e-4, 0.05))
        b_k1 = GaussianBelief(rng.uniform(0.2, 0.9), rng.uniform(1e-4, 0.05))
        u = np.array([rng.uniform(-0.5, 0.5), rng.uniform(-2000, 2000)])
        cert = evaluate_candidates(model, x, b_k, b_k1, u[None, :], horizon, cfg,
                                   seed=4004, tags=(i,))
        worst = max(worst, float(np.abs(cert.s_terms + cert.t_term - cert.gen_values).max()))
    wall = time.perf_counter() - t0
    _report("C4 generator decomposition identity (S + T = A)",
            worst <= 1e-14 and wall < 60.0,
            f"worst |S+T-A| = {worst:.2e} over 100 random states, wall {wall:.1f}s (< 60s)")


# 5 ---------------------------------------------------------------------------

def test_c05_horizon_robustness(tmp_path):
    t0 = time.perf_counter()
    rows = horizon_sweep([5, 10, 20], icy_scenario(), ["apsc-mpc", "ampc"],
                         tmp_path, seeds=20, base_seed=55, workers=WORKERS,
                         write_runs=False)
    wall = time.perf_counter() - t0
    safety = {(r["controller"], r["t_mpc"]): r["avg_min_safety"] for r in rows}
    wall_step = {(r["controller"], r["t_mpc"]): r["avg_wall_per_step_s"] for r in rows}
    apsc_ok = all(safety[("apsc-mpc", t)] >= 0.9 - 0.05 for t in (5, 10, 20))
    gap = safety[("apsc-mpc", 5)] - safety[("ampc", 5)]
    cost_grows = (wall_step[("apsc-mpc", 20)] > wall_step[("apsc-mpc", 5)]
                  and wall_step[("ampc", 20)] > wall_step[("ampc", 5)])
    ok = apsc_ok and gap >= 0.1 and wall < 1800.0 and cost_grows
    _report("C5 horizon robustness", ok,
            "APSC min-safety by T_mpc: " +
            ", ".join(f"T={t}: {safety[('apsc-mpc', t)]:.3f}" for t in (5, 10, 20)) +
            f"; AMPC@5 = {safety[('ampc', 5)]:.3f} (gap {gap:.3f} >= 0.1); "
            f"per-step cost grows with T: {cost_grows}; wall {wall/60:.1f} min (< 30)")


# 6 ---------------------------------------------------------------------------

def test_c06_nominal_vs_safe_and_adaptation_speed(tmp_path):
    t0 = time.perf_counter()
    icy = ExperimentGrid(runs_per_cell=10, base=icy_scenario())
    icy_summary = run_grid(icy, ["nominal", "apsc-filter"], tmp_path / "icy",
                           base_seed=66, workers=WORKERS, write_runs=False)
    dry = ExperimentGrid(runs_per_cell=10, base=dry_scenario())
    dry_summary = run_grid(dry, ["apsc-filter", "apsc-filter-frozen"], tmp_path / "dry",
                           base_seed=67, workers=WORKERS, write_runs=False)
    wall = time.perf_counter() - t0
    icy_m = next(iter(icy_summary["cells"].values()))["methods"]
    dry_m = next(iter(dry_summary["cells"].values()))["methods"]
    safety_gap = icy_m["apsc-filter"]["avg_min_safety"] - icy_m["nominal"]["avg_min_safety"]
    v_adaptive = dry_m["apsc-filter"]["avg_v_x"]
    v_frozen = dry_m["apsc-filter-frozen"]["avg_v_x"]
    ok = safety_gap >= 0.3 and v_adaptive > v_frozen and wall < 1200.0
    _report("C6 nominal-vs-safe and adaptive speed advantage", ok,
            f"icy min-safety: APSC {icy_m['apsc-filter']['avg_min_safety']:.3f} vs "
            f"nominal {icy_m['nominal']['avg_min_safety']:.3f} (gap {safety_gap:.3f} >= 0.3); "
            f"dry speed: adaptive {v_adaptive:.2f} > frozen {v_frozen:.2f} m/s; "
            f"wall {wall/60:.1f} min (< 20)")


# 7 ---------------------------------------------------------------------------

def test_c07_llm_preference_adaptation():
    results = run_llm_case(CASE_PREFERENCE, icy_scenario(), seeds=20, workers=WORKERS)
    means = case_means(results)
    run1, run2 = means[0], means[1]
    ok = (run2["lateral"] < run1["lateral"] and run2["speed"] < run1["speed"]
          and run1["safety"] >= 0.9 and run2["safety"] >= 0.9)
    _report("C7 guidance case (i): preference adaptation", ok,
            f"Lateral {run1['lateral']:.3f} -> {run2['lateral']:.3f} m, "
            f"Speed {run1['speed']:.3f} -> {run2['speed']:.3f} m/s, "
            f"Safety {run1['safety']:.3f} / {run2['safety']:.3f} (both >= 0.9)")


# 8 ---------------------------------------------------------------------------

def test_c08_llm_premise_correction():
    results = run_llm_case(CASE_WRONG_PREMISE, icy_scenario(), seeds=20, workers=WORKERS)
    means = case_means(results)
    run1, run2 = means[0], means[1]
    ok = (run2["prior"] <= run1["prior"] and run2["lateral"] <= run1["lateral"]
          and run1["safety"] >= 0.9 and run2["safety"] >= 0.9)
    _report("C8 guidance case (ii): correcting a wrong road premise", ok,
            f"Prior {run1['prior']:.2f} -> {run2['prior']:.2f}, "
            f"Lateral {run1['lateral']:.3f} -> {run2['lateral']:.3f} m, "
            f"Safety {run1['safety']:.3f} / {run2['safety']:.3f} (both >= 0.9)")


# 9 ---------------------------------------------------------------------------

def test_c09_schema_gate():
    accepted = 0
    for em, mu, s0, bs in itertools.product(ALLOWED_E_MAX, ALLOWED_MU_0,
                                            ALLOWED_SIGMA_0, ALLOWED_BAR_SIGMA):
        doc = {"e_max": em, "mu_0": mu, "sigma_0": s0, "bar_sigma": bs,
               "assumptions": {"style": "s", "road": "r", "speed_kmh": 40,
                               "lane_quality": "q"},
               "rationale": "x"}
        validate_executables(json.dumps(doc))
        accepted += 1

    from test_guidance import _fuzz_corpus
    rejected = 0
    diagnostics_ok = True
    for doc in _fuzz_corpus(200, seed=99):
        try:
            validate_executables(json.dumps(doc))
        except SchemaValidationError as e:
            rejected += 1
            diagnostics_ok &= all(i.field and i.problem for i in e.issues)
    ok = accepted == 36 and rejected == 200 and diagnostics_ok
    _report("C9 schema gate", ok,
            f"{accepted}/36 valid combinations accepted, "
            f"{rejected}/200 fuzz documents rejected with field-level diagnostics")


# 10 --------------------------------------------------------------------------

def test_c10_replay_determinism(tmp_path):
    checks = []
    for ctrl, dur in (("apsc-filter", 6.0), ("apsc-mpc", 8.0), ("nominal", 6.0)):
        log = run_episode(icy_scenario(duration_s=dur), ctrl, seed=1010)
        d = tmp_path / ctrl
        log.write(d)
        identical, _ = replay_run(d)
        checks.append((ctrl, identical))
    ok = all(c[1] for c in checks)
    _report("C10 replay determinism", ok,
            "byte-identical replays: " + ", ".join(f"{c}={v}" for c, v in checks))
