"""Batch multi-turn guidance cases: preference adaptation and premise
correction, run across seeds with the deterministic mock backend.

Each seed executes a fresh two-turn session: plan from the instruction,
apply the executables to the base scenario, run the episode, digest it, and
feed the digest to the next turn. Seeds run in a small process pool; the
turns within one seed are inherently sequential.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..control.episode import run_episode
from ..guidance.backends import MockBackend
from ..guidance.session import SessionState, apply_executables, digest_run, llm_plan
from ..scenario import Scenario
from .grid import _pool_init

# Instruction pairs for the two studied cases.
CASE_PREFERENCE = (
    "The roads are icy today, but give me a fast, aggressive ride.",
    "Please drive much more carefully and smoothly now.",
)
CASE_WRONG_PREMISE = (
    "The road looks dry today, drive normally.",
    "Still looks dry to me, drive normally again.",
)


def _turn_seed(base_seed: int, turn: int, paired: bool = True) -> int:
    """Episode seed per turn; paired sessions reuse one seed across turns so
    the two runs face the same friction draw and process noise (common
    random numbers make the run-to-run differences the signal)."""
    tag = 0 if paired else turn
    digest = hashlib.sha256(f"llm/{base_seed}/{tag}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


def _session_job(args) -> list[dict]:
    scenario_dict, instructions, controller, base_seed, mc_samples = args
    base = Scenario.from_dict(scenario_dict)
    backend = MockBackend()
    session = SessionState()
    rows = []
    for turn, instruction in enumerate(instructions):
        rationale, ex = llm_plan(session, instruction, backend)
        sc = apply_executables(base, ex)
        log = run_episode(sc, controller, _turn_seed(base_seed, turn),
                          mc_samples=mc_samples)
        digest = digest_run(log)
        session.record_turn(instruction, ex)
        session.record_digest(digest)
        rows.append({
            "seed": base_seed, "turn": turn, "instruction": instruction,
            "rationale": rationale, "executables": ex.to_dict(),
            "lateral_mean": digest["lateral_mean"], "lateral_std": digest["lateral_std"],
            "speed_mean": digest["speed_mean"], "speed_std": digest["speed_std"],
            "safety": digest["safety"],
            "prior_mean": digest["prior_mean"], "posterior_mean": digest["posterior_mean"],
            "min_safety_prob": log.metrics.min_safety_prob,
            "terminal_unsafe": log.metrics.terminal_unsafe,
        })
    return rows


def run_llm_case(instructions, base: Scenario, seeds: int = 20,
                 controller: str = "apsc-filter", workers: int | None = 2,
                 mc_samples: int | None = None) -> list[list[dict]]:
    """All sessions for one case; returns per-seed lists of per-turn rows."""
    jobs = [(base.to_dict(), tuple(instructions), controller, s, mc_samples)
            for s in range(seeds)]
    if workers is None or workers <= 1 or len(jobs) == 1:
        return [_session_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers, initializer=_pool_init) as pool:
        return list(pool.map(_session_job, jobs))


def case_means(results: list[list[dict]]) -> list[dict]:
    """Across-seed means per turn: Lateral, Speed, Safety, Prior, Posterior."""
    n_turns = len(results[0])
    out = []
    for t in range(n_turns):
        rows = [r[t] for r in results]
        out.append({
            "turn": t,
            "lateral": float(np.mean([r["lateral_mean"] for r in rows])),
            "speed": float(np.mean([r["speed_mean"] for r in rows])),
            "safety": float(np.mean([r["safety"] for r in rows])),
            "prior": float(np.mean([r["prior_mean"] for r in rows])),
            "posterior": float(np.mean([r["posterior_mean"] for r in rows])),
            "min_safety_prob": float(np.mean([r["min_safety_prob"] for r in rows])),
        })
    return out
