"""Multi-turn guidance sessions: plan, digest, and append-only history.

A session accumulates instructions, run digests and validated executables.
Each turn composes (system prompt, instruction history, last digest) for the
backend, parses the reply as strict JSON with bounded retries, and never
hands unvalidated executables downstream. Replaying the same instruction and
digest sequence against the deterministic mock reproduces the same
executables turn for turn.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..runlog import RunLog
from .backends import ChatBackend
from .prompts import JSON_ONLY_REMINDER, PromptBundle, compose_user_message
from .schema import GuidanceExecutables, SchemaValidationError, validate_executables


class GuidancePlanError(RuntimeError):
    """Backend kept returning malformed or out-of-schema output."""

    def __init__(self, attempts: int, last_error: SchemaValidationError):
        self.attempts = attempts
        self.last_error = last_error
        super().__init__(f"no valid executables after {attempts} attempts: {last_error}")


@dataclass
class SessionState:
    provider_id: str = "mock"
    prompts: PromptBundle = field(default_factory=PromptBundle)
    instructions: list[str] = field(default_factory=list)
    digests: list[dict] = field(default_factory=list)
    executables: list[GuidanceExecutables] = field(default_factory=list)
    rationales: list[str] = field(default_factory=list)

    @property
    def turn(self) -> int:
        return len(self.instructions)

    def record_turn(self, instruction: str, executables: GuidanceExecutables) -> None:
        self.instructions.append(instruction)
        self.executables.append(executables)
        self.rationales.append(executables.rationale)

    def record_digest(self, digest: dict) -> None:
        self.digests.append(digest)

    def to_dict(self) -> dict:
        return {
            "provider_id": self.provider_id,
            "prompt_version": self.prompts.version,
            "instructions": list(self.instructions),
            "digests": list(self.digests),
            "executables": [e.to_dict() for e in self.executables],
            "rationales": list(self.rationales),
        }

    @staticmethod
    def from_dict(d: dict) -> "SessionState":
        st = SessionState(provider_id=d.get("provider_id", "mock"))
        st.instructions = list(d.get("instructions", []))
        st.digests = list(d.get("digests", []))
        st.executables = [validate_executables(e) for e in d.get("executables", [])]
        st.rationales = list(d.get("rationales", []))
        return st


def llm_plan(session: SessionState, instruction: str, backend: ChatBackend,
             max_retries: int = 3, full_history: bool = False) -> tuple[str, GuidanceExecutables]:
    """One guidance turn: compose, query, validate; bounded malformed-retries.

    The first turn of a session uses the inference prompt with no run data;
    later turns use the reasoning prompt plus the latest run digest (all
    digests with full_history). The session itself is not mutated; callers
    append via record_turn after the run request is accepted.
    """
    first = session.turn == 0
    system = session.prompts.inference if first else session.prompts.reasoning
    if first or not session.digests:
        digests = []
    else:
        digests = list(session.digests) if full_history else [session.digests[-1]]
    user = compose_user_message(session.instructions + [instruction], digests)
    messages = [{"role": "user", "content": user}]
    last_err: SchemaValidationError | None = None
    for attempt in range(1 + max_retries):
        text = backend.complete(system, messages)
        try:
            ex = validate_executables(text)
            return ex.rationale, ex
        except SchemaValidationError as e:
            last_err = e
            messages.append({"role": "assistant", "content": text})
            messages.append({"role": "user", "content": JSON_ONLY_REMINDER})
    raise GuidancePlanError(1 + max_retries, last_err)


def digest_run(log: RunLog) -> dict:
    """Quantitative feedback block data for the next reasoning turn.

    All values recompute directly from the logged rows; an empty run is an
    error rather than a fabricated digest.
    """
    if not log.rows:
        raise ValueError("cannot digest a run with no executed steps")
    abs_e = np.array([abs(r.state[10]) for r in log.rows])
    v_x = np.array([r.state[0] for r in log.rows])
    est = log.scenario_dict["estimator"]
    last = log.rows[-1]
    executables = log.scenario_dict.get("guidance_executables")
    return {
        "lateral_mean": float(abs_e.mean()),
        "lateral_std": float(abs_e.std()),
        "speed_mean": float(v_x.mean()),
        "speed_std": float(v_x.std()),
        "safety": float(log.metrics.empirical_safety),
        "prior_mean": float(est["prior_mean"]),
        "prior_std": float(np.sqrt(est["prior_var"])),
        "posterior_mean": float(last.belief_mean),
        "posterior_std": float(np.sqrt(last.belief_var)),
        "executables_json": json.dumps(executables, sort_keys=True) if executables else "{}",
    }


def apply_executables(base, executables: GuidanceExecutables):
    """Scenario configured by a guidance turn.

    e_max feeds the safe set, mu_0/sigma_0 the friction prior, bar_sigma the
    measurement model; the executables themselves are recorded on the
    scenario so run digests can echo them back to the next turn.
    """
    from ..scenario import EstimatorSpec
    est = EstimatorSpec(
        prior_mean=executables.mu_0,
        prior_var=executables.sigma_0 ** 2,
        meas_var=executables.bar_sigma ** 2,
        clamp=base.estimator.clamp,
        cadence=base.estimator.cadence,
    )
    return base.with_updates(e_max=executables.e_max, estimator=est,
                             guidance_executables=executables.to_dict())


def save_transcript(session: SessionState, path: str | Path) -> None:
    Path(path).write_text(json.dumps(session.to_dict(), indent=2, sort_keys=True))


def load_transcript(path: str | Path) -> SessionState:
    return SessionState.from_dict(json.loads(Path(path).read_text()))
