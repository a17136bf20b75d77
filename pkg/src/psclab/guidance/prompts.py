"""System prompts for the two guidance roles and the feedback block template.

Prompts are immutable per session and versioned; changing their wording is a
version bump so stored transcripts stay interpretable.
"""

from __future__ import annotations

from dataclasses import dataclass

_SHAPE = ('{"e_max":0,"mu_0":0.0,"sigma_0":0.0,"bar_sigma":0.0,'
          '"assumptions":{"style":"","road":"","speed_kmh":0,"lane_quality":""},'
          '"rationale":""}')

INFERENCE_SYSTEM_PROMPT = (
    "You are an expert inferring initial controller priors from a short user preference."
    " Return STRICT JSON with keys: e_max, mu_0, sigma_0, bar_sigma, assumptions, rationale."
    " Meanings:"
    " - e_max: maximum lane tracking error tolerance. Larger for more aggressive turns/risk;"
    " smaller for more conservative/precise."
    " - mu_0: initial prior for road-tire friction (icy small, normal medium, dry large)."
    " - sigma_0: uncertainty (std^2) of the friction prior; larger if the user sounds unsure"
    " or contradictory."
    " - bar_sigma: confidence of the estimator on its measurements; increase if not sure if"
    " estimator is good."
    " Policy:"
    ' - If the user uses vague words ("seems", "maybe", "not sure", "probably"), pick the most'
    " likely road class they stated,"
    " - Only change e_max with explicit user cues."
    " Valid discrete ranges:"
    " - e_max in {3,5,10}; mu_0 in {0.3,0.5,0.9}; sigma_0 in {0.05,0.3}; bar_sigma in {0.05,0.3}."
    " Output ONLY JSON in this exact shape: " + _SHAPE +
    " Ensure values are from the allowed sets and remember these are initial priors, not ground truth."
)

REASONING_SYSTEM_PROMPT = (
    "Based on both quantitative feedback and qualitative user feedback, infer new reasonable"
    " parameters. Return STRICT JSON with keys: e_max, mu_0, sigma_0, bar_sigma, assumptions,"
    " rationale.\n"
    " Meanings:"
    " - e_max: maximum lane tracking error tolerance. Larger for more aggressive turns/risk;"
    " smaller for more conservative/precise."
    " - mu_0: initial prior for road-tire friction (icy small, normal medium, dry large)."
    " - sigma_0: uncertainty (std^2) of the friction prior; larger if the user sounds unsure"
    " or contradictory."
    " - bar_sigma: confidence of the estimator on its measurements; increase if not sure if"
    " estimator is good. You should try to trust the estimator."
    " Policy:"
    ' - If the user uses vague words ("seems", "maybe", "not sure", "probably"), pick the most'
    " likely road class they stated,"
    " - Only change e_max with explicit user cues."
    " Valid discrete ranges:"
    " - e_max in {3,5,10}; mu_0 in {0.3,0.5,0.9}; sigma_0 in {0.05,0.3}; bar_sigma in {0.05,0.3}."
    " - Keep bar_sigma=0.05. Only set bar_sigma=0.3 if the text explicitly mentions"
    " sensing/visibility problems (fog/rain/snow/glare/low light/sensor fault) and explain why.\n"
    " - Keep sigma_0=0.05 and align mu_0 with previous estimation. Set sigma_0=0.3 and different"
    ' mu_0 only if (a) the user hedges about the ROAD ("seems/maybe/not sure/probably"), or'
    " (b) the user statement contradicts quantitative feedback suggesting a different friction"
    " class; explain the uncertainty.\n"
    " Output ONLY JSON in this exact shape: " + _SHAPE +
    " Ensure values are from the allowed sets and remember these are initial priors, not ground truth.\n"
)

FEEDBACK_HEADER = "=== Quantitative feedback from the last run ==="
HISTORY_HEADER = "=== Instruction history ==="
USER_HEADER = "=== User feedback ==="

JSON_ONLY_REMINDER = ("Return ONLY the JSON object in the exact required shape, "
                      "with values from the allowed sets. No prose.")


@dataclass(frozen=True)
class PromptBundle:
    inference: str = INFERENCE_SYSTEM_PROMPT
    reasoning: str = REASONING_SYSTEM_PROMPT
    version: str = "1"


def feedback_block(digest: dict) -> str:
    """Quantitative feedback section rendered from a run digest dict."""
    lines = [
        FEEDBACK_HEADER,
        f"Lateral: {digest['lateral_mean']:.3f} +- {digest['lateral_std']:.3f} m",
        f"Speed: {digest['speed_mean']:.3f} +- {digest['speed_std']:.3f} m/s",
        f"Safety: {100.0 * digest['safety']:.1f}%",
        f"Prior: {digest['prior_mean']:.3f} +- {digest['prior_std']:.3f}",
        f"Posterior: {digest['posterior_mean']:.3f} +- {digest['posterior_std']:.3f}",
        f"Last executables: {digest['executables_json']}",
    ]
    return "\n".join(lines)


def compose_user_message(instructions: list[str], digests: list[dict] | dict | None) -> str:
    """User content per turn: prior instructions, run digests, new ask."""
    if digests is None:
        digests = []
    elif isinstance(digests, dict):
        digests = [digests]
    parts = []
    if len(instructions) > 1:
        hist = [f"{i + 1}. {text}" for i, text in enumerate(instructions[:-1])]
        parts.append(HISTORY_HEADER + "\n" + "\n".join(hist))
    for digest in digests:
        parts.append(feedback_block(digest))
    parts.append(USER_HEADER + "\n" + instructions[-1])
    return "\n".join(parts)
