"""Chat backends: one HTTP client for OpenAI-compatible providers and a
deterministic keyword-rule mock that implements the same interface.

The mock exists so every test and offline session exercises the full
plan-validate-run loop without a network; it applies the documented policies
(style words set the lane tolerance, road words set the friction prior,
hedging widens the prior, sensing complaints widen the measurement model,
and on reasoning turns the prior aligns with the last run's posterior).
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from typing import Protocol

from .prompts import FEEDBACK_HEADER, USER_HEADER

AGGRESSIVE_WORDS = ("aggressive", "sporty", "fast", "quick", "spirited", "push it")
CONSERVATIVE_WORDS = ("conservative", "careful", "cautious", "smooth", "gentle", "precise")
ICY_WORDS = ("icy", "ice", "snow", "snowy", "frozen", "black ice")
WET_WORDS = ("wet", "rain", "rainy", "damp", "drizzle")
DRY_WORDS = ("dry", "normal road", "clear road")
HEDGE_WORDS = ("seems", "maybe", "not sure", "probably", "unsure", "might be",
               "possibly", "i think", "no idea")
SENSING_WORDS = ("fog", "foggy", "glare", "low light", "visibility", "sensor",
                 "camera", "lidar")


class ChatBackend(Protocol):
    name: str

    def complete(self, system_prompt: str, messages: list[dict]) -> str: ...


class BackendError(RuntimeError):
    pass


@dataclass
class HttpChatBackend:
    """Minimal chat-completions client; endpoint and key from the environment.

    GUIDANCE_API_URL   base URL (e.g. https://api.openai.com/v1)
    GUIDANCE_API_KEY   bearer token
    GUIDANCE_MODEL     model identifier
    """
    model: str | None = None
    base_url: str | None = None
    timeout_s: float = 60.0

    @property
    def name(self) -> str:
        return f"http:{self.model or os.environ.get('GUIDANCE_MODEL', '?')}"

    def complete(self, system_prompt: str, messages: list[dict]) -> str:
        import httpx

        base = self.base_url or os.environ.get("GUIDANCE_API_URL")
        key = os.environ.get("GUIDANCE_API_KEY")
        model = self.model or os.environ.get("GUIDANCE_MODEL")
        if not base or not model:
            raise BackendError("GUIDANCE_API_URL and GUIDANCE_MODEL must be set")
        payload = {
            "model": model,
            "messages": [{"role": "system", "content": system_prompt}] + messages,
            "temperature": 0.0,
        }
        headers = {"Authorization": f"Bearer {key}"} if key else {}
        try:
            resp = httpx.post(f"{base.rstrip('/')}/chat/completions", json=payload,
                              headers=headers, timeout=self.timeout_s)
            resp.raise_for_status()
            return resp.json()["choices"][0]["message"]["content"]
        except httpx.HTTPError as e:
            raise BackendError(f"provider transport error: {e}") from e
        except (KeyError, IndexError, ValueError) as e:
            raise BackendError(f"malformed provider response: {e}") from e


def _contains(text: str, words) -> bool:
    return any(w in text for w in words)


def posterior_class(mean: float) -> float:
    """Map a posterior friction mean to the nearest prior class value."""
    if mean <= 0.45:
        return 0.3
    if mean <= 0.7:
        return 0.5
    return 0.9


@dataclass
class MockBackend:
    """Deterministic rule-based stand-in for a provider."""
    name: str = "mock"

    def complete(self, system_prompt: str, messages: list[dict]) -> str:
        content = "\n".join(m["content"] for m in messages if m["role"] == "user")
        instruction = content.split(USER_HEADER)[-1].strip().lower()
        digest_present = FEEDBACK_HEADER in content

        posterior = None
        prev_e_max = None
        if digest_present:
            # Use the most recent feedback block when a full history is sent.
            m = re.findall(r"Posterior:\s*([-\d.]+)", content)
            posterior = float(m[-1]) if m else None
            m = re.findall(r'"e_max":\s*([\d.]+)', content)
            prev_e_max = float(m[-1]) if m else None

        if _contains(instruction, AGGRESSIVE_WORDS):
            e_max, style = 10, "aggressive"
        elif _contains(instruction, CONSERVATIVE_WORDS):
            e_max, style = 3, "conservative"
        elif prev_e_max is not None:
            e_max, style = int(prev_e_max), "unchanged"
        else:
            e_max, style = 5, "neutral"

        if _contains(instruction, ICY_WORDS):
            stated_road, stated_mu = "icy", 0.3
        elif _contains(instruction, WET_WORDS):
            stated_road, stated_mu = "wet", 0.5
        elif _contains(instruction, DRY_WORDS):
            stated_road, stated_mu = "dry", 0.9
        else:
            stated_road, stated_mu = "unspecified", 0.5

        hedged = _contains(instruction, HEDGE_WORDS)
        notes = [f"style={style}", f"stated road={stated_road}"]
        if digest_present and posterior is not None:
            mu_0 = posterior_class(posterior)
            notes.append(f"aligned prior with posterior {posterior:.2f}")
            if mu_0 != stated_mu and stated_road != "unspecified":
                sigma_0 = 0.3
                notes.append("user road premise contradicts the data; widened prior")
            elif hedged:
                sigma_0 = 0.3
                notes.append("user hedged; widened prior")
            else:
                sigma_0 = 0.05
        else:
            mu_0 = stated_mu
            sigma_0 = 0.3 if hedged else 0.05
            if hedged:
                notes.append("user hedged; widened prior")

        bar_sigma = 0.3 if _contains(instruction, SENSING_WORDS) else 0.05
        if bar_sigma == 0.3:
            notes.append("sensing problems mentioned; degraded measurement trust")

        doc = {
            "e_max": e_max,
            "mu_0": mu_0,
            "sigma_0": sigma_0,
            "bar_sigma": bar_sigma,
            "assumptions": {"style": style, "road": stated_road,
                            "speed_kmh": 40, "lane_quality": "standard"},
            "rationale": "; ".join(notes),
        }
        return json.dumps(doc, sort_keys=True)


@dataclass
class BrokenBackend:
    """Always returns non-JSON; exercises the retry-then-fail path in tests."""
    name: str = "broken"
    reply: str = "Sorry, here are your parameters: e_max is three."

    def complete(self, system_prompt: str, messages: list[dict]) -> str:
        return self.reply
