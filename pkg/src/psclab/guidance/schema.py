"""Strict schema for the controller executables produced per guidance turn.

The record carries exactly four numeric knobs, each restricted to a small
discrete set, plus an assumptions block and a free-text rationale:

    e_max     in {3, 5, 10}     lane-error tolerance (m)
    mu_0      in {0.3, 0.5, 0.9}  friction prior mean
    sigma_0   in {0.05, 0.3}    friction prior standard deviation
    bar_sigma in {0.05, 0.3}    measurement noise standard deviation

Validation is strict JSON: required keys only, no extras, membership checks
on every discrete field, with one diagnostic per offending field.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

ALLOWED_E_MAX = (3.0, 5.0, 10.0)
ALLOWED_MU_0 = (0.3, 0.5, 0.9)
ALLOWED_SIGMA_0 = (0.05, 0.3)
ALLOWED_BAR_SIGMA = (0.05, 0.3)

_TOP_KEYS = ("e_max", "mu_0", "sigma_0", "bar_sigma", "assumptions", "rationale")
_ASSUMPTION_KEYS = ("style", "road", "speed_kmh", "lane_quality")


@dataclass(frozen=True)
class ValidationIssue:
    field: str
    problem: str

    def __str__(self):
        return f"{self.field}: {self.problem}"


class SchemaValidationError(ValueError):
    def __init__(self, issues: list[ValidationIssue]):
        self.issues = issues
        super().__init__("; ".join(str(i) for i in issues))


@dataclass(frozen=True)
class Assumptions:
    style: str = ""
    road: str = ""
    speed_kmh: float = 0.0
    lane_quality: str = ""


@dataclass(frozen=True)
class GuidanceExecutables:
    e_max: float
    mu_0: float
    sigma_0: float
    bar_sigma: float
    assumptions: Assumptions
    rationale: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["assumptions"] = asdict(self.assumptions)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _in_set(v: float, allowed) -> bool:
    return any(abs(v - a) < 1e-12 for a in allowed)


def validate_executables(raw: str | bytes | dict) -> GuidanceExecutables:
    """Parse and validate a strict-JSON executables document.

    Accepts raw JSON text (or an already-parsed dict) and returns the typed
    record; raises SchemaValidationError carrying one issue per bad field.
    """
    issues: list[ValidationIssue] = []
    if isinstance(raw, (str, bytes)):
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as e:
            raise SchemaValidationError([ValidationIssue("$", f"not valid JSON: {e.msg}")])
    else:
        doc = raw
    if not isinstance(doc, dict):
        raise SchemaValidationError([ValidationIssue("$", "top level must be a JSON object")])

    for key in _TOP_KEYS:
        if key not in doc:
            issues.append(ValidationIssue(key, "missing key"))
    for key in doc:
        if key not in _TOP_KEYS:
            issues.append(ValidationIssue(key, "unknown key"))

    def numeric(key, allowed):
        if key not in doc:
            return None
        v = doc[key]
        if not _is_number(v):
            issues.append(ValidationIssue(key, f"type mismatch: expected number, got {type(v).__name__}"))
            return None
        if not _in_set(float(v), allowed):
            issues.append(ValidationIssue(
                key, f"out-of-set value {v!r}; allowed {sorted(set(allowed))}"))
            return None
        return float(v)

    e_max = numeric("e_max", ALLOWED_E_MAX)
    mu_0 = numeric("mu_0", ALLOWED_MU_0)
    sigma_0 = numeric("sigma_0", ALLOWED_SIGMA_0)
    bar_sigma = numeric("bar_sigma", ALLOWED_BAR_SIGMA)

    rationale = doc.get("rationale")
    if "rationale" in doc and not isinstance(rationale, str):
        issues.append(ValidationIssue("rationale", "type mismatch: expected string"))

    assumptions = None
    if "assumptions" in doc:
        a = doc["assumptions"]
        if not isinstance(a, dict):
            issues.append(ValidationIssue("assumptions", "type mismatch: expected object"))
        else:
            for key in _ASSUMPTION_KEYS:
                if key not in a:
                    issues.append(ValidationIssue(f"assumptions.{key}", "missing key"))
            for key in a:
                if key not in _ASSUMPTION_KEYS:
                    issues.append(ValidationIssue(f"assumptions.{key}", "unknown key"))
            for key in ("style", "road", "lane_quality"):
                if key in a and not isinstance(a[key], str):
                    issues.append(ValidationIssue(f"assumptions.{key}",
                                                  "type mismatch: expected string"))
            if "speed_kmh" in a and not _is_number(a["speed_kmh"]):
                issues.append(ValidationIssue("assumptions.speed_kmh",
                                              "type mismatch: expected number"))
            if not issues:
                assumptions = Assumptions(style=a["style"], road=a["road"],
                                          speed_kmh=float(a["speed_kmh"]),
                                          lane_quality=a["lane_quality"])

    if issues:
        raise SchemaValidationError(issues)
    return GuidanceExecutables(e_max=e_max, mu_0=mu_0, sigma_0=sigma_0,
                               bar_sigma=bar_sigma, assumptions=assumptions,
                               rationale=rationale)
