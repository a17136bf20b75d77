"""Scenario files: everything a reproducible episode needs, as plain data.

A scenario bundles road geometry, parameter overrides, noise scales, the
initial state, the (possibly randomized) true friction, safe-set and
estimator settings, and the certificate / MPC configurations. Scenarios
serialize to YAML for the CLI and to a canonical JSON form whose SHA-256
identifies the run for replay.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import yaml

from .control.mpc import MPCConfig
from .control.nominal import NominalControllerConfig
from .safety.generator import PSCConfig
from .vehicle.dynamics import NoiseSpec
from .vehicle.params import VehicleParams
from .vehicle.road import RoadProfile
from .vehicle.state import VehicleState, rolling_state

# Unknown-friction classes: uniform draw ranges by road condition.
FRICTION_CLASSES = {
    "icy": (0.3, 0.4),
    "icy-wide": (0.2, 0.4),
    "wet": (0.5, 0.6),
    "wet-wide": (0.4, 0.7),
    "dry": (0.8, 0.9),
    "dry-wide": (0.7, 0.9),
}


@dataclass(frozen=True)
class FrictionSpec:
    """Fixed value or a named/explicit uniform range drawn per seed."""
    kind: str = "class"          # "fixed" | "class"
    value: float = 0.35          # used when kind == "fixed"
    name: str = "icy"            # class name when kind == "class"

    def __post_init__(self):
        if self.kind not in ("fixed", "class"):
            raise ValueError(f"unknown friction kind {self.kind!r}")
        if self.kind == "class" and self.name not in FRICTION_CLASSES:
            raise ValueError(f"unknown friction class {self.name!r}")
        if self.kind == "fixed" and not (0.0 < self.value):
            raise ValueError("fixed friction must be positive")

    def draw(self, rng) -> float:
        if self.kind == "fixed":
            return float(self.value)
        lo, hi = FRICTION_CLASSES[self.name]
        return float(lo + (hi - lo) * rng.random())


@dataclass(frozen=True)
class EstimatorSpec:
    prior_mean: float = 0.3
    prior_var: float = 0.01
    meas_var: float = 0.1
    clamp: tuple[float, float] = (0.05, 1.2)
    cadence: int = 1             # measurements every this many control steps

    def __post_init__(self):
        if self.prior_var <= 0 or self.meas_var <= 0:
            raise ValueError("variances must be positive")
        if self.cadence < 1:
            raise ValueError("cadence must be at least 1")


@dataclass(frozen=True)
class Scenario:
    road_segments: tuple[tuple[float, float], ...] = ((60.0, 0.0), (120.0, 0.02), (60.0, 0.0))
    e_bound: float = 5.0
    params_overrides: dict = field(default_factory=dict)
    noise: tuple[float, float, float] = (0.05, 0.05, 0.01)
    initial: dict = field(default_factory=dict)       # VehicleState field overrides
    friction: FrictionSpec = FrictionSpec()
    duration_s: float = 40.0
    e_max: float = 3.0
    estimator: EstimatorSpec = EstimatorSpec()
    psc: PSCConfig = PSCConfig()
    mpc: MPCConfig = MPCConfig()
    nominal: NominalControllerConfig = NominalControllerConfig()
    horizon_T: int = 75
    horizon_dt: float = 0.1
    # Set when a guidance turn configured this scenario; recorded for digests.
    guidance_executables: dict | None = None

    def road(self) -> RoadProfile:
        return RoadProfile(segments=tuple(tuple(s) for s in self.road_segments),
                           e_bound=self.e_bound)

    def params(self) -> VehicleParams:
        return VehicleParams(**self.params_overrides)

    def noise_spec(self) -> NoiseSpec:
        return NoiseSpec(v_x=self.noise[0], v_y=self.noise[1], r=self.noise[2])

    def initial_state(self) -> VehicleState:
        p = self.params()
        v0 = float(self.initial.get("v_x", 20.0 / 3.6))
        extras = {k: float(v) for k, v in self.initial.items() if k != "v_x"}
        return rolling_state(v0, p.R_e, **extras)

    def with_updates(self, **kw) -> "Scenario":
        return replace(self, **kw)

    # serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        d = asdict(self)
        d["road_segments"] = [list(seg) for seg in self.road_segments]
        d["noise"] = list(self.noise)
        d["friction"] = asdict(self.friction)
        d["estimator"] = asdict(self.estimator)
        d["estimator"]["clamp"] = list(self.estimator.clamp)
        d["psc"] = asdict(self.psc)
        d["psc"]["candidate_d_delta"] = list(self.psc.candidate_d_delta)
        d["psc"]["candidate_d_tau"] = list(self.psc.candidate_d_tau)
        d["mpc"] = asdict(self.mpc)
        d["nominal"] = asdict(self.nominal)
        d["nominal"]["K_lateral"] = list(self.nominal.K_lateral)
        return d

    @staticmethod
    def from_dict(d: dict) -> "Scenario":
        d = dict(d)
        if "road_segments" in d:
            d["road_segments"] = tuple(tuple(float(x) for x in seg) for seg in d["road_segments"])
        if "noise" in d:
            d["noise"] = tuple(float(x) for x in d["noise"])
        if "friction" in d and isinstance(d["friction"], dict):
            d["friction"] = FrictionSpec(**d["friction"])
        if "estimator" in d and isinstance(d["estimator"], dict):
            est = dict(d["estimator"])
            if "clamp" in est:
                est["clamp"] = tuple(float(x) for x in est["clamp"])
            d["estimator"] = EstimatorSpec(**est)
        if "psc" in d and isinstance(d["psc"], dict):
            psc = dict(d["psc"])
            for key in ("candidate_d_delta", "candidate_d_tau"):
                if key in psc:
                    psc[key] = tuple(float(x) for x in psc[key])
            d["psc"] = PSCConfig(**psc)
        if "mpc" in d and isinstance(d["mpc"], dict):
            d["mpc"] = MPCConfig(**d["mpc"])
        if "nominal" in d and isinstance(d["nominal"], dict):
            nom = dict(d["nominal"])
            if "K_lateral" in nom:
                nom["K_lateral"] = tuple(float(x) for x in nom["K_lateral"])
            d["nominal"] = NominalControllerConfig(**nom)
        return Scenario(**d)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def content_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    def to_yaml(self, path: str | Path) -> None:
        Path(path).write_text(yaml.safe_dump(self.to_dict(), sort_keys=True))

    @staticmethod
    def from_yaml(path: str | Path) -> "Scenario":
        return Scenario.from_dict(yaml.safe_load(Path(path).read_text()))


def icy_scenario(**kw) -> Scenario:
    return Scenario(friction=FrictionSpec(kind="class", name="icy")).with_updates(**kw)


def dry_scenario(**kw) -> Scenario:
    return Scenario(friction=FrictionSpec(kind="class", name="dry")).with_updates(**kw)


def wet_scenario(**kw) -> Scenario:
    return Scenario(friction=FrictionSpec(kind="class", name="wet")).with_updates(**kw)
