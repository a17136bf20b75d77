"""Lateral-error safe set and the long-term safety indicator."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..vehicle.state import VehicleState


@dataclass(frozen=True)
class SafeSetSpec:
    e_max: float = 3.0   # allowable |lateral error| (m)

    def __post_init__(self):
        if not (self.e_max > 0):
            raise ValueError("e_max must be positive")


def phi(state: VehicleState | float, spec: SafeSetSpec) -> float:
    """Safe-set function 1 - (e / e_max)^2; nonnegative inside the lane band."""
    e = state.e if isinstance(state, VehicleState) else float(state)
    return 1.0 - (e / spec.e_max) ** 2


def phi_batch(e: np.ndarray, spec: SafeSetSpec) -> np.ndarray:
    return 1.0 - (np.asarray(e, dtype=float) / spec.e_max) ** 2


def long_term_safe(trajectory: Iterable[VehicleState], spec: SafeSetSpec) -> int:
    """1 iff phi >= 0 at every state of the trajectory."""
    states = list(trajectory)
    if not states:
        raise ValueError("trajectory must be nonempty")
    return int(all(phi(st, spec) >= 0.0 for st in states))
