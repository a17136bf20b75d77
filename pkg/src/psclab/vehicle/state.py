"""State and input records for the 3-DOF vehicle in road coordinates.

State layout (index order is the array layout used everywhere):

    0  v_x     longitudinal velocity (m/s)
    1  v_y     lateral velocity (m/s)
    2  r       yaw rate (rad/s)
    3  delta   steering angle (rad)
    4  omega_fl, 5 omega_fr, 6 omega_rl, 7 omega_rr
               wheel angular velocities (rad/s)
    8  tau_e   drive/brake torque (N m)
    9  s       distance along road (m)
    10 e       lateral error from centerline (m)
    11 psi     heading error (rad)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STATE_DIM = 12
STATE_FIELDS = (
    "v_x", "v_y", "r", "delta",
    "omega_fl", "omega_fr", "omega_rl", "omega_rr",
    "tau_e", "s", "e", "psi",
)

# Column indices, importable where raw arrays are manipulated.
IV_X, IV_Y, IR, IDELTA = 0, 1, 2, 3
IOMEGA = slice(4, 8)
ITAU, IS, IE, IPSI = 8, 9, 10, 11


@dataclass(frozen=True)
class VehicleState:
    v_x: float
    v_y: float = 0.0
    r: float = 0.0
    delta: float = 0.0
    omega_fl: float = 0.0
    omega_fr: float = 0.0
    omega_rl: float = 0.0
    omega_rr: float = 0.0
    tau_e: float = 0.0
    s: float = 0.0
    e: float = 0.0
    psi: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in STATE_FIELDS], dtype=float)

    @staticmethod
    def from_array(x: np.ndarray) -> "VehicleState":
        x = np.asarray(x, dtype=float)
        if x.shape != (STATE_DIM,):
            raise ValueError(f"expected shape ({STATE_DIM},), got {x.shape}")
        return VehicleState(*(float(v) for v in x))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.to_array())))


def rolling_state(v_x: float, params_R_e: float, **kw) -> VehicleState:
    """State at speed v_x with wheels rolling without slip."""
    w = v_x / params_R_e
    base = dict(v_x=v_x, omega_fl=w, omega_fr=w, omega_rl=w, omega_rr=w)
    base.update(kw)
    return VehicleState(**base)


@dataclass(frozen=True)
class ControlInput:
    d_delta: float = 0.0   # steering rate (rad/s)
    d_tau_e: float = 0.0   # torque rate (N m/s)

    def to_array(self) -> np.ndarray:
        return np.array([self.d_delta, self.d_tau_e], dtype=float)

    @staticmethod
    def from_array(u: np.ndarray) -> "ControlInput":
        return ControlInput(float(u[0]), float(u[1]))

    def clamped(self, d_delta_max: float, d_tau_max: float) -> "ControlInput":
        return ControlInput(
            float(np.clip(self.d_delta, -d_delta_max, d_delta_max)),
            float(np.clip(self.d_tau_e, -d_tau_max, d_tau_max)),
        )
