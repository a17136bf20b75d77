"""Vehicle dynamics drift and the stochastic integrator.

The drift combines the 3-DOF force/moment balance, linear wheel dynamics with
an equal quarter-torque split, rate integrators for steering and torque, and
road-coordinate kinematics. Additive Gaussian noise acts on the (v_x, v_y, r)
channels, scaled per sqrt(second).

Integrator: Euler-Maruyama substeps, with an exponential (phi1) correction on
the genuinely damped channels. The wheel-speed dynamics are stiff (a
linearized relaxation rate of a few hundred 1/s at highway speed), so a plain
explicit update diverges at practical substep sizes; the phi1 factor applies
the exact decay of the locally linearized channel and degrades gracefully to
explicit Euler where the dynamics are slow. v_y and r get the same treatment
(tire side force is physical damping, stiff at low speed); v_x does not,
because its apparent stiffness is cancelled by the wheels tracking the body
and damping it would bias the driveline response. Batches step as (B, 12)
arrays; rows that leave numeric validity (v_x below the floor, non-finite
entries) are frozen and reported dead rather than raising.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import VehicleParams
from .road import RoadProfile
from .state import ControlInput, VehicleState
from .tires import tire_forces_batch

NOISE_CHANNELS = ("v_x", "v_y", "r")
N_NOISE = 3


@dataclass(frozen=True)
class NoiseSpec:
    """Diffusion scales (units of the channel per sqrt(s)) and a default seed."""
    v_x: float = 0.05
    v_y: float = 0.05
    r: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if min(self.v_x, self.v_y, self.r) < 0:
            raise ValueError("noise scales must be nonnegative")

    def scales(self) -> np.ndarray:
        return np.array([self.v_x, self.v_y, self.r], dtype=float)


# Columns with force-driven (potentially stiff) dynamics: v_x, v_y, r, wheels.
_STIFF_VEL = slice(0, 3)
_STIFF_WHEEL = slice(4, 8)


def _phi1_neg(z: np.ndarray) -> np.ndarray:
    """(exp(z) - 1) / z for z <= 0; equals 1 at z = 0 (exponential-Euler weight)."""
    zm = np.minimum(z, -1e-12)
    return np.expm1(zm) / zm


def drift_batch(x: np.ndarray, u: np.ndarray, mu, road: RoadProfile, params: VehicleParams,
                h_wheel_avg: float | None = None):
    """Drift dx/dt for a batch, plus nonpositive per-channel decay estimates.

    x: (B, 12); u: (B, 2) or (2,); mu: (B,) or scalar.
    Returns (dx (B, 12), lam (B, 7)) where lam holds local diagonal
    linearization rates of the force-driven channels (v_x, v_y, r, 4 wheels)
    used by the stabilized integrator.

    With h_wheel_avg set, the body equations use the substep time-average of
    each wheel's longitudinal force under its locally affine relaxation
    (phi1-weighted blend of the instantaneous force and the torque-balance
    force tau/(4 R_e)). The wheel speeds are far stiffer than the substep, so
    the instantaneous force persists for only a sliver of the step; without
    the average the driveline response comes out visibly weak. The wheel
    equations themselves keep the instantaneous force (their exponential
    update integrates the relaxation exactly).
    """
    B = x.shape[0]
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = np.broadcast_to(u, (B, 2))
    F_L, F_S, kx, ky = tire_forces_batch(x, mu, params)

    v_x, v_y, r, delta = x[:, 0], x[:, 1], x[:, 2], x[:, 3]
    tau = x[:, 8]
    s, psi = x[:, 9], x[:, 11]
    cosd, sind = np.cos(delta), np.sin(delta)

    lam_w = -(params.R_e ** 2 / params.I_omega) * kx
    if h_wheel_avg is None:
        F_Lb = F_L
    else:
        w = _phi1_neg(lam_w * h_wheel_avg)
        F_Lb = w * F_L + (1.0 - w) * (0.25 / params.R_e) * tau[:, None]

    FLf = F_Lb[:, 0] + F_Lb[:, 1]
    FLr = F_Lb[:, 2] + F_Lb[:, 3]
    FSf = F_S[:, 0] + F_S[:, 1]
    FSr = F_S[:, 2] + F_S[:, 3]

    half_W = 0.5 * params.W
    dx = np.empty_like(x)
    dx[:, 0] = v_y * r + (FLf * cosd - FSf * sind + FLr) / params.m
    dx[:, 1] = -v_x * r + (FSf * cosd + FLf * sind + FSr) / params.m
    dx[:, 2] = (
        params.l_f * (FSf * cosd + FLf * sind)
        - params.l_r * FSr
        + half_W * (-F_Lb[:, 2] + F_Lb[:, 3])
        + half_W * ((-F_Lb[:, 0] + F_Lb[:, 1]) * cosd + (F_S[:, 0] - F_S[:, 1]) * sind)
    ) / params.I_z
    dx[:, 3] = u[:, 0]
    dx[:, 4:8] = (-params.R_e * F_L + 0.25 * tau[:, None]) / params.I_omega
    dx[:, 8] = u[:, 1]
    cpsi, spsi = np.cos(psi), np.sin(psi)
    dx[:, 9] = v_x * cpsi - v_y * spsi
    dx[:, 10] = v_y * cpsi + v_x * spsi
    dx[:, 11] = r - v_x * road.curvature(s)

    lam = np.empty((B, 7), dtype=float)
    lam[:, 0] = 0.0  # momentum channel: apparent stiffness cancelled by wheels
    lam[:, 1] = -ky.sum(axis=1) / params.m
    lam[:, 2] = -(
        (ky[:, 0] + ky[:, 1]) * params.l_f ** 2 + (ky[:, 2] + ky[:, 3]) * params.l_r ** 2
    ) / params.I_z
    lam[:, 3:7] = lam_w
    return dx, lam


def derivative(state: VehicleState, inp: ControlInput, params: VehicleParams,
               mu: float, road: RoadProfile) -> np.ndarray:
    """Exact drift of the 12-dimensional state (no noise, no stabilization)."""
    if state.v_x <= 0:
        raise ValueError(f"drift needs v_x > 0, got {state.v_x}")
    if mu <= 0:
        raise ValueError(f"friction coefficient must be positive, got {mu}")
    dx, _ = drift_batch(state.to_array()[None, :], inp.to_array(), mu, road, params)
    return dx[0]


def step_batch(x: np.ndarray, u: np.ndarray, mu, road: RoadProfile,
               params: VehicleParams, dt: float, substeps: int = 1,
               noise_scales: np.ndarray | None = None,
               z: np.ndarray | None = None,
               alive: np.ndarray | None = None):
    """Advance a batch one control interval of length dt.

    z holds pre-drawn standard normals of shape (substeps, B, 3) (ignored if
    noise_scales is None). Rows not alive on entry are returned unchanged;
    rows that die during the step are frozen at their last valid value.
    Returns (x_next, alive_next); never raises on numeric failure.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    B = x.shape[0]
    if alive is None:
        alive = np.ones(B, dtype=bool)
    x_prev = x
    x = np.array(x, dtype=float)
    h = dt / substeps
    sqrth = np.sqrt(h)
    for k in range(substeps):
        dx, lam = drift_batch(x, u, mu, road, params, h_wheel_avg=h)
        w = _phi1_neg(lam * h)
        w *= h
        x[:, _STIFF_VEL] += w[:, 0:3] * dx[:, _STIFF_VEL]
        x[:, _STIFF_WHEEL] += w[:, 3:7] * dx[:, _STIFF_WHEEL]
        x[:, 3] += h * dx[:, 3]
        x[:, 8:] += h * dx[:, 8:]
        if noise_scales is not None and z is not None:
            x[:, :3] += z[k] * (noise_scales * sqrth)
    with np.errstate(invalid="ignore"):
        ok = np.isfinite(x).all(axis=1) & (x[:, 0] >= params.v_min)
    alive_next = alive & ok
    dead = ~alive_next
    if dead.any():
        x[dead] = x_prev[dead]  # freeze at last valid value
    return x, alive_next


def step(state: VehicleState, inp: ControlInput, params: VehicleParams, mu: float,
         road: RoadProfile, noise: NoiseSpec, dt: float,
         rng: np.random.Generator | None = None, substeps: int = 4):
    """Single-state Euler-Maruyama step.

    Returns (next_state, ok). ok=False flags terminal numeric failure
    (speed floor crossed or non-finite state); the returned state is then the
    last valid one.
    """
    if rng is None:
        rng = np.random.default_rng(noise.seed)
    scales = noise.scales()
    z = rng.standard_normal((substeps, 1, N_NOISE)) if scales.any() else None
    x, alive = step_batch(
        state.to_array()[None, :], inp.to_array(), mu, road, params,
        dt=dt, substeps=substeps,
        noise_scales=scales if z is not None else None, z=z,
    )
    return VehicleState.from_array(x[0]), bool(alive[0])
