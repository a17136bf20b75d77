"""LuGre combined-slip tire model.

Conventions (wheel order fl, fr, rl, rr everywhere):

    alpha_front = delta - (v_y + l_f r) / v_x
    alpha_rear  =       - (v_y - l_r r) / v_x
    lambda      = (R_e w - v_x) / max(R_e w, v_x)
    v_rx = R_e w - v_x,  v_ry = v_x alpha,  |v_r| = hypot(v_rx, v_ry)
    g(|v_r|) = mu_c + (mu_s - mu_c) exp(-sqrt(|v_r| / V_s))
    F_L = (sigma_0x / (sigma_0x |v_r| / (mu g) + kappa_x R_e |w|) + sigma_2x) v_rx F_z
    F_S = (sigma_0y / (sigma_0y |v_r| / (mu g) + kappa_y R_e |w|) + sigma_2y) v_ry F_z

Forces vanish exactly when the relative velocity is zero. A stationary wheel
with zero relative velocity (denominator 0/0) is resolved to zero force.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import VehicleParams
from .state import VehicleState

WHEELS = ("fl", "fr", "rl", "rr")


@dataclass(frozen=True)
class SlipQuantities:
    alpha: np.ndarray   # (4,) slip angles (rad)
    lam: np.ndarray     # (4,) slip ratios
    v_rx: np.ndarray    # (4,) longitudinal relative velocity (m/s)
    v_ry: np.ndarray    # (4,) lateral relative velocity (m/s)


@dataclass(frozen=True)
class TireForces:
    F_L: np.ndarray     # (4,) longitudinal force per wheel (N)
    F_S: np.ndarray     # (4,) side force per wheel (N)


def slip_quantities(state: VehicleState, params: VehicleParams) -> SlipQuantities:
    if state.v_x <= 0:
        raise ValueError(f"slip quantities need v_x > 0, got {state.v_x}")
    omega = np.array([state.omega_fl, state.omega_fr, state.omega_rl, state.omega_rr])
    alpha_f = state.delta - (state.v_y + params.l_f * state.r) / state.v_x
    alpha_r = -(state.v_y - params.l_r * state.r) / state.v_x
    alpha = np.array([alpha_f, alpha_f, alpha_r, alpha_r])
    re_w = params.R_e * omega
    lam = (re_w - state.v_x) / np.maximum(re_w, state.v_x)
    v_rx = re_w - state.v_x
    v_ry = state.v_x * alpha
    return SlipQuantities(alpha=alpha, lam=lam, v_rx=v_rx, v_ry=v_ry)


def stribeck(v_r_norm, params: VehicleParams, mu: float | None = None):
    """Velocity-dependent friction interpolation in [mu_c, mu_s].

    The mu argument is accepted for call-site symmetry with the force
    functions but does not enter the curve.
    """
    v = np.asarray(v_r_norm, dtype=float)
    if np.any(v < 0):
        raise ValueError("relative speed must be nonnegative")
    g = params.mu_c + (params.mu_s - params.mu_c) * np.exp(-np.sqrt(v / params.V_s))
    return float(g) if np.isscalar(v_r_norm) else g


def lugre_forces(state: VehicleState, params: VehicleParams, mu: float) -> TireForces:
    if mu <= 0:
        raise ValueError(f"friction coefficient must be positive, got {mu}")
    sq = slip_quantities(state, params)
    omega = np.array([state.omega_fl, state.omega_fr, state.omega_rl, state.omega_rr])
    F_L, F_S = _forces_from_slip(sq.v_rx, sq.v_ry, omega, mu, params)
    return TireForces(F_L=F_L, F_S=F_S)


def _force_coefficients(v_rx, v_ry, omega, mu, params: VehicleParams):
    """Per-wheel force coefficients k (N per m/s): F_L = kx v_rx, F_S = ky v_ry.

    The coefficients double as local stiffness estimates for the stabilized
    integrator (dF/dv at the current operating point, saturation ignored).
    """
    v_norm = np.hypot(v_rx, v_ry)
    g = params.mu_c + (params.mu_s - params.mu_c) * np.exp(-np.sqrt(v_norm / params.V_s))
    mug = mu * g
    re_w_abs = params.R_e * np.abs(omega)
    # The 1e-30 guard covers the 0/0 corner (v_norm == 0 and omega == 0),
    # where the force is zero regardless because v_rx = v_ry = 0.
    den_x = params.sigma_0x * v_norm / mug + params.kappa_x * re_w_abs + 1e-30
    den_y = params.sigma_0y * v_norm / mug + params.kappa_y * re_w_abs + 1e-30
    kx = (params.sigma_0x / den_x + params.sigma_2x) * params.F_z
    ky = (params.sigma_0y / den_y + params.sigma_2y) * params.F_z
    return kx, ky


def _forces_from_slip(v_rx, v_ry, omega, mu, params: VehicleParams):
    kx, ky = _force_coefficients(v_rx, v_ry, omega, mu, params)
    return kx * v_rx, ky * v_ry


def slip_batch(x: np.ndarray, params: VehicleParams):
    """Per-wheel (v_rx, v_ry, omega) for a batch of states x of shape (B, 12).

    Divisions use v_x floored at 1 cm/s; rows at or below the speed floor are
    invalid and get frozen by the integrator anyway.
    """
    v_x = np.maximum(x[:, 0], 0.01)
    v_y = x[:, 1]
    r = x[:, 2]
    delta = x[:, 3]
    omega = x[:, 4:8]
    alpha_f = delta - (v_y + params.l_f * r) / v_x
    alpha_r = -(v_y - params.l_r * r) / v_x
    alpha = np.empty_like(omega)
    alpha[:, 0] = alpha_f
    alpha[:, 1] = alpha_f
    alpha[:, 2] = alpha_r
    alpha[:, 3] = alpha_r
    v_rx = params.R_e * omega - v_x[:, None]
    v_ry = v_x[:, None] * alpha
    return v_rx, v_ry, omega


def tire_forces_batch(x: np.ndarray, mu, params: VehicleParams):
    """Per-wheel forces and stiffness coefficients for a batch of states.

    x is (B, 12), mu is (B,) or scalar. Returns (F_L, F_S, kx, ky), each
    of shape (B, 4).
    """
    v_rx, v_ry, omega = slip_batch(x, params)
    mu_col = np.asarray(mu, dtype=float)
    if mu_col.ndim == 1:
        mu_col = mu_col[:, None]
    kx, ky = _force_coefficients(v_rx, v_ry, omega, mu_col, params)
    return kx * v_rx, ky * v_ry, kx, ky
