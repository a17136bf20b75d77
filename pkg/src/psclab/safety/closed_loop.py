"""Closed-loop rollout models used by the safety-probability estimator.

The Monte Carlo machinery is generic over a small model contract
(``ClosedLoopModel``): given a batch of start states, per-rollout parameter
draws and pre-drawn standard normals, roll the closed loop under the
reference policy and report which rollouts stayed safe the whole way. The
vehicle binding fuses dynamics, tire model, nominal policy and the safe-set
check into one compiled kernel; rollouts are the inner loop of every
certificate evaluation and dominate runtime. A plain-numpy reference path
(`rollout_safe_reference`) computes the same thing step by step and pins the
kernel down in tests.

Rollout semantics: a rollout is safe iff the lateral error stays within
e_max at every checked state and the state stays numerically valid (v_x at
or above the floor, all entries finite). Leaving numeric validity counts as
unsafe from that point on. When a first input is supplied, the first step
applies it and checking starts at the propagated state (the law of
E[Psi(X_{k+1}) | X_k, U_k]); otherwise checking starts at the initial state
(the law of Psi(X_k) itself).
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass
from typing import Protocol

import numpy as np

# The workqueue layer is fork-safe, which the experiment process pool needs;
# the TBB/OpenMP layers are not (and the TBB probe warns on this image).
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from numba import njit, prange

from typing import TYPE_CHECKING

from ..vehicle.dynamics import NoiseSpec, step_batch
from ..vehicle.params import VehicleParams
from ..vehicle.road import RoadProfile

if TYPE_CHECKING:
    from ..control.nominal import NominalControllerConfig

# Parameter vector layout for the compiled kernels.
_P_FIELDS = ("m", "R_e", "I_z", "I_omega", "l_f", "l_r", "W", "V_s",
             "sigma_0x", "sigma_2x", "kappa_x", "sigma_0y", "sigma_2y",
             "kappa_y", "mu_s", "mu_c", "F_z", "v_min")


def _params_vector(params: VehicleParams) -> np.ndarray:
    return np.array([getattr(params, f) for f in _P_FIELDS], dtype=float)


def _gains_vector(cfg: "NominalControllerConfig", params: VehicleParams) -> np.ndarray:
    return np.array(list(cfg.K_lateral) + [cfg.K_v, cfg.K_T, cfg.V_ref,
                                           params.d_delta_max, params.d_tau_max], dtype=float)


@njit(cache=True, inline="always")
def _rho_at(s, breaks, rhos):
    sm = s if s > 0.0 else 0.0
    n = breaks.shape[0]
    for i in range(n):
        if sm < breaks[i]:
            return rhos[i]
    return rhos[n]


@njit(cache=True, inline="always")
def _wheel_force(vxd, alpha, w, mu, p):
    """Per-wheel (F_L, F_S, kx) from the LuGre combined-slip law."""
    vrx = p[1] * w - vxd
    vry = vxd * alpha
    vn = np.hypot(vrx, vry)
    g = p[15] + (p[14] - p[15]) * np.exp(-np.sqrt(vn / p[7]))
    mug = mu * g
    rew = p[1] * abs(w)
    denx = p[8] * vn / mug + p[10] * rew + 1e-30
    deny = p[11] * vn / mug + p[13] * rew + 1e-30
    kx = (p[8] / denx + p[9]) * p[16]
    ky = (p[11] / deny + p[12]) * p[16]
    return kx * vrx, ky * vry, kx, ky


@njit(cache=True, inline="always")
def _phi1s(z):
    zm = min(z, -1e-12)
    return np.expm1(zm) / zm


@njit(cache=True, inline="always")
def _substep(vx, vy, r, de, w0, w1, w2, w3, tau, s, e, psi, ud, ut, mu, h, p, breaks, rhos):
    vxd = max(vx, 0.01)
    af = de - (vy + p[4] * r) / vxd
    ar = -(vy - p[5] * r) / vxd
    FL0, FS0, kx0, ky0 = _wheel_force(vxd, af, w0, mu, p)
    FL1, FS1, kx1, ky1 = _wheel_force(vxd, af, w1, mu, p)
    FL2, FS2, kx2, ky2 = _wheel_force(vxd, ar, w2, mu, p)
    FL3, FS3, kx3, ky3 = _wheel_force(vxd, ar, w3, mu, p)
    cosd = np.cos(de)
    sind = np.sin(de)
    cw = p[1] * p[1] / p[3]
    wphi0 = _phi1s(-cw * kx0 * h)
    wphi1 = _phi1s(-cw * kx1 * h)
    wphi2 = _phi1s(-cw * kx2 * h)
    wphi3 = _phi1s(-cw * kx3 * h)

    # Body equations take the substep-averaged wheel force (phi1 blend with
    # the torque-balance force); wheel equations keep the instantaneous one.
    fbal = 0.25 * tau / p[1]
    FLb0 = wphi0 * FL0 + (1.0 - wphi0) * fbal
    FLb1 = wphi1 * FL1 + (1.0 - wphi1) * fbal
    FLb2 = wphi2 * FL2 + (1.0 - wphi2) * fbal
    FLb3 = wphi3 * FL3 + (1.0 - wphi3) * fbal

    FLf = FLb0 + FLb1
    FLr = FLb2 + FLb3
    FSf = FS0 + FS1
    FSr = FS2 + FS3
    half_W = 0.5 * p[6]

    dvx = vy * r + (FLf * cosd - FSf * sind + FLr) / p[0]
    dvy = -vx * r + (FSf * cosd + FLf * sind + FSr) / p[0]
    dr = (p[4] * (FSf * cosd + FLf * sind) - p[5] * FSr
          + half_W * (-FLb2 + FLb3)
          + half_W * ((-FLb0 + FLb1) * cosd + (FS0 - FS1) * sind)) / p[2]
    quarter = 0.25 * tau
    dw0 = (-p[1] * FL0 + quarter) / p[3]
    dw1 = (-p[1] * FL1 + quarter) / p[3]
    dw2 = (-p[1] * FL2 + quarter) / p[3]
    dw3 = (-p[1] * FL3 + quarter) / p[3]
    cpsi = np.cos(psi)
    spsi = np.sin(psi)

    # Pose derivatives use the pre-update state, like the reference path.
    ds = vx * cpsi - vy * spsi
    dse = vy * cpsi + vx * spsi
    dpsi = r - vx * _rho_at(s, breaks, rhos)

    lam_vy = -(ky0 + ky1 + ky2 + ky3) / p[0]
    lam_r = -((ky0 + ky1) * p[4] * p[4] + (ky2 + ky3) * p[5] * p[5]) / p[2]

    vx += h * dvx
    vy += h * _phi1s(lam_vy * h) * dvy
    r += h * _phi1s(lam_r * h) * dr
    de += h * ud
    w0 += h * wphi0 * dw0
    w1 += h * wphi1 * dw1
    w2 += h * wphi2 * dw2
    w3 += h * wphi3 * dw3
    tau += h * ut
    s += h * ds
    e += h * dse
    psi += h * dpsi
    return vx, vy, r, de, w0, w1, w2, w3, tau, s, e, psi


@njit(cache=True, parallel=True)
def _rollout_safe_kernel(x0, xi, T, dt, substeps, z, scales, use_u0, u0,
                         dt0, substeps0, breaks, rhos, e_max, p, gains):
    B = x0.shape[0]
    out = np.empty(B, dtype=np.uint8)
    h = dt / substeps
    sq_dt = np.sqrt(dt)
    h0 = dt0 / substeps0
    sq_dt0 = np.sqrt(dt0)
    vmin = p[17]
    for b in prange(B):
        vx = x0[b, 0]; vy = x0[b, 1]; r = x0[b, 2]; de = x0[b, 3]
        w0 = x0[b, 4]; w1 = x0[b, 5]; w2 = x0[b, 6]; w3 = x0[b, 7]
        tau = x0[b, 8]; s = x0[b, 9]; e = x0[b, 10]; psi = x0[b, 11]
        mu = xi[b]
        safe = True
        toff = 0
        if use_u0:
            ud = u0[b, 0]; ut = u0[b, 1]
            for _ in range(substeps0):
                vx, vy, r, de, w0, w1, w2, w3, tau, s, e, psi = _substep(
                    vx, vy, r, de, w0, w1, w2, w3, tau, s, e, psi,
                    ud, ut, mu, h0, p, breaks, rhos)
            vx += z[b, 0, 0] * scales[0] * sq_dt0
            vy += z[b, 0, 1] * scales[1] * sq_dt0
            r += z[b, 0, 2] * scales[2] * sq_dt0
            toff = 1
        if not (abs(e) <= e_max and vx >= vmin):
            safe = False
        if safe:
            for t in range(T):
                rho = _rho_at(s, breaks, rhos)
                ud = gains[0] * vy + gains[1] * (r - vx * rho) + gains[2] * de \
                    + gains[3] * e + gains[4] * psi
                if ud > gains[8]:
                    ud = gains[8]
                elif ud < -gains[8]:
                    ud = -gains[8]
                ut = -gains[5] * (vx - gains[7]) - gains[6] * tau
                if ut > gains[9]:
                    ut = gains[9]
                elif ut < -gains[9]:
                    ut = -gains[9]
                for _ in range(substeps):
                    vx, vy, r, de, w0, w1, w2, w3, tau, s, e, psi = _substep(
                        vx, vy, r, de, w0, w1, w2, w3, tau, s, e, psi,
                        ud, ut, mu, h, p, breaks, rhos)
                vx += z[b, t + toff, 0] * scales[0] * sq_dt
                vy += z[b, t + toff, 1] * scales[1] * sq_dt
                r += z[b, t + toff, 2] * scales[2] * sq_dt
                if not (abs(e) <= e_max and vx >= vmin):
                    safe = False
                    break
        out[b] = 1 if safe else 0
    return out


@njit(cache=True, parallel=True)
def _mpc_cost_kernel(x0, seqs, T_mpc, dt, substeps, mu_hat,
                     breaks, rhos, p, vref, w_speed, w_e, w_psi):
    C = seqs.shape[0]
    Hc = seqs.shape[1]
    out = np.empty(C, dtype=np.float64)
    h = dt / substeps
    vmin = p[17]
    for c in prange(C):
        vx = x0[0]; vy = x0[1]; r = x0[2]; de = x0[3]
        w0 = x0[4]; w1 = x0[5]; w2 = x0[6]; w3 = x0[7]
        tau = x0[8]; s = x0[9]; e = x0[10]; psi = x0[11]
        cost = 0.0
        for t in range(T_mpc):
            ti = t if t < Hc else Hc - 1
            ud = seqs[c, ti, 0]
            ut = seqs[c, ti, 1]
            for _ in range(substeps):
                vx, vy, r, de, w0, w1, w2, w3, tau, s, e, psi = _substep(
                    vx, vy, r, de, w0, w1, w2, w3, tau, s, e, psi,
                    ud, ut, mu_hat, h, p, breaks, rhos)
            if not (vx >= vmin and np.isfinite(e)):
                cost = 1e18
                break
            dv = vx - vref
            cost += w_speed * dv * dv + w_e * e * e + w_psi * psi * psi
        out[c] = cost
    return out


class ClosedLoopModel(Protocol):
    """What the safety estimator needs from a system."""
    n_state: int
    n_noise: int

    def rollout_safe(self, x0: np.ndarray, xi: np.ndarray, T: int, dt: float,
                     z: np.ndarray, u0: np.ndarray | None,
                     dt_first: float | None = None) -> np.ndarray: ...

    def sample_xi(self, mean: float, std: float, z: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class VehicleClosedLoop:
    """Vehicle plant + nominal policy + lateral-error safe set."""
    params: VehicleParams
    road: RoadProfile
    noise: NoiseSpec
    nominal_cfg: "NominalControllerConfig"
    e_max: float
    xi_clamp: tuple[float, float] = (0.05, 1.2)
    substeps: int = 1
    n_state: int = 12
    n_noise: int = 3

    def _static(self):
        return (_params_vector(self.params), _gains_vector(self.nominal_cfg, self.params),
                self.road._breaks, self.road._rhos, self.noise.scales())

    def rollout_safe(self, x0: np.ndarray, xi: np.ndarray, T: int, dt: float,
                     z: np.ndarray, u0: np.ndarray | None = None,
                     dt_first: float | None = None) -> np.ndarray:
        p, gains, breaks, rhos, scales = self._static()
        B = x0.shape[0] if x0.ndim == 2 else z.shape[0]
        if x0.ndim == 1:
            x0 = np.broadcast_to(x0, (B, 12))
        use_u0 = u0 is not None
        if u0 is None:
            u0 = np.zeros((B, 2))
        elif u0.ndim == 1:
            u0 = np.broadcast_to(u0, (B, 2))
        dt0 = dt if dt_first is None else float(dt_first)
        substeps0 = max(self.substeps, int(round(dt0 / dt)) * self.substeps)
        out = _rollout_safe_kernel(
            np.ascontiguousarray(x0), np.ascontiguousarray(xi, dtype=float),
            T, dt, self.substeps, z, scales, use_u0,
            np.ascontiguousarray(u0, dtype=float), dt0, substeps0, breaks, rhos,
            float(self.e_max), p, gains)
        return out.astype(bool)

    def sample_xi(self, mean: float, std: float, z: np.ndarray) -> np.ndarray:
        lo, hi = self.xi_clamp
        return np.clip(mean + std * z, lo, hi)

    def mpc_costs(self, x0: np.ndarray, seqs: np.ndarray, T_mpc: int, dt: float,
                  mu_hat: float, weights: tuple[float, float, float],
                  substeps: int = 2) -> np.ndarray:
        p, gains, breaks, rhos, _ = self._static()
        return _mpc_cost_kernel(
            np.ascontiguousarray(x0, dtype=float), np.ascontiguousarray(seqs, dtype=float),
            T_mpc, dt, substeps, float(mu_hat), breaks, rhos, p,
            gains[7], weights[0], weights[1], weights[2])


def rollout_safe_reference(model: VehicleClosedLoop, x0: np.ndarray, xi: np.ndarray,
                           T: int, dt: float, z: np.ndarray,
                           u0: np.ndarray | None = None,
                           dt_first: float | None = None) -> np.ndarray:
    """Step-by-step numpy evaluation of the same rollout law; test oracle."""
    from ..control.nominal import nominal_batch
    B = z.shape[0]
    x = np.broadcast_to(x0, (B, 12)).copy() if x0.ndim == 1 else x0.copy()
    scales = model.noise.scales()
    alive = np.ones(B, dtype=bool)
    safe = np.ones(B, dtype=bool)
    toff = 0
    if u0 is not None:
        dt0 = dt if dt_first is None else float(dt_first)
        substeps0 = max(model.substeps, int(round(dt0 / dt)) * model.substeps)
        x, alive = step_batch(x, u0, xi, model.road, model.params, dt0,
                              substeps=substeps0, alive=alive)
        x[alive, :3] += z[alive, 0, :] * scales * np.sqrt(dt0)
        toff = 1
    safe &= alive & (np.abs(x[:, 10]) <= model.e_max) & (x[:, 0] >= model.params.v_min)
    for t in range(T):
        u = nominal_batch(x, model.road, model.nominal_cfg, model.params)
        x, alive = step_batch(x, u, xi, model.road, model.params, dt,
                              substeps=model.substeps, alive=alive)
        x[alive, :3] += z[alive, t + toff, :] * scales * np.sqrt(dt)
        safe &= alive & (np.abs(x[:, 10]) <= model.e_max)
    return safe
