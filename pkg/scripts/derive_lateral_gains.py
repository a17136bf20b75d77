#!/usr/bin/env python3
"""Derive the lateral feedback gains shipped in psclab.control.nominal.

Discrete LQR on the linearized bicycle model at the reference speed, states
[v_y, r, delta, e, psi], input d_delta. Cornering stiffness per axle comes
from the small-slip limit of the LuGre tire law, where the force coefficient
tends to (sigma_0y / kappa_y + sigma_2y v) F_z per wheel.

Run: python3 scripts/derive_lateral_gains.py
The printed K_lqr must match nominal.LQR_GAINS (control law u = -K x).
"""

import numpy as np
from scipy.linalg import expm, solve_discrete_are

M_VEH, I_Z, L_F, L_R = 1430.0, 2059.0, 1.05, 1.61
F_Z = 1430.0 * 9.8 / 4.0
SIGMA_0Y, KAPPA_Y, SIGMA_2Y = 195.0, 13.4, 0.001
V_REF = 40.0 / 3.6
DT = 0.1
Q = np.diag([0.0, 0.0, 0.0, 10.0, 14.0])
R = np.array([[1.0]])


def bicycle(v: float):
    C = 2.0 * (SIGMA_0Y / KAPPA_Y + SIGMA_2Y * v) * F_Z  # per axle
    A = np.array([
        [-2.0 * C / (M_VEH * v), -v + (L_R * C - L_F * C) / (M_VEH * v), C / M_VEH, 0.0, 0.0],
        [(L_R * C - L_F * C) / (I_Z * v), -(L_F ** 2 * C + L_R ** 2 * C) / (I_Z * v), L_F * C / I_Z, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0, v],
        [0.0, 1.0, 0.0, 0.0, 0.0],
    ])
    B = np.array([[0.0], [0.0], [1.0], [0.0], [0.0]])
    return A, B


def discretize(A, B, dt):
    M = np.zeros((6, 6))
    M[:5, :5] = A * dt
    M[:5, 5:] = B * dt
    Md = expm(M)
    return Md[:5, :5], Md[:5, 5:]


def main():
    Ad, Bd = discretize(*bicycle(V_REF), DT)
    P = solve_discrete_are(Ad, Bd, Q, R)
    K = np.linalg.solve(R + Bd.T @ P @ Bd, Bd.T @ P @ Ad)[0]
    print("K_lqr     =", np.round(K, 6))
    print("K_lateral =", np.round(-K, 6), "(shipped; u = K_lateral . (x - x_ff))")
    ev = np.abs(np.linalg.eigvals(Ad - Bd @ K[None, :]))
    print("closed-loop |eigs| at V_ref:", np.round(ev, 4))
    for v in (4.0, 14.0):
        Ad2, Bd2 = discretize(*bicycle(v), DT)
        ev2 = np.abs(np.linalg.eigvals(Ad2 - Bd2 @ K[None, :]))
        print(f"off-design v={v:4.1f} m/s: max |eig| = {ev2.max():.4f}")


if __name__ == "__main__":
    main()
