"""Enumerable 1-D test system: drift-controlled random walk in a band.

    X_{t+1} = X_t + (u_t + xi) dt + sigma sqrt(dt) W_t,   safe iff |X| <= x_max

with the reference policy u = clip(-k_fb X, -u_max, u_max) and xi an unknown
drift bias. The process noise W can be standard normal or a three-point
discretization (+-sqrt(3) with probability 1/6 each, 0 with probability 2/3;
matches mean, variance and kurtosis). With three-point noise the safety
probability is computable exactly by enumerating the outcome tree, which is
what makes this system the ground-truth oracle for the Monte Carlo
estimator, the generator, and the closed-loop certificate property.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT3 = float(np.sqrt(3.0))
# Phi^{-1}(1/6); quantile map from standard normal to the three-point law.
_Q16 = -0.9674215661017014
_TP_VALUES = np.array([-SQRT3, 0.0, SQRT3])
_TP_PROBS = np.array([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0])


def three_point_map(z: np.ndarray) -> np.ndarray:
    """Map standard normals to the three-point noise by quantiles."""
    return np.where(z < _Q16, -SQRT3, np.where(z > -_Q16, SQRT3, 0.0))


@dataclass(frozen=True)
class ToyClosedLoop:
    """ClosedLoopModel binding for the 1-D system."""
    sigma: float = 0.2
    x_max: float = 1.0
    k_fb: float = 1.5
    u_max: float = 1.0
    three_point: bool = False
    n_state: int = 1
    n_noise: int = 1

    def policy(self, x: np.ndarray) -> np.ndarray:
        return np.clip(-self.k_fb * x, -self.u_max, self.u_max)

    def _noise(self, z: np.ndarray) -> np.ndarray:
        return three_point_map(z) if self.three_point else z

    def rollout_safe(self, x0: np.ndarray, xi: np.ndarray, T: int, dt: float,
                     z: np.ndarray, u0: np.ndarray | None = None,
                     dt_first: float | None = None) -> np.ndarray:
        B = z.shape[0]
        x0 = np.asarray(x0, dtype=float)
        x = (np.full(B, float(x0.ravel()[0])) if x0.size == 1 else x0.reshape(B, -1)[:, 0].copy())
        xi = np.broadcast_to(np.asarray(xi, dtype=float), (B,))
        sq = self.sigma * np.sqrt(dt)
        safe = np.ones(B, dtype=bool)
        toff = 0
        if u0 is not None:
            dt0 = dt if dt_first is None else float(dt_first)
            u0 = np.asarray(u0, dtype=float).reshape(B, -1)[:, 0]
            x = x + (u0 + xi) * dt0 + self.sigma * np.sqrt(dt0) * self._noise(z[:, 0, 0])
            toff = 1
        safe &= np.abs(x) <= self.x_max
        for t in range(T):
            u = self.policy(x)
            x = x + (u + xi) * dt + sq * self._noise(z[:, t + toff, 0])
            safe &= np.abs(x) <= self.x_max
        return safe

    def sample_xi(self, mean: float, std: float, z: np.ndarray) -> np.ndarray:
        return mean + std * np.asarray(z, dtype=float)


def _noise_paths(stages: int):
    """All three-point noise sequences of the given length with probabilities."""
    n = 3 ** stages
    digits = (np.arange(n)[:, None] // (3 ** np.arange(stages))[None, :]) % 3
    return _TP_VALUES[digits], _TP_PROBS[digits].prod(axis=1)


def exact_psi(model: ToyClosedLoop, x0, xi: float, T: int, dt: float,
              u0=None) -> np.ndarray:
    """Exact safety probability under three-point noise by tree enumeration.

    x0 may be a scalar or an (N,) batch; u0, when given, is the first-step
    input (scalar or (N,)) and shifts the law to E[Psi(X') | x0, u0] exactly
    as in the Monte Carlo rollouts. Cost grows as 3**T; meant for short
    horizons.
    """
    x0s = np.atleast_1d(np.asarray(x0, dtype=float))
    N = x0s.size
    stages = T + (1 if u0 is not None else 0)
    w, probs = _noise_paths(stages)          # (P, stages), (P,)
    P = w.shape[0]
    x = np.broadcast_to(x0s, (P, N)).copy()
    safe = np.ones((P, N), dtype=bool)
    sq = model.sigma * np.sqrt(dt)
    t0 = 0
    if u0 is not None:
        u0s = np.broadcast_to(np.asarray(u0, dtype=float), (N,))
        x += (u0s[None, :] + xi) * dt + sq * w[:, 0][:, None]
        t0 = 1
    safe &= np.abs(x) <= model.x_max
    for t in range(t0, stages):
        u = model.policy(x)
        x += (u + xi) * dt + sq * w[:, t][:, None]
        safe &= np.abs(x) <= model.x_max
    out = (probs[:, None] * safe).sum(axis=0)
    return out if np.ndim(x0) else float(out[0])
