"""Discrete-time generator of the safety probability and the certificate test.

The generator under a candidate input u and belief transition H_k -> H_{k+1}:

    A(u) = ( E[Psi_{H_{k+1}}(X_{k+1}) | X_k, u] - Psi_{H_k}(X_k) ) / dt

It splits into a state-prediction part and a belief-update part:

    S(u) = ( E[Psi_{H_{k+1}}(X_{k+1}) | X_k, u] - Psi_{H_{k+1}}(X_k) ) / dt
    T    = ( Psi_{H_{k+1}}(X_k) - Psi_{H_k}(X_k) ) / dt

with A = S + T when all three use the same rollout draws, which is how this
module evaluates them. The certificate admits u iff

    A(u) >= -a * (Psi_{H_k}(X_k) - (1 - eps))

Evaluation is nested Monte Carlo: mc_inner one-step propagations of (X_k, u),
each continued by mc_per_inner closed-loop rollouts of the T-step horizon.
Each rollout carries one parameter draw from H_{k+1} for its whole path (the
unknown is a constant, not per-step noise). Candidates share all draws, and
the Psi evaluations at X_k share the post-propagation noise slots, so margins
and the S/T split stay comparable across candidates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import rng as rngmod
from ..estimator import GaussianBelief
from .closed_loop import ClosedLoopModel
from .psi import SafetyEstimate, SafetyHorizon, _estimate


@dataclass(frozen=True)
class PSCConfig:
    epsilon: float = 0.1          # risk tolerance; target E[Psi] >= 1 - epsilon
    gamma_gain: float = 1.0       # a in gamma(q) = a q, a in [0, 1]
    dt: float = 0.1               # control sampling interval (s)
    mc_samples: int = 100         # rollouts per Psi evaluation
    mc_inner: int = 16            # one-step propagation draws in E[Psi']
    # Rollouts continuing each propagation draw. The E[Psi'] budget
    # (mc_inner * mc_per_inner) runs ahead of the plain Psi budget because
    # admission decisions ride the constraint boundary, where estimator
    # noise turns directly into overly aggressive inputs.
    mc_per_inner: int = 14
    candidate_d_delta: tuple[float, ...] = (-0.5, -0.25, 0.0, 0.25, 0.5)
    candidate_d_tau: tuple[float, ...] = (-2000.0, 0.0, 2000.0)

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")
        if not (0.0 <= self.gamma_gain <= 1.0):
            raise ValueError("gamma gain must lie in [0, 1]")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if min(self.mc_samples, self.mc_inner, self.mc_per_inner) < 1:
            raise ValueError("sample counts must be positive")
        if self.mc_samples > self.mc_inner * self.mc_per_inner:
            raise ValueError("mc_samples cannot exceed mc_inner * mc_per_inner "
                             "(Psi draws are a prefix of the shared tensor)")
        if not self.candidate_d_delta or not self.candidate_d_tau:
            raise ValueError("candidate sets must be nonempty")

    def candidate_grid(self) -> np.ndarray:
        """Cross product of the quantized input levels, shape (C, 2)."""
        dd, dt_ = np.meshgrid(self.candidate_d_delta, self.candidate_d_tau, indexing="ij")
        return np.column_stack([dd.ravel(), dt_.ravel()])


def gamma_of(q, gain: float):
    """gamma(q) = a q; linear and increasing, gamma(q) <= q for a in [0, 1], q >= 0."""
    return gain * q


def constraint_satisfied(psi_k: float, gen_value: float, config: PSCConfig):
    """Certificate test: A >= -gamma(psi_k - (1 - eps)). Returns (ok, margin)."""
    margin = gen_value + gamma_of(psi_k - (1.0 - config.epsilon), config.gamma_gain)
    return bool(margin >= 0.0), float(margin)


@dataclass(frozen=True)
class StepCertificate:
    """All certificate quantities for one control step, shared-sample."""
    psi_k: SafetyEstimate            # Psi_{H_k}(X_k)
    psi_k1_at_x: SafetyEstimate      # Psi_{H_{k+1}}(X_k)
    expected_next: np.ndarray        # (C,) E[Psi_{H_{k+1}}(X_{k+1}) | X_k, u_c]
    gen_values: np.ndarray           # (C,) A(u_c)
    s_terms: np.ndarray              # (C,) state-prediction part
    t_term: float                    # belief-update part (candidate independent)
    margins: np.ndarray              # (C,) certificate margins
    feasible: np.ndarray             # (C,) margins >= 0


def evaluate_candidates(model: ClosedLoopModel, x: np.ndarray,
                        belief_k: GaussianBelief, belief_k1: GaussianBelief,
                        candidates: np.ndarray, horizon: SafetyHorizon,
                        config: PSCConfig, seed: int, tags: tuple[int, ...] = (),
                        dt_first: float | None = None) -> StepCertificate:
    """Shared-sample certificate evaluation for a candidate input set.

    dt_first is the duration of the propagation step (defaults to config.dt;
    the MPC integration passes its own control interval).
    """
    x = np.asarray(x, dtype=float)
    candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    C = candidates.shape[0]
    n_roll = config.mc_inner * config.mc_per_inner
    n_psi = config.mc_samples
    T = horizon.T
    dt0 = config.dt if dt_first is None else float(dt_first)

    # Shared draws. Slot 0 of the big tensor is the propagation step's noise
    # (group-shared across mc_per_inner); slots 1..T drive the policy steps
    # and are reused by the Psi evaluations at X_k so differences cancel.
    z_xi = rngmod.normal_tensor(seed, tags + (rngmod.TAG_XI,), (n_roll,))
    z_big = rngmod.normal_tensor(seed, tags + (rngmod.TAG_PSI,),
                                 (n_roll, T + 1, model.n_noise))
    z0 = rngmod.normal_tensor(seed, tags + (rngmod.TAG_INNER,),
                              (config.mc_inner, model.n_noise))
    z_big[:, 0, :] = np.repeat(z0, config.mc_per_inner, axis=0)

    # Psi at X_k under both beliefs, one fused batch, coupled xi draws.
    xi_k = model.sample_xi(belief_k.mean, belief_k.std, z_xi[:n_psi])
    xi_k1 = model.sample_xi(belief_k1.mean, belief_k1.std, z_xi[:n_psi])
    z_psi = z_big[:n_psi, 1:, :]
    safe_pair = model.rollout_safe(
        np.broadcast_to(x, (2 * n_psi, x.size)),
        np.concatenate([xi_k, xi_k1]),
        T, horizon.dt_eval,
        np.ascontiguousarray(np.concatenate([z_psi, z_psi], axis=0)), None)
    psi_k = _estimate(safe_pair[:n_psi])
    psi_k1 = _estimate(safe_pair[n_psi:])

    # One-step propagation under every candidate, then the closed loop.
    xi_next = model.sample_xi(belief_k1.mean, belief_k1.std, z_xi)
    x_tile = np.broadcast_to(x, (C * n_roll, x.size))
    u0 = np.repeat(candidates, n_roll, axis=0)
    safe_next = model.rollout_safe(
        x_tile, np.tile(xi_next, C), T, horizon.dt_eval,
        np.ascontiguousarray(np.tile(z_big, (C, 1, 1))), u0, dt_first=dt0)
    expected_next = safe_next.reshape(C, n_roll).mean(axis=1)

    gen_values = (expected_next - psi_k.value) / config.dt
    s_terms = (expected_next - psi_k1.value) / config.dt
    t_term = (psi_k1.value - psi_k.value) / config.dt
    margins = gen_values + gamma_of(psi_k.value - (1.0 - config.epsilon), config.gamma_gain)
    return StepCertificate(
        psi_k=psi_k, psi_k1_at_x=psi_k1, expected_next=expected_next,
        gen_values=gen_values, s_terms=s_terms, t_term=float(t_term),
        margins=margins, feasible=margins >= 0.0,
    )


def generator(model: ClosedLoopModel, x: np.ndarray, u: np.ndarray,
              belief_k: GaussianBelief, belief_k1: GaussianBelief,
              horizon: SafetyHorizon, config: PSCConfig,
              seed: int, tags: tuple[int, ...] = ()) -> float:
    """A(u): normalized one-step expected change of Psi under input u."""
    cert = evaluate_candidates(model, x, belief_k, belief_k1,
                               np.asarray(u, dtype=float)[None, :],
                               horizon, config, seed, tags)
    return float(cert.gen_values[0])


def generator_split(model: ClosedLoopModel, x: np.ndarray, u: np.ndarray,
                    belief_k: GaussianBelief, belief_k1: GaussianBelief,
                    horizon: SafetyHorizon, config: PSCConfig,
                    seed: int, tags: tuple[int, ...] = ()) -> tuple[float, float]:
    """(S, T) parts; S + T equals the generator on the same draws."""
    cert = evaluate_candidates(model, x, belief_k, belief_k1,
                               np.asarray(u, dtype=float)[None, :],
                               horizon, config, seed, tags)
    return float(cert.s_terms[0]), float(cert.t_term)
