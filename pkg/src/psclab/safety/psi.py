"""Monte Carlo estimation of the long-term safety probability.

An estimate of Psi_H(x): sample the unknown parameter from the belief H,
roll the closed loop under the reference policy for T steps of dt_eval with
process noise, and average the all-steps-safe indicator. Everything is
deterministic given the seed tags; rollouts for different purposes within
one control step share noise draws (common random numbers) so that
differences of estimates have far lower variance than the estimates
themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import rng as rngmod
from ..estimator import GaussianBelief
from .closed_loop import ClosedLoopModel


@dataclass(frozen=True)
class SafetyHorizon:
    T: int = 75           # outlook steps
    dt_eval: float = 0.1  # rollout step (s)

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("horizon must be at least 1 step")
        if not (self.dt_eval > 0):
            raise ValueError("dt_eval must be positive")


@dataclass(frozen=True)
class SafetyEstimate:
    value: float
    n_samples: int
    half_width: float     # 95% normal-approximation CI half-width

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise ValueError("safety probability must lie in [0, 1]")
        if self.n_samples < 1:
            raise ValueError("need at least one sample")
        if self.half_width < 0:
            raise ValueError("half-width must be nonnegative")


def _estimate(safe_mask: np.ndarray) -> SafetyEstimate:
    n = int(safe_mask.size)
    p = float(safe_mask.mean())
    hw = 1.96 * np.sqrt(max(p * (1.0 - p), 0.0) / n)
    return SafetyEstimate(value=p, n_samples=n, half_width=float(hw))


def psi_with_draws(model: ClosedLoopModel, x0: np.ndarray, belief: GaussianBelief,
                   horizon: SafetyHorizon, z_xi: np.ndarray, z: np.ndarray) -> SafetyEstimate:
    """Psi estimate from externally supplied standard-normal draws.

    z_xi: (n,) parameter draws base; z: (n, >=T, n_noise) process noise.
    The shared-draw entry point that makes CRN possible across beliefs.
    """
    xi = model.sample_xi(belief.mean, belief.std, z_xi)
    safe = model.rollout_safe(x0, xi, horizon.T, horizon.dt_eval, z, None)
    return _estimate(safe)


def estimate_psi(model: ClosedLoopModel, x0: np.ndarray, belief: GaussianBelief,
                 horizon: SafetyHorizon, n_samples: int,
                 seed: int, tags: tuple[int, ...] = ()) -> SafetyEstimate:
    """Psi_H(x0) from n_samples independent closed-loop rollouts.

    Deterministic given (seed, tags): draws come from streams derived from
    (seed, *tags, purpose).
    """
    z_xi = rngmod.normal_tensor(seed, tags + (rngmod.TAG_XI,), (n_samples,))
    z = rngmod.normal_tensor(seed, tags + (rngmod.TAG_PSI,),
                             (n_samples, horizon.T, model.n_noise))
    return psi_with_draws(model, np.asarray(x0, dtype=float), belief, horizon, z_xi, z)
