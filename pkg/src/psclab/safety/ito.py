"""Gradient-form evaluation of the state-prediction term.

In the small-step limit the prediction part of the generator equals

    grad Psi . E[f_c(x, u, Xi)]  +  1/2 sum_i sigma_i^2 d2Psi/dx_i^2

with Xi drawn from the next belief and sigma the diffusion scales. This
module estimates the gradient and diagonal Hessian of Psi by central finite
differences over the Monte Carlo estimator with common random numbers (the
same draws at every probe point, so differences count only the rollouts
whose verdict flips), and assembles the drift term. It is the secondary
evaluation path: the certificate itself uses the direct generator, and this
form is validated on the enumerable toy system where Psi has a closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import rng as rngmod
from ..estimator import GaussianBelief
from .closed_loop import ClosedLoopModel
from .psi import SafetyHorizon, psi_with_draws

# Gauss-Hermite nodes/weights (n=5) for expectations over a Gaussian belief.
_GH_X, _GH_W = np.polynomial.hermite_e.hermegauss(5)
_GH_W = _GH_W / _GH_W.sum()


@dataclass(frozen=True)
class GradientEstimate:
    gradient: np.ndarray        # dPsi/dx_i over the probed dims
    hessian_diag: np.ndarray    # d2Psi/dx_i^2 over the probed dims
    dims: tuple[int, ...]
    half_width: np.ndarray      # conservative per-dim CI half-width of the gradient
    noisy: bool                 # any half-width above the flag threshold


def psi_gradient(model: ClosedLoopModel, x: np.ndarray, belief: GaussianBelief,
                 horizon: SafetyHorizon, n_samples: int, seed: int,
                 dims: tuple[int, ...], h: float = 0.05,
                 h_hess: float | None = None,
                 flag_threshold: float = 0.25) -> GradientEstimate:
    """Central-difference gradient and diagonal Hessian of Psi at x.

    All probe evaluations share one draw set (common random numbers); the
    reported half-width is the no-coupling bound, so it overstates the error
    of the coupled differences and the noisy flag is conservative.
    """
    x = np.asarray(x, dtype=float)
    h_hess = h if h_hess is None else h_hess
    z_xi = rngmod.normal_tensor(seed, (rngmod.TAG_XI,), (n_samples,))
    z = rngmod.normal_tensor(seed, (rngmod.TAG_PSI,), (n_samples, horizon.T, model.n_noise))

    def psi_at(xp: np.ndarray) -> float:
        return psi_with_draws(model, xp, belief, horizon, z_xi, z).value

    p0 = psi_at(x)
    grad = np.zeros(len(dims))
    hess = np.zeros(len(dims))
    hw = np.zeros(len(dims))
    hw_one = 1.96 * np.sqrt(0.25 / n_samples)
    for j, d in enumerate(dims):
        step = np.zeros_like(x)
        step[d] = h
        p_plus, p_minus = psi_at(x + step), psi_at(x - step)
        grad[j] = (p_plus - p_minus) / (2.0 * h)
        step[d] = h_hess
        q_plus, q_minus = psi_at(x + step), psi_at(x - step)
        hess[j] = (q_plus - 2.0 * p0 + q_minus) / (h_hess ** 2)
        hw[j] = np.hypot(hw_one, hw_one) / (2.0 * h)
    return GradientEstimate(gradient=grad, hessian_diag=hess, dims=tuple(dims),
                            half_width=hw, noisy=bool(np.any(hw > flag_threshold)))


def ito_drift_term(grad: GradientEstimate, drift_mean: np.ndarray,
                   noise_scales: np.ndarray, noise_dims: tuple[int, ...]) -> float:
    """Assemble grad Psi . E[f_c] + 1/2 sigma^T sigma Hess Psi over the dims.

    drift_mean holds E[f_c] on grad.dims; noise_scales/noise_dims name the
    diffusion channels (per sqrt-second scales).
    """
    drift_mean = np.asarray(drift_mean, dtype=float)
    if drift_mean.shape != (len(grad.dims),):
        raise ValueError("drift_mean must match the probed dims")
    total = float(grad.gradient @ drift_mean)
    for scale, d in zip(noise_scales, noise_dims):
        if d in grad.dims:
            total += 0.5 * scale ** 2 * grad.hessian_diag[grad.dims.index(d)]
    return total


def belief_expectation(fn, belief: GaussianBelief) -> np.ndarray:
    """E[fn(xi)] over the Gaussian belief by 5-node Gauss-Hermite quadrature."""
    vals = [np.asarray(fn(belief.mean + belief.std * xn), dtype=float) for xn in _GH_X]
    return np.einsum("i,i...->...", _GH_W, np.stack(vals))
