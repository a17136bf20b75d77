"""Conjugate Gaussian estimation of the road-tire friction coefficient.

One unknown scalar, Gaussian prior, Gaussian measurement noise. The update
is the standard precision-weighted combination

    mean_k = (sbar2 * mean_{k-1} + var_{k-1} * M_k) / (sbar2 + var_{k-1})
    var_k  = sbar2 * var_{k-1} / (sbar2 + var_{k-1})

so precisions add: 1/var_k = 1/var_{k-1} + 1/sbar2. Beliefs are immutable
values; updates return new ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GaussianBelief:
    mean: float
    var: float
    update_count: int = 0

    def __post_init__(self):
        if not np.isfinite(self.mean):
            raise ValueError("belief mean must be finite")
        if not (self.var > 0):
            raise ValueError("belief variance must be positive")

    @property
    def std(self) -> float:
        return float(np.sqrt(self.var))


@dataclass(frozen=True)
class MeasurementModel:
    noise_var: float                 # variance of each measurement
    clamp: tuple[float, float] = (0.05, 1.2)

    def __post_init__(self):
        if not (self.noise_var > 0):
            raise ValueError("measurement noise variance must be positive")
        if not (self.clamp[0] < self.clamp[1]):
            raise ValueError("clamp range must satisfy lo < hi")


def update(belief: GaussianBelief, measurement: float, model: MeasurementModel) -> GaussianBelief:
    sbar2 = model.noise_var
    mean = (sbar2 * belief.mean + belief.var * measurement) / (sbar2 + belief.var)
    var = sbar2 * belief.var / (sbar2 + belief.var)
    return GaussianBelief(mean=mean, var=var, update_count=belief.update_count + 1)


def sample_measurement(true_mu: float, model: MeasurementModel,
                       rng: np.random.Generator) -> float:
    """Noisy friction reading: true value plus Gaussian noise, clamped."""
    lo, hi = model.clamp
    m = true_mu + np.sqrt(model.noise_var) * rng.standard_normal()
    return float(np.clip(m, lo, hi))


def posterior_after_n(prior: GaussianBelief, measurements, model: MeasurementModel) -> GaussianBelief:
    belief = prior
    for m in measurements:
        belief = update(belief, float(m), model)
    return belief


def conjugate_posterior(prior: GaussianBelief, measurements, model: MeasurementModel) -> GaussianBelief:
    """Closed-form posterior after all measurements at once; fold oracle."""
    ms = np.asarray(list(measurements), dtype=float)
    n = ms.size
    if n == 0:
        return prior
    prec = 1.0 / prior.var + n / model.noise_var
    mean = (prior.mean / prior.var + ms.sum() / model.noise_var) / prec
    return GaussianBelief(mean=float(mean), var=float(1.0 / prec), update_count=prior.update_count + n)
