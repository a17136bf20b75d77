"""Gradient-path evaluation against the analytic one-step toy."""

import numpy as np
import pytest
from scipy.stats import norm

from psclab.estimator import GaussianBelief
from psclab.safety.generator import PSCConfig, generator_split
from psclab.safety.ito import GradientEstimate, belief_expectation, ito_drift_term, psi_gradient
from psclab.safety.psi import SafetyHorizon
from psclab.toy import ToyClosedLoop

# Gaussian noise (not three-point): the T=1 safety probability is analytic.
TOY = ToyClosedLoop(sigma=0.5, x_max=1.0, k_fb=0.8, u_max=0.6, three_point=False)
DT = 0.5
H1 = SafetyHorizon(T=1, dt_eval=DT)
NARROW = GaussianBelief(0.1, 1e-18)


def analytic_psi(x, xi=NARROW.mean):
    if abs(x) > TOY.x_max:
        return 0.0
    m = x + (np.clip(-TOY.k_fb * x, -TOY.u_max, TOY.u_max) + xi) * DT
    sd = TOY.sigma * np.sqrt(DT)
    return norm.cdf((TOY.x_max - m) / sd) - norm.cdf((-TOY.x_max - m) / sd)


def analytic_grad(x, xi=NARROW.mean):
    m = x + (-TOY.k_fb * x + xi) * DT     # unclipped region only
    dm = 1.0 - TOY.k_fb * DT
    sd = TOY.sigma * np.sqrt(DT)
    return (norm.pdf((-TOY.x_max - m) / sd) - norm.pdf((TOY.x_max - m) / sd)) * dm / sd


def analytic_hess(x, xi=NARROW.mean):
    m = x + (-TOY.k_fb * x + xi) * DT
    dm = 1.0 - TOY.k_fb * DT
    sd = TOY.sigma * np.sqrt(DT)
    a = (TOY.x_max - m) / sd
    b = (-TOY.x_max - m) / sd
    return (a * norm.pdf(a) - b * norm.pdf(b)) * (dm / sd) ** 2 * -1.0


def test_zero_for_constant_psi():
    grad = GradientEstimate(gradient=np.zeros(1), hessian_diag=np.zeros(1),
                            dims=(0,), half_width=np.zeros(1), noisy=False)
    assert ito_drift_term(grad, np.array([0.3]), np.array([0.5]), (0,)) == 0.0


def test_gradient_matches_analytic():
    x0 = 0.45
    est = psi_gradient(TOY, np.array([x0]), NARROW, H1, n_samples=200_000,
                       seed=21, dims=(0,), h=0.05, h_hess=0.3)
    assert est.gradient[0] == pytest.approx(analytic_grad(x0), rel=0.05)
    assert est.hessian_diag[0] == pytest.approx(analytic_hess(x0), rel=0.15)


def test_ito_term_matches_analytic_directional_derivative():
    x0, u = 0.45, -0.2
    est = psi_gradient(TOY, np.array([x0]), NARROW, H1, n_samples=200_000,
                       seed=22, dims=(0,), h=0.05, h_hess=0.3)
    # toy drift f_c = u + xi; E over the (near-point) belief is u + mean
    drift_mean = belief_expectation(lambda xi: np.array([u + xi]), NARROW)
    got = ito_drift_term(est, drift_mean, np.array([TOY.sigma]), (0,))
    want = analytic_grad(x0) * (u + NARROW.mean) + 0.5 * TOY.sigma ** 2 * analytic_hess(x0)
    assert got == pytest.approx(want, rel=0.05)


def test_agrees_with_sampled_prediction_term_at_small_dt():
    # S-term of the generator at shrinking dt approaches the gradient form.
    x0, u = 0.45, -0.2
    est = psi_gradient(TOY, np.array([x0]), NARROW, H1, n_samples=200_000,
                       seed=23, dims=(0,), h=0.05, h_hess=0.3)
    drift_mean = belief_expectation(lambda xi: np.array([u + xi]), NARROW)
    ito_val = ito_drift_term(est, drift_mean, np.array([TOY.sigma]), (0,))
    cfg = PSCConfig(epsilon=0.1, gamma_gain=1.0, dt=0.02, mc_samples=20_000,
                    mc_inner=200, mc_per_inner=100)
    s_term, _ = generator_split(TOY, np.array([x0]), np.array([u]), NARROW, NARROW,
                                H1, cfg, seed=29)
    assert s_term == pytest.approx(ito_val, abs=0.12)


def test_flags_noisy_gradient():
    est = psi_gradient(TOY, np.array([0.45]), NARROW, H1, n_samples=50,
                       seed=5, dims=(0,), h=0.01)
    assert est.noisy


def test_belief_expectation_quadrature():
    b = GaussianBelief(0.4, 0.09)
    got = belief_expectation(lambda xi: np.array([xi, xi * xi]), b)
    assert got[0] == pytest.approx(0.4, abs=1e-10)
    assert got[1] == pytest.approx(0.4 ** 2 + 0.09, abs=1e-10)
