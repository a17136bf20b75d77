"""Compiled rollout kernel pinned against the step-by-step numpy path."""

import numpy as np
import pytest

from psclab.control.nominal import NominalControllerConfig
from psclab.safety.closed_loop import VehicleClosedLoop, rollout_safe_reference
from psclab.vehicle.dynamics import NoiseSpec
from psclab.vehicle.params import VehicleParams
from psclab.vehicle.road import default_road
from psclab.vehicle.state import rolling_state

P = VehicleParams()


def _model(e_max=3.0, noise=NoiseSpec()):
    return VehicleClosedLoop(params=P, road=default_road(), noise=noise,
                             nominal_cfg=NominalControllerConfig(), e_max=e_max)


@pytest.mark.parametrize("vx,s,mu,e0", [
    (5.56, 0.0, 0.35, 0.0),
    (8.0, 40.0, 0.32, 0.5),
    (11.0, 55.0, 0.85, -0.4),
    (6.5, 100.0, 0.55, 1.0),
])
def test_kernel_matches_reference_plain(vx, s, mu, e0):
    model = _model()
    x0 = rolling_state(vx, P.R_e, s=s, e=e0).to_array()
    rng = np.random.default_rng(hash((vx, s)) % 2**31)
    B, T = 256, 40
    z = rng.standard_normal((B, T, 3))
    xi = np.clip(mu + 0.05 * rng.standard_normal(B), 0.05, 1.2)
    fast = model.rollout_safe(x0, xi, T, 0.1, z, None)
    ref = rollout_safe_reference(model, x0, xi, T, 0.1, z, None)
    assert np.array_equal(fast, ref)


def test_kernel_matches_reference_with_first_input():
    model = _model()
    x0 = rolling_state(7.0, P.R_e, s=45.0).to_array()
    rng = np.random.default_rng(4)
    B, T = 256, 40
    z = rng.standard_normal((B, T + 1, 3))
    xi = np.full(B, 0.33)
    for u0 in (np.array([0.3, -1500.0]), np.array([-0.5, 2000.0])):
        u0b = np.tile(u0, (B, 1))
        for dtf in (None, 0.2):
            fast = model.rollout_safe(x0, xi, T, 0.1, z, u0b, dt_first=dtf)
            ref = rollout_safe_reference(model, x0, xi, T, 0.1, z, u0b, dt_first=dtf)
            assert np.array_equal(fast, ref)


def test_kernel_handles_dying_rollouts():
    model = _model()
    # Start just above the speed floor with heavy braking: rollouts die.
    x0 = rolling_state(1.0, P.R_e, s=10.0, tau_e=-2000.0).to_array()
    rng = np.random.default_rng(6)
    B, T = 128, 30
    z = rng.standard_normal((B, T, 3))
    xi = np.full(B, 0.3)
    fast = model.rollout_safe(x0, xi, T, 0.1, z, None)
    ref = rollout_safe_reference(model, x0, xi, T, 0.1, z, None)
    assert np.array_equal(fast, ref)
    assert not fast.all()


def test_unsafe_initial_lateral_error():
    model = _model(e_max=3.0)
    x0 = rolling_state(10.0, P.R_e, e=3.5).to_array()
    z = np.random.default_rng(0).standard_normal((64, 10, 3))
    out = model.rollout_safe(x0, np.full(64, 0.5), 10, 0.1, z, None)
    assert not out.any()


def test_xi_clamp_applied():
    model = _model()
    z = np.random.default_rng(0).standard_normal(1000)
    xi = model.sample_xi(0.1, 0.5, z)
    assert xi.min() >= 0.05
    assert xi.max() <= 1.2


def test_noise_free_equilibrium_rollout_is_certainly_safe():
    # Zero process noise, rolling at the reference speed on a straight road:
    # the nominal loop holds the centerline, so the safety estimate is 1.
    from psclab.estimator import GaussianBelief
    from psclab.safety.psi import SafetyHorizon, estimate_psi
    from psclab.vehicle.road import RoadProfile

    straight = RoadProfile(segments=((2000.0, 0.0),))
    model = VehicleClosedLoop(params=P, road=straight,
                              noise=NoiseSpec(v_x=0.0, v_y=0.0, r=0.0),
                              nominal_cfg=NominalControllerConfig(), e_max=3.0)
    x0 = rolling_state(NominalControllerConfig().V_ref, P.R_e).to_array()
    est = estimate_psi(model, x0, GaussianBelief(0.8, 1e-6), SafetyHorizon(),
                       64, seed=5)
    assert est.value == 1.0
