import numpy as np
import pytest

from psclab.control.nominal import NominalControllerConfig, nominal, nominal_batch
from psclab.vehicle.dynamics import step_batch
from psclab.vehicle.params import VehicleParams
from psclab.vehicle.road import RoadProfile, default_road
from psclab.vehicle.state import rolling_state

P = VehicleParams()
CFG = NominalControllerConfig()
STRAIGHT = RoadProfile(segments=((3000.0, 0.0),))


def test_reference_speed_is_40_kmh():
    assert CFG.V_ref == pytest.approx(40.0 / 3.6)


def test_equilibrium_gives_zero_input():
    st_ = rolling_state(CFG.V_ref, P.R_e)
    u = nominal(st_, 0.5, STRAIGHT, CFG, P)
    assert u.d_delta == pytest.approx(0.0, abs=1e-12)
    assert u.d_tau_e == pytest.approx(0.0, abs=1e-12)


def test_steers_toward_centerline():
    # Positive lateral error: one closed-loop second must reduce |e|.
    x = rolling_state(CFG.V_ref, P.R_e, e=1.0).to_array()[None, :]
    u0 = nominal_batch(x, STRAIGHT, CFG, P)
    assert u0[0, 0] < 0.0  # steer away from the offset side
    e_start = x[0, 10]
    for _ in range(30):
        u = nominal_batch(x, STRAIGHT, CFG, P)
        x, alive = step_batch(x, u[0], 0.8, STRAIGHT, P, dt=0.1, substeps=4)
        assert alive[0]
    assert abs(x[0, 10]) < abs(e_start)


def test_inputs_respect_actuator_bounds():
    x = rolling_state(5.0, P.R_e, e=50.0, psi=1.0).to_array()[None, :]
    u = nominal_batch(x, STRAIGHT, CFG, P)
    assert abs(u[0, 0]) <= P.d_delta_max
    assert abs(u[0, 1]) <= P.d_tau_max


def test_speed_settles_by_30s_straight_road():
    x = rolling_state(20.0 / 3.6, P.R_e).to_array()[None, :]
    for _ in range(300):
        u = nominal_batch(x, STRAIGHT, CFG, P)
        x, _ = step_batch(x, u[0], 0.8, STRAIGHT, P, dt=0.1, substeps=4)
    assert x[0, 0] == pytest.approx(CFG.V_ref, abs=0.25)


def test_curvature_feedforward_targets_road_yaw_rate():
    road = default_road()
    x = rolling_state(10.0, P.R_e, s=100.0).to_array()[None, :]  # on the arc
    x[0, 2] = 10.0 * road.curvature(100.0)  # yaw rate matches the road
    u_on = nominal_batch(x, road, CFG, P)
    x[0, 2] = 0.0
    u_off = nominal_batch(x, road, CFG, P)
    # Not tracking the feed-forward yaw rate demands more steering action.
    assert abs(u_off[0, 0]) > abs(u_on[0, 0])


def test_rejects_speed_below_floor():
    with pytest.raises(ValueError):
        nominal(rolling_state(0.1, P.R_e), 0.5, STRAIGHT, CFG, P)


def test_config_validation():
    with pytest.raises(ValueError):
        NominalControllerConfig(K_lateral=(1.0, 2.0))
    with pytest.raises(ValueError):
        NominalControllerConfig(V_ref=0.0)
