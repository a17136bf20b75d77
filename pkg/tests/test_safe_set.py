import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psclab.safety.safe_set import SafeSetSpec, long_term_safe, phi
from psclab.vehicle.state import VehicleState

SPEC = SafeSetSpec(e_max=3.0)


def _state(e):
    return VehicleState(v_x=10.0, e=e)


def test_phi_examples():
    assert phi(_state(0.0), SPEC) == pytest.approx(1.0)
    assert phi(_state(3.0), SPEC) == pytest.approx(0.0)
    assert phi(_state(6.0), SPEC) == pytest.approx(-3.0)


def test_long_term_safe_all_inside():
    traj = [_state(e) for e in (-2.9, 0.0, 1.5, 2.9)]
    assert long_term_safe(traj, SPEC) == 1


def test_long_term_safe_single_excursion():
    traj = [_state(e) for e in (0.0, 3.1, 0.0)]
    assert long_term_safe(traj, SPEC) == 0


def test_long_term_safe_empty_rejected():
    with pytest.raises(ValueError):
        long_term_safe([], SPEC)


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=50))
def test_long_term_safe_matches_rescan(es):
    traj = [_state(e) for e in es]
    expected = int(min(phi(s, SPEC) for s in traj) >= 0.0)
    assert long_term_safe(traj, SPEC) == expected


@given(st.floats(0.1, 50), st.floats(-100, 100))
def test_phi_sign_iff_band(e_max, e):
    spec = SafeSetSpec(e_max=e_max)
    assert (phi(_state(e), spec) >= 0) == (abs(e) <= e_max)
