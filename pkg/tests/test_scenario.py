from pathlib import Path

import pytest
import yaml

from psclab.scenario import FRICTION_CLASSES, FrictionSpec, Scenario, icy_scenario
from psclab.rng import derive_rng
from psclab.vehicle.params import VehicleParams
from psclab.vehicle.road import RoadProfile

ROOT = Path(__file__).resolve().parents[1]


def test_yaml_round_trip_preserves_hash(tmp_path):
    sc = icy_scenario(duration_s=17.0, e_max=5.0)
    path = tmp_path / "sc.yaml"
    sc.to_yaml(path)
    back = Scenario.from_yaml(path)
    assert back == sc
    assert back.content_hash() == sc.content_hash()


def test_hash_changes_with_content():
    a = icy_scenario()
    b = icy_scenario(e_max=5.0)
    assert a.content_hash() != b.content_hash()


def test_shipped_scenarios_load():
    for name in ("icy", "dry", "wet", "default"):
        sc = Scenario.from_yaml(ROOT / "scenarios" / f"{name}.yaml")
        assert sc.road().length > 0


def test_defaults_file_matches_reference_parameters():
    shipped = yaml.safe_load((ROOT / "scenarios" / "vehicle_params.yaml").read_text())
    p = VehicleParams()
    for key, value in shipped.items():
        assert getattr(p, key) == value, key
    assert shipped["m"] == 1430.0 and shipped["mu_s"] == 0.55 and shipped["mu_c"] == 0.35
    assert p.F_z == pytest.approx(1430.0 * 9.8 / 4.0)


def test_friction_class_draws_stay_in_range():
    for name, (lo, hi) in FRICTION_CLASSES.items():
        spec = FrictionSpec(kind="class", name=name)
        rng = derive_rng(0, 1)
        draws = [spec.draw(rng) for _ in range(200)]
        assert min(draws) >= lo and max(draws) <= hi


def test_fixed_friction():
    spec = FrictionSpec(kind="fixed", value=0.62)
    assert spec.draw(derive_rng(0, 1)) == 0.62


def test_unknown_class_rejected():
    with pytest.raises(ValueError):
        FrictionSpec(kind="class", name="lava")
    with pytest.raises(ValueError):
        FrictionSpec(kind="gravel")


def test_road_curvature_lookup_total_with_runout():
    road = RoadProfile(segments=((10.0, 0.0), (20.0, 0.05)))
    assert road.curvature(-5.0) == 0.0
    assert road.curvature(5.0) == 0.0
    assert road.curvature(15.0) == 0.05
    assert road.curvature(29.9) == 0.05
    assert road.curvature(30.0) == 0.0   # run-out straight
    assert road.curvature(1e6) == 0.0
    assert road.length == 30.0


def test_road_validation():
    with pytest.raises(ValueError):
        RoadProfile(segments=())
    with pytest.raises(ValueError):
        RoadProfile(segments=((0.0, 0.1),))
    with pytest.raises(ValueError):
        RoadProfile(segments=((10.0, float("inf")),))


def test_initial_state_rolls_without_slip():
    sc = icy_scenario()
    st = sc.initial_state()
    p = sc.params()
    assert st.omega_fl == pytest.approx(st.v_x / p.R_e)
    assert st.v_x == pytest.approx(20.0 / 3.6)
