from .dynamics import NoiseSpec, derivative, step, step_batch
from .params import VehicleParams
from .road import RoadProfile, default_road
from .state import ControlInput, VehicleState, rolling_state
from .tires import TireForces, lugre_forces, slip_quantities, stribeck

__all__ = [
    "NoiseSpec", "derivative", "step", "step_batch", "VehicleParams",
    "RoadProfile", "default_road", "ControlInput",
    "VehicleState", "rolling_state", "TireForces", "lugre_forces",
    "slip_quantities", "stribeck",
]
