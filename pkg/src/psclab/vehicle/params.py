"""Vehicle and tire parameters.

Defaults reproduce the reference parameter table of the lane-keeping study
(mid-size sedan with LuGre combined-slip tires). The same values ship in
``scenarios/vehicle_params.yaml``; a unit test keeps the two in sync.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace


@dataclass(frozen=True)
class VehicleParams:
    m: float = 1430.0          # vehicle mass (kg)
    R_e: float = 0.325         # wheel radius (m)
    I_z: float = 2059.0        # yaw moment of inertia (kg m^2)
    I_omega: float = 1.68      # wheel moment of inertia (kg m^2)
    l_f: float = 1.05          # CG to front axle (m)
    l_r: float = 1.61          # CG to rear axle (m)
    W: float = 1.55            # track width (m)
    V_s: float = 6.6           # Stribeck relative velocity (m/s)
    sigma_0x: float = 195.0    # longitudinal rubber stiffness (1/m)
    sigma_2x: float = 0.001    # longitudinal relative viscous damping (s/m)
    kappa_x: float = 13.4      # longitudinal load distribution factor
    sigma_0y: float = 195.0    # lateral rubber stiffness (1/m)
    sigma_2y: float = 0.001    # lateral relative viscous damping (s/m)
    kappa_y: float = 13.4      # lateral load distribution factor
    mu_s: float = 0.55         # static friction coefficient
    mu_c: float = 0.35         # dynamic friction coefficient
    g: float = 9.8             # gravitational acceleration (m/s^2)
    F_z: float = field(default=0.0)  # per-wheel vertical load (N); 0 -> m*g/4

    # Artifact-level settings, not part of the reference table.
    d_delta_max: float = 0.5     # |steering rate| bound (rad/s)
    d_tau_max: float = 2000.0    # |torque rate| bound (N m/s)
    v_min: float = 0.5           # longitudinal speed floor (m/s); below is terminal

    def __post_init__(self):
        if self.F_z == 0.0:
            object.__setattr__(self, "F_z", self.m * self.g / 4.0)
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in ("sigma_2x", "sigma_2y"):
                if v < 0:
                    raise ValueError(f"{f.name} must be >= 0, got {v}")
            elif v <= 0:
                raise ValueError(f"{f.name} must be positive, got {v}")
        if self.mu_s <= self.mu_c:
            raise ValueError("mu_s must exceed mu_c")

    def with_overrides(self, **kw) -> "VehicleParams":
        return replace(self, **kw)
