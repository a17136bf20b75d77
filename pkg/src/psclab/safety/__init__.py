from .closed_loop import VehicleClosedLoop, rollout_safe_reference
from .generator import (PSCConfig, StepCertificate, constraint_satisfied,
                        evaluate_candidates, generator, generator_split)
from .ito import belief_expectation, ito_drift_term, psi_gradient
from .psi import SafetyEstimate, SafetyHorizon, estimate_psi, psi_with_draws
from .safe_set import SafeSetSpec, long_term_safe, phi

__all__ = [
    "VehicleClosedLoop", "rollout_safe_reference", "PSCConfig",
    "StepCertificate", "constraint_satisfied", "evaluate_candidates",
    "generator", "generator_split", "belief_expectation", "ito_drift_term",
    "psi_gradient", "SafetyEstimate", "SafetyHorizon", "estimate_psi",
    "psi_with_draws", "SafeSetSpec", "long_term_safe", "phi",
]
