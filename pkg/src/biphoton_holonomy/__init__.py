"""Geometric phase and projection measures for entangled OAM bi-photons."""
from .biphoton import (
    BiPhotonState,
    EntanglementParams,
    ProjectionSet,
    alpha_from_schmidt,
    entangled_projection,
    g_phi,
    g_proj,
    schmidt_number,
)
from .circuit import Circuit, FrameRotation, LensElement, transit
from .errors import HolonomyError
from .holonomy import StatePath, dynamic_phase, geometric_phase, total_phase
from .modes import ModeVector, SpherePoint, state_A, state_B
from .pump import pump_from_target, spectrum_from_pump, target_from_entanglement

__all__ = [
    "BiPhotonState",
    "Circuit",
    "EntanglementParams",
    "FrameRotation",
    "HolonomyError",
    "LensElement",
    "ModeVector",
    "ProjectionSet",
    "SpherePoint",
    "StatePath",
    "alpha_from_schmidt",
    "dynamic_phase",
    "entangled_projection",
    "g_phi",
    "g_proj",
    "geometric_phase",
    "pump_from_target",
    "schmidt_number",
    "spectrum_from_pump",
    "state_A",
    "state_B",
    "target_from_entanglement",
    "total_phase",
    "transit",
]
