"""1D discontinuous Galerkin solver for Euler and its IGR/HRE/HIGR regularizations."""
from .backend import active_backend, available_backends, use_backend
from .dg1d import DgField, Mesh1D, PenaltyParams
from .eos import IdealGasEos
from .models import ModelKind, ModelParams, PositivityError, SimState, initial_condition_sod
from .timestep import RunConfig, run

__all__ = [
    "active_backend", "available_backends", "use_backend", "DgField", "IdealGasEos", "Mesh1D", "ModelKind", "ModelParams",
    "PenaltyParams", "PositivityError", "RunConfig", "SimState", "initial_condition_sod", "run",
]
