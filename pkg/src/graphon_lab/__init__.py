"""Numerical laboratory for time-dependent graphon consensus dynamics."""
from ._backend import BACKEND
from .discretize import AdjacencyMatrix, State, lift_piecewise, sample_adjacency, sample_state
from .dynamics import SolverConfig, Trajectory, integrate
from .kernel import NonlinKernel, TimeKernel, builtin_kernel, constant_phi, cucker_smale_phi, gamma_R

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AdjacencyMatrix",
    "NonlinKernel",
    "SolverConfig",
    "State",
    "TimeKernel",
    "Trajectory",
    "builtin_kernel",
    "constant_phi",
    "cucker_smale_phi",
    "gamma_R",
    "integrate",
    "lift_piecewise",
    "sample_adjacency",
    "sample_state",
]
