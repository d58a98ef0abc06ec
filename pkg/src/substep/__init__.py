"""Composite s-sub-step implicit integrators for structural dynamics.

Schemes with one to six sub-steps share a single effective matrix per step
size, reach order ``s`` on linear problems and expose the high-frequency
spectral radius ``rho_inf`` as the dissipation control.
"""

from .errors import (
    DivergenceError,
    DomainError,
    NonConvergenceError,
    NumericalError,
    ProbeDegenerateError,
    SubstepError,
    UnsupportedRegimeError,
)
from .linear import LinearModel, StateVector, Trajectory
from .nonlinear import NewtonSettings, NonlinearModel
from .tableau import Tableau, build_tableau, gamma1_for_rho_inf

__all__ = [
    "DivergenceError",
    "DomainError",
    "LinearModel",
    "NewtonSettings",
    "NonConvergenceError",
    "NonlinearModel",
    "NumericalError",
    "ProbeDegenerateError",
    "StateVector",
    "SubstepError",
    "Tableau",
    "Trajectory",
    "UnsupportedRegimeError",
    "build_tableau",
    "gamma1_for_rho_inf",
]
