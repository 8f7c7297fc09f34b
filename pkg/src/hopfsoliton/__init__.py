"""Steady pluriclosed solitons on class-1 Hopf surfaces.

Shooting for the reduced ODE, reconstruction and verification of the
soliton data, a 1-D simulator for the reduced flow, and exact checks of the
Sasaki frame identities.
"""
from .errors import (
    BoundaryMismatch,
    ConvergenceError,
    DomainError,
    HorizonExceeded,
    MalformedFile,
    MissingEvent,
    NoBracket,
    NonPositivePhi,
    SolitonError,
    StabilityError,
    StepUnderflow,
)
from .geometry import (
    SolitonProfile,
    chern_integral,
    cone_angles,
    gauss_bonnet,
    hopf_fixed_point,
    reconstruct,
    verify_soliton,
)
from .ode import REDUCED, SOLITON, ToleranceSettings, Trajectory, classify_phases, integrate, lyapunov
from .params import HopfParams, derive, s_of_sigma, sigma_of_s
from .shooting import rescale_to_hopf, rho_of_z0, solve_for_rho

__version__ = "0.1.0"
