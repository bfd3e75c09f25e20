"""bridgelab: a numerical laboratory for entropic interpolations.

Solves the two-point Newton boundary-value problem attached to a convex
potential, integrates its gradient flow, evaluates costs, conserved
energies and defect fields, instantiates the exactly solvable Gaussian
family, and machine-checks the long-time inequality catalogue.
"""

from .bounds import BOUND_TOL, EXPONENTIAL, POWER_LAW, BoundReport, RateFit, fit_rate, verify_bounds
from .bridge import (
    BridgeSolution,
    SolverOptions,
    closed_form_bridge,
    closed_form_bridge_trajectory,
    closed_form_cost,
    closed_form_energy,
    closed_form_solution,
    newton_residual,
    reverse_solution,
    solve_bridge,
    solve_bridge_action,
    solve_bridge_shooting,
)
from .errors import (
    BridgeLabError,
    ConfigError,
    DegenerateSeries,
    DomainError,
    DomainEscape,
    MaxIterations,
    MissingPrerequisite,
    NoConvergence,
    NonFinite,
    NonUniformGrid,
    OffGrid,
    OutOfRange,
    UnsupportedEndpoints,
    UnsupportedKind,
)
from .flow import Trajectory, closed_form_flow, default_steps, gradient_flow
from .functionals import (
    ConcavityProfile,
    EnergyStats,
    EnvelopeCheck,
    action_cost,
    concavity_profile,
    conserved_energy,
    cumulative_integral,
    defect_field,
    envelope_check,
)
from .gaussian import (
    Gaussian1D,
    GaussianBridge,
    GammaExpansion,
    bridge_marginal,
    fluct_param,
    gamma_expansion,
    gaussian_cost,
    gaussian_energy,
    heat_flow_distance,
    heat_flow_gaussian,
    rel_entropy_gaussian,
    schrodinger_value,
    w2_gaussian,
)
from .potential import Potential, potential_from_config

__version__ = "0.1.0"

__all__ = [
    "BOUND_TOL",
    "EXPONENTIAL",
    "POWER_LAW",
    "BoundReport",
    "BridgeLabError",
    "BridgeSolution",
    "ConcavityProfile",
    "ConfigError",
    "DegenerateSeries",
    "DomainError",
    "DomainEscape",
    "EnergyStats",
    "EnvelopeCheck",
    "Gaussian1D",
    "GaussianBridge",
    "GammaExpansion",
    "MaxIterations",
    "MissingPrerequisite",
    "NoConvergence",
    "NonFinite",
    "NonUniformGrid",
    "OffGrid",
    "OutOfRange",
    "Potential",
    "RateFit",
    "SolverOptions",
    "Trajectory",
    "UnsupportedEndpoints",
    "UnsupportedKind",
    "action_cost",
    "bridge_marginal",
    "closed_form_bridge",
    "closed_form_bridge_trajectory",
    "closed_form_cost",
    "closed_form_energy",
    "closed_form_flow",
    "closed_form_solution",
    "concavity_profile",
    "conserved_energy",
    "cumulative_integral",
    "default_steps",
    "defect_field",
    "envelope_check",
    "fit_rate",
    "fluct_param",
    "gamma_expansion",
    "gaussian_cost",
    "gaussian_energy",
    "gradient_flow",
    "heat_flow_distance",
    "heat_flow_gaussian",
    "newton_residual",
    "potential_from_config",
    "rel_entropy_gaussian",
    "reverse_solution",
    "schrodinger_value",
    "solve_bridge",
    "solve_bridge_action",
    "solve_bridge_shooting",
    "verify_bounds",
    "w2_gaussian",
]
