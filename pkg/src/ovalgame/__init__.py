"""Value of multi-pursuer single-evader games from the evader's dominance region."""
from .costs import Affine, PointDistance, SignedDistanceCost, TerminalCost, WeightedMinDistance, constant
from .defense import sweep_winning_set, winning_indicator
from .dynamics import pursuit_control, simulate
from .errors import (
    InvalidConfig,
    ModeMismatch,
    NoMultiplierFound,
    NotOnBoundary,
    OvalGameError,
    ScenarioError,
    TerminalState,
    UnsupportedDimension,
)
from .geometry import OvalConfig, PursuerParams, margin, rho, smooth_margins
from .scenario import Scenario, load_scenario
from .shapes import Box, Disk, Polygon, Union
from .state import GameState
from .value import CovectorP, SolverOptions, ValueResult, gradient_set, oracle_value, solve_value, value_of
from .viscosity import check_pde_at, hamiltonian

__version__ = "0.1.0"

__all__ = [
    "Affine",
    "Box",
    "check_pde_at",
    "constant",
    "CovectorP",
    "Disk",
    "GameState",
    "gradient_set",
    "hamiltonian",
    "InvalidConfig",
    "load_scenario",
    "margin",
    "ModeMismatch",
    "NoMultiplierFound",
    "NotOnBoundary",
    "oracle_value",
    "OvalConfig",
    "OvalGameError",
    "PointDistance",
    "Polygon",
    "PursuerParams",
    "pursuit_control",
    "rho",
    "Scenario",
    "ScenarioError",
    "SignedDistanceCost",
    "simulate",
    "smooth_margins",
    "solve_value",
    "SolverOptions",
    "sweep_winning_set",
    "TerminalCost",
    "TerminalState",
    "Union",
    "UnsupportedDimension",
    "value_of",
    "ValueResult",
    "WeightedMinDistance",
    "winning_indicator",
]
