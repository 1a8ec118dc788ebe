"""Exact symbolic engine for normal-ordered ladder-operator polynomials."""

from .brackets import (
    BracketFunctional,
    bracket_from_commutator,
    commutator_expectation,
    expectation,
    grid_functional,
    mean_momentum,
    mean_position,
    stochastic_bracket,
)
from .lorentz import (
    TruncationError,
    UnsupportedComponentError,
    anomaly_coefficient,
    anomaly_report,
    anomaly_value_direct,
    lorentz_generator,
)
from .operators import (
    ModeCutoffError,
    OperatorExpr,
    annihilation,
    commutator,
    creation,
    identity,
    momentum,
    position,
)
from .scalars import Coeff, PolyDA, solve_affine_system

__all__ = [
    "BracketFunctional",
    "Coeff",
    "ModeCutoffError",
    "OperatorExpr",
    "PolyDA",
    "TruncationError",
    "UnsupportedComponentError",
    "annihilation",
    "anomaly_coefficient",
    "anomaly_report",
    "anomaly_value_direct",
    "bracket_from_commutator",
    "commutator",
    "commutator_expectation",
    "creation",
    "expectation",
    "grid_functional",
    "identity",
    "lorentz_generator",
    "mean_momentum",
    "mean_position",
    "momentum",
    "position",
    "solve_affine_system",
    "stochastic_bracket",
]
