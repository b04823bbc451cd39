"""
lvanish: exact vanishing tests for products of twisted central L-values.

The library enumerates binary quadratic forms at rational points, weights
them by generalized genus characters, applies Hecke operators exactly and
compares the resulting local polynomial along Gamma_0(N) orbits.
"""

__version__ = "1.0.0"

from .arith import Discriminant, kronecker, pell_fundamental
from .errors import (
    ConfigError,
    CostLimitError,
    GeodesicProximityError,
    LVanishError,
    PoleError,
    SearchBudgetError,
    ValidationError,
)
from .gamma0 import build_context, decompose, evaluation_points
from .genus import chi
from .localpoly import HeckeSpec, LocalPolyParams, nonconst_sum, weighted_poly, zagier_sum
from .qforms import GL2Matrix, QuadForm, enumerate_at_rational
from .vanish import VanishJob, Verdict, decide

__all__ = [
    "__version__",
    "ConfigError",
    "CostLimitError",
    "Discriminant",
    "GL2Matrix",
    "GeodesicProximityError",
    "HeckeSpec",
    "LVanishError",
    "LocalPolyParams",
    "PoleError",
    "QuadForm",
    "SearchBudgetError",
    "ValidationError",
    "VanishJob",
    "Verdict",
    "build_context",
    "chi",
    "decide",
    "decompose",
    "enumerate_at_rational",
    "evaluation_points",
    "kronecker",
    "nonconst_sum",
    "pell_fundamental",
    "weighted_poly",
    "zagier_sum",
]
