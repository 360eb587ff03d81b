"""Go-heuristic sensor placement on a lattice, with density/coverage analytics
and Monte Carlo checks of the closed forms."""

from gowsn.analytics import (
    CoverageModel,
    DensityParams,
    StoppingRule,
    connectivity_probability,
    coverage_binomial,
    coverage_poisson,
    density,
    p_r,
    shaping,
    stopping_n,
    tv_distance,
)
from gowsn.errors import BoardExhausted, GowsnError, InvalidConfig, InvalidParams
from gowsn.field_model import Deployment, FieldSpec, GridBoard, GridPoint, make_board
from gowsn.heuristics import Heuristic, HeuristicSet, builtin_catalog, random_select
from gowsn.placement import PlacementConfig, PlacementResult, go_heuristics_place, uniform_random_place

__version__ = "0.1.0"

__all__ = [
    "BoardExhausted",
    "CoverageModel",
    "DensityParams",
    "Deployment",
    "FieldSpec",
    "GowsnError",
    "GridBoard",
    "GridPoint",
    "Heuristic",
    "HeuristicSet",
    "InvalidConfig",
    "InvalidParams",
    "PlacementConfig",
    "PlacementResult",
    "StoppingRule",
    "builtin_catalog",
    "connectivity_probability",
    "coverage_binomial",
    "coverage_poisson",
    "density",
    "go_heuristics_place",
    "make_board",
    "p_r",
    "random_select",
    "shaping",
    "stopping_n",
    "tv_distance",
    "uniform_random_place",
]
