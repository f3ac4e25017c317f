"""Porous sets, regular Cantor embeddings, fractal uncertainty numerics and
horocycle dynamics on a hyperbolic surface."""

from .errors import (
    ConstructionError,
    ConvergenceError,
    FuplabError,
    InvalidInputError,
    NumericalError,
    ReductionError,
    ResourceError,
    WitnessError,
)
from .interval_sets import (
    Interval,
    IntervalSet,
    cantor_set,
    largest_gap,
    neighborhood,
    normalize,
    porosity_check,
    random_porous,
)
from .regular_sets import CantorTree, RegularMeasure, containment_check, embed_porous, regularity_check
from .words import controlled_set_size, count_X, density, derive_params, xy_membership

__version__ = "0.1.0"

__all__ = [
    "CantorTree",
    "ConstructionError",
    "ConvergenceError",
    "FuplabError",
    "Interval",
    "IntervalSet",
    "InvalidInputError",
    "NumericalError",
    "ReductionError",
    "RegularMeasure",
    "ResourceError",
    "WitnessError",
    "cantor_set",
    "containment_check",
    "controlled_set_size",
    "count_X",
    "density",
    "derive_params",
    "embed_porous",
    "largest_gap",
    "neighborhood",
    "normalize",
    "porosity_check",
    "random_porous",
    "regularity_check",
    "xy_membership",
    "__version__",
]
