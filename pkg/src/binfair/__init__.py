"""Nash welfare approximation and fairness audits for binary XOS / subadditive valuations."""

from .core import (
    Allocation,
    DimensionError,
    Instance,
    InvalidAllocation,
    is_envy_free,
    is_non_wasteful,
    nash_welfare,
    social_welfare,
    value_profile,
)
from .nsw_alg import SolveResult, SolveTrace, initial_matching, pad_with_dummies, solve
from .valuations import (
    CountingOracle,
    PlantedSubadditive,
    Spectrum,
    SubadditivePQ,
    XOSFamily,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "CountingOracle",
    "DimensionError",
    "Instance",
    "InvalidAllocation",
    "PlantedSubadditive",
    "SolveResult",
    "SolveTrace",
    "Spectrum",
    "SubadditivePQ",
    "XOSFamily",
    "initial_matching",
    "is_envy_free",
    "is_non_wasteful",
    "nash_welfare",
    "pad_with_dummies",
    "social_welfare",
    "solve",
    "value_profile",
]
