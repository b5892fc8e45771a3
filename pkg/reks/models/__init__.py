from .inputs import (
    AbelianGroupSpec,
    GroupSpec,
    GSetSpec,
    RingSpec,
    RunInput,
    SimplicialSetSpec,
    SpaceRecipe,
    WallSpec,
)
from .reports import (
    BredonReport,
    CheckReport,
    CheckStatus,
    Counterexample,
    HomologyGroup,
    HomologyReport,
    RunReport,
    SubgroupHomology,
)


__all__ = [
    "AbelianGroupSpec",
    "BredonReport",
    "CheckReport",
    "CheckStatus",
    "Counterexample",
    "GSetSpec",
    "GroupSpec",
    "HomologyGroup",
    "HomologyReport",
    "RingSpec",
    "RunInput",
    "RunReport",
    "SimplicialSetSpec",
    "SpaceRecipe",
    "SubgroupHomology",
    "WallSpec",
]
