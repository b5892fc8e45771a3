from typing import Any, Callable, Dict, List, Optional, Tuple

import structlog

from ..core.config import settings
from ..core.exceptions import SchemaError
from ..doldthom import GAbelianGroup
from ..dualcat import Bimodule, DualityData, FinCat, swap_duality, trivial_duality
from ..equivariance import FiniteGroup, FiniteGSet
from ..models.inputs import (
    AbelianGroupSpec,
    GroupSpec,
    GSetKind,
    GSetSpec,
    RingSpec,
    RunInput,
    SimplicialSetSpec,
    SpaceOp,
    SpaceRecipe,
)
from ..sset import (
    SimplicialSet,
    boundary,
    discrete,
    edgewise_subdivide,
    from_nondegenerate,
    indexed_smash,
    indexed_wedge,
    point,
    product,
    rep_sphere,
    simplex,
    smash,
    sphere,
    suspension,
    wedge,
)
from ..wall import FiniteRing, WallBimodule, WallRing, hm_bimodule, mod_cat_skeleton


logger = structlog.get_logger()


# Named runs: each is a RunInput payload
SCENARIOS: Dict[str, Dict[str, Any]] = {
    "z4neg-s11-freeorbit": {
        "group": {"preset": "C2"},
        "space": {"op": "sd_e", "args": [{"op": "sphere", "k": 1}]},
        "gset": {"kind": "free", "size": 1},
        "coefficients": {"preset": "Z4neg"},
    },
    "s11": {
        "group": {"preset": "C2"},
        "space": {"op": "sd_e", "args": [{"op": "sphere", "k": 1}]},
        "coefficients": {"preset": "Z"},
    },
    "s2rho": {
        "group": {"preset": "C2"},
        "space": {"op": "rep_sphere", "gset": {"kind": "free", "size": 1}},
        "gset": {"kind": "free", "size": 1},
        "coefficients": {"preset": "Z"},
    },
    "s2-trivial": {
        "group": {"preset": "C2"},
        "space": {"op": "sphere", "k": 2},
        "gset": {"kind": "trivial", "size": 2},
        "coefficients": {"preset": "Z2xZ2swap"},
    },
    "c3-cosets": {
        "group": {"preset": "S3"},
        "space": {"op": "sphere", "k": 2},
        "gset": {"kind": "cosets", "subgroup": [0, 1]},
        "coefficients": {"preset": "Z"},
    },
    "f2-regular": {"wall": {"ring": {"preset": "F2"}, "bimodule": "regular", "rank": 1, "p": 2}},
    "f3neg-regular": {"wall": {"ring": {"preset": "F3neg"}, "bimodule": "regular", "rank": 1, "p": 2}},
    "f2x-regular": {"wall": {"ring": {"preset": "F2x"}, "bimodule": "regular", "rank": 1, "p": 2}},
    "groupoid2": {"parameters": {"category": "groupoid2", "k": 1}},
    "bz2": {"parameters": {"category": "bz2", "k": 1}},
    "pf2": {"parameters": {"category": "pf2", "k": 0}},
}

CATEGORY_PRESETS = ["groupoid2", "bz2", "bz3", "pf2", "pf3neg"]


class PresetService:
    """Builds library objects from input schemas and named presets."""

    def __init__(self, dim: Optional[int] = None):
        self.dim = dim if dim is not None else settings.MAX_DIM

    # Whole inputs

    def scenario(self, name: str) -> RunInput:
        if name not in SCENARIOS:
            raise SchemaError(f"unknown preset {name!r}; known: {', '.join(sorted(SCENARIOS))}")
        return RunInput(**SCENARIOS[name])

    def resolve(self, run: RunInput) -> RunInput:
        """Fill a run from its named preset; explicit fields win."""
        if run.preset is None:
            return run
        base = self.scenario(run.preset).model_dump(exclude_unset=True)
        base.update(run.model_dump(exclude_unset=True, exclude={"preset"}))
        logger.debug("preset_resolved", preset=run.preset, fields=sorted(base))
        return RunInput(**base)

    # Groups and G-sets

    def group(self, spec: GroupSpec) -> FiniteGroup:
        if spec.preset is not None:
            return FiniteGroup.preset(spec.preset)
        return FiniteGroup(spec.table, name=spec.name)

    def gset(self, spec: GSetSpec, group: FiniteGroup) -> FiniteGSet:
        if spec.kind == GSetKind.TRIVIAL:
            return FiniteGSet.trivial(group, spec.size)
        if spec.kind == GSetKind.FREE:
            return FiniteGSet.free(group, spec.size)
        if spec.kind == GSetKind.COSETS:
            return FiniteGSet.cosets(group, spec.subgroup)
        return FiniteGSet(group, spec.action)

    def coefficients(self, spec: Optional[AbelianGroupSpec], group: FiniteGroup) -> GAbelianGroup:
        if spec is None:
            return GAbelianGroup.preset("Z", group)
        if spec.preset is not None:
            return GAbelianGroup.preset(spec.preset, group)
        return GAbelianGroup(group, spec.orders, spec.matrices, name="M")

    # Spaces

    def space(self, recipe: SpaceRecipe, group: FiniteGroup, dim: Optional[int] = None) -> SimplicialSet:
        dim = self.dim if dim is None else dim
        op = recipe.op
        args = recipe.args

        def need_k() -> int:
            if recipe.k is None:
                raise SchemaError(f"{op.value} needs k")
            return recipe.k

        def need_gset() -> FiniteGSet:
            if recipe.gset is None:
                raise SchemaError(f"{op.value} needs a gset")
            return self.gset(recipe.gset, group)

        def operands(n: int) -> List[SimplicialSet]:
            if len(args) < n:
                raise SchemaError(f"{op.value} needs {n} operand(s), got {len(args)}")
            return [self.space(a, group, dim) for a in args]

        if op == SpaceOp.POINT:
            return point(dim, group)
        if op == SpaceOp.SPHERE:
            return sphere(need_k(), dim, group)
        if op == SpaceOp.SIMPLEX:
            return self._with_group(simplex(need_k(), dim, recipe.pointed), group)
        if op == SpaceOp.BOUNDARY:
            return self._with_group(boundary(need_k(), dim, recipe.pointed), group)
        if op == SpaceOp.DISCRETE:
            return discrete(need_gset(), dim)
        if op == SpaceOp.REP_SPHERE:
            return rep_sphere(need_gset(), dim)
        if op == SpaceOp.SUSPENSION:
            return suspension(operands(1)[0])
        if op in (SpaceOp.WEDGE, SpaceOp.SMASH, SpaceOp.PRODUCT):
            spaces = operands(2)
            combine: Callable = {SpaceOp.WEDGE: wedge, SpaceOp.SMASH: smash, SpaceOp.PRODUCT: product}[op]
            out = spaces[0]
            for X in spaces[1:]:
                out = combine(out, X)
            return out
        if op == SpaceOp.INDEXED_WEDGE:
            return indexed_wedge(operands(1)[0], need_gset())
        if op == SpaceOp.INDEXED_SMASH:
            return indexed_smash(operands(1)[0], need_gset())
        if op == SpaceOp.SUBDIVIDE:
            if group != FiniteGroup.cyclic(2):
                raise SchemaError("sd_e produces a C2-space; set group to C2")
            if len(args) != 1:
                raise SchemaError("sd_e takes one Real operand")
            Z = self.space(args[0], FiniteGroup.cyclic(1), 2 * dim + 1)
            return edgewise_subdivide(Z)
        if recipe.custom is None:
            raise SchemaError("custom spaces need a custom block")
        return self.custom(recipe.custom, group, dim)

    @staticmethod
    def _with_group(X: SimplicialSet, group: FiniteGroup) -> SimplicialSet:
        return X if group.order == 1 else X.with_group(group)

    def custom(self, spec: SimplicialSetSpec, group: FiniteGroup, dim: int) -> SimplicialSet:
        faces = {
            y: [(tuple(f.surjection), f.target) for f in fs] for y, fs in spec.faces.items()
        }
        action = None
        if spec.action is not None:
            action = {int(g): table for g, table in spec.action.items()}
        return from_nondegenerate(
            dim,
            {int(k): ys for k, ys in spec.simplices.items()},
            faces,
            base=spec.base,
            group=group,
            action=action,
            involution=spec.involution,
            name=spec.name,
        )

    # Rings and bimodules

    def ring(self, spec: RingSpec) -> WallRing:
        if spec.preset is not None:
            A = WallRing.preset(spec.preset)
        else:
            R = FiniteRing(spec.add, spec.mul, spec.zero, spec.one, name=spec.name)
            A = WallRing(R, spec.w, spec.eps, name=spec.name)
        return A.validate()

    def bimodule(self, A: WallRing, name: str) -> WallBimodule:
        return WallBimodule.preset(A, name).validate()

    # Categories with duality

    def category(self, name: str) -> Tuple[DualityData, Bimodule]:
        """A duality with a bimodule carrying J; only pf3neg is not strict."""
        if name == "groupoid2":
            C = FinCat.indiscrete(2)
            duality = swap_duality(C)
            return duality, Bimodule.character(C, 2, duality=duality)
        if name in ("bz2", "bz3"):
            n = int(name[2])
            C = FinCat.from_group(FiniteGroup.cyclic(n))
            duality = trivial_duality(C)
            return duality, Bimodule.character(C, n, duality=duality)
        if name in ("pf2", "pf3neg"):
            A = WallRing.preset("F2" if name == "pf2" else "F3neg")
            skeleton = mod_cat_skeleton(A, 1)
            return skeleton.duality, hm_bimodule(WallBimodule.regular(A), skeleton)
        raise SchemaError(f"unknown category preset {name!r}; known: {', '.join(CATEGORY_PRESETS)}")

