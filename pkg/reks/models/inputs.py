from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator


class GroupSpec(BaseModel):
    preset: Optional[str] = Field(None, description="C1, C2, C3, C4, K4, S3 or Cn")
    table: Optional[List[List[int]]] = Field(
        None, description="Cayley table, table[a][b] is the index of ab"
    )
    name: str = Field("G", description="Display name for a table group")

    @model_validator(mode="after")
    def preset_or_table(self) -> "GroupSpec":
        if (self.preset is None) == (self.table is None):
            raise ValueError("give exactly one of preset or table")
        return self


class GSetKind(str, Enum):
    TRIVIAL = "trivial"
    FREE = "free"
    COSETS = "cosets"
    TABLE = "table"


class GSetSpec(BaseModel):
    kind: GSetKind = Field(GSetKind.TRIVIAL)
    size: int = Field(1, ge=0, description="Points for trivial, orbits for free")
    subgroup: Optional[List[int]] = Field(None, description="H for the coset set G/H")
    action: Optional[List[List[int]]] = Field(
        None, description="action[g][x] is the index of g.x"
    )

    @model_validator(mode="after")
    def kind_has_data(self) -> "GSetSpec":
        if self.kind == GSetKind.COSETS and self.subgroup is None:
            raise ValueError("cosets need a subgroup")
        if self.kind == GSetKind.TABLE and self.action is None:
            raise ValueError("table G-sets need an action table")
        return self


class FaceSpec(BaseModel):
    surjection: List[int] = Field(
        ..., description="Monotone surjection onto [dim target]; empty pairs with a vertex"
    )
    target: str = Field(..., description="Nondegenerate simplex the face degenerates from")


class SimplicialSetSpec(BaseModel):
    """Nondegenerate simplices with faces d_i y = eps^* z."""

    name: str = Field("X")
    simplices: Dict[int, List[str]] = Field(..., description="Nondegenerate simplices by dimension")
    faces: Dict[str, List[FaceSpec]] = Field(default={}, description="Faces d_0..d_k of each k-simplex, k > 0")
    base: Optional[str] = Field(None, description="Basepoint vertex")
    action: Optional[Dict[int, Dict[str, str]]] = Field(
        None, description="action[g][y], identity where omitted"
    )
    involution: Optional[Dict[str, str]] = Field(None, description="Real structure on nondegenerate simplices")

    @model_validator(mode="after")
    def faces_cover_simplices(self) -> "SimplicialSetSpec":
        for k, ys in self.simplices.items():
            for y in ys:
                if k > 0 and len(self.faces.get(y, [])) != k + 1:
                    raise ValueError(f"simplex {y} needs {k + 1} faces")
        return self


class SpaceOp(str, Enum):
    POINT = "point"
    SPHERE = "sphere"
    SIMPLEX = "simplex"
    BOUNDARY = "boundary"
    DISCRETE = "discrete"
    REP_SPHERE = "rep_sphere"
    SUSPENSION = "suspension"
    WEDGE = "wedge"
    SMASH = "smash"
    PRODUCT = "product"
    INDEXED_WEDGE = "indexed_wedge"
    INDEXED_SMASH = "indexed_smash"
    SUBDIVIDE = "sd_e"
    CUSTOM = "custom"


class SpaceRecipe(BaseModel):
    op: SpaceOp = Field(..., description="Construction to apply")
    k: Optional[int] = Field(None, ge=0, description="Dimension for sphere, simplex, boundary")
    pointed: bool = Field(True, description="Add a disjoint basepoint to simplex/boundary")
    gset: Optional[GSetSpec] = Field(None, description="Indexing G-set J or representation I")
    args: List["SpaceRecipe"] = Field(default=[], description="Operands")
    custom: Optional[SimplicialSetSpec] = None


class AbelianGroupSpec(BaseModel):
    preset: Optional[str] = Field(None, description="Z, Z2, Z4, Z4neg or Z2xZ2swap")
    orders: Optional[List[int]] = Field(None, description="Cyclic orders, 0 for Z")
    matrices: Optional[List[List[List[int]]]] = Field(
        None, description="Integer matrix of each group element on generators"
    )

    @model_validator(mode="after")
    def preset_or_orders(self) -> "AbelianGroupSpec":
        if (self.preset is None) == (self.orders is None):
            raise ValueError("give exactly one of preset or orders")
        return self


class MapKind(str, Enum):
    COLLAPSE = "collapse"
    BASEPOINT = "basepoint"
    WEDGE_TO_PRODUCT = "wedge_to_product"


class RingSpec(BaseModel):
    """A finite ring with anti-structure, by preset or by tables on 0..n-1."""

    preset: Optional[str] = Field(None, description="F2, F3, F3neg, Z4, Z4neg, F2x or M2F2")
    add: Optional[List[List[int]]] = Field(None, description="Addition table")
    mul: Optional[List[List[int]]] = Field(None, description="Multiplication table")
    zero: int = Field(0)
    one: int = Field(1)
    w: Optional[List[int]] = Field(None, description="Anti-involution as a permutation of elements")
    eps: Optional[int] = Field(None, description="Unit with w(eps) = eps^-1")
    name: str = Field("A")

    @model_validator(mode="after")
    def preset_or_tables(self) -> "RingSpec":
        tables = (self.add, self.mul, self.w, self.eps)
        if self.preset is None and any(t is None for t in tables):
            raise ValueError("give a preset or all of add, mul, w and eps")
        if self.preset is not None and any(t is not None for t in tables):
            raise ValueError("give exactly one of preset or tables")
        return self


class WallSpec(BaseModel):
    ring: RingSpec = Field(default_factory=lambda: RingSpec(preset="F2"))
    bimodule: str = Field("regular", description="regular, neg or zero")
    rank: int = Field(1, ge=0, description="Largest free rank in the module skeleton")
    p: int = Field(2, ge=0, description="Simplicial degree of S^{2,1}")
    k: int = Field(0, ge=0, description="Swallowing level")


class RunInput(BaseModel):
    preset: Optional[str] = Field(None, description="Named preset instead of explicit data")
    group: GroupSpec = Field(default_factory=lambda: GroupSpec(preset="C1"))
    space: Optional[SpaceRecipe] = None
    map: MapKind = Field(MapKind.COLLAPSE, description="Map measured by conn")
    gset: Optional[GSetSpec] = Field(None, description="Indexing G-set J")
    coefficients: Optional[AbelianGroupSpec] = None
    wall: Optional[WallSpec] = Field(None, description="Ring, bimodule and degrees for Wall checks")
    parameters: Dict[str, Any] = Field(default={})

    @model_validator(mode="after")
    def not_empty(self) -> "RunInput":
        if self.preset is None and self.space is None and self.wall is None and not self.parameters:
            raise ValueError("input names no preset, space, wall data or parameters")
        return self


SpaceRecipe.model_rebuild()
