from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field, field_validator


ConnValue = Union[int, str]


class CheckStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    WINDOW_LIMITED = "window_limited"


class HomologyGroup(BaseModel):
    degree: int = Field(..., description="Homological degree")
    betti: int = Field(0, description="Rank of the free part")
    torsion: List[int] = Field(
        default=[], description="Torsion coefficients, each dividing the next"
    )

    @field_validator("torsion")
    @classmethod
    def torsion_divides(cls, v: List[int]) -> List[int]:
        for a, b in zip(v, v[1:]):
            if a < 2 or b % a != 0:
                raise ValueError(f"torsion {v} is not a divisibility chain")
        if v and v[-1] < 2:
            raise ValueError(f"torsion {v} contains a unit")
        return v

    def is_zero(self) -> bool:
        return self.betti == 0 and not self.torsion

    def label(self) -> str:
        parts = ["Z"] * self.betti + [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"


class HomologyReport(BaseModel):
    groups: List[HomologyGroup] = Field(
        default=[], description="One entry per degree 0..window-1"
    )
    window: int = Field(..., description="Degrees strictly below this are computed")
    coefficients: str = Field("Z", description="Z, Q or GF(p)")

    def degree(self, n: int) -> HomologyGroup:
        if 0 <= n < len(self.groups):
            return self.groups[n]
        return HomologyGroup(degree=n)

    def is_zero(self) -> bool:
        return all(g.is_zero() for g in self.groups)

    def lowest_nonzero(self) -> Optional[int]:
        for g in self.groups:
            if not g.is_zero():
                return g.degree
        return None

    def summary(self) -> Dict[str, str]:
        return {str(g.degree): g.label() for g in self.groups}


class SubgroupHomology(BaseModel):
    subgroup: str = Field(..., description="Subgroup class label")
    order: int = Field(..., description="Order of the subgroup")
    report: HomologyReport


class BredonReport(BaseModel):
    group: str = Field(..., description="Acting group")
    coefficients: str = Field(..., description="Coefficient G-abelian group")
    space: str = Field(..., description="Space description")
    subgroups: List[SubgroupHomology] = Field(default=[])


class Counterexample(BaseModel):
    message: str = Field(..., description="Which identity failed")
    location: Dict[str, Any] = Field(
        default={}, description="Offending simplex, element or object"
    )
    expected: Optional[str] = None
    actual: Optional[str] = None


class CheckReport(BaseModel):
    name: str = Field(..., description="Check identifier")
    status: CheckStatus = Field(CheckStatus.PASS)
    checked: int = Field(0, description="Number of instances examined")
    details: Dict[str, Any] = Field(default={})
    counterexample: Optional[Counterexample] = None

    @property
    def passed(self) -> bool:
        return self.status != CheckStatus.FAIL

    @classmethod
    def failure(
        cls, name: str, message: str, checked: int = 0, **location: Any
    ) -> "CheckReport":
        return cls(
            name=name,
            status=CheckStatus.FAIL,
            checked=checked,
            counterexample=Counterexample(
                message=message, location={k: repr(v) for k, v in location.items()}
            ),
        )


class RunReport(BaseModel):
    command: str = Field(..., description="CLI command that produced the report")
    version: str = Field(..., description="reks version")
    seed: int = Field(0)
    dim: int = Field(..., description="Truncation window")
    checks: List[CheckReport] = Field(default=[])
    results: Dict[str, Any] = Field(default={})

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self) -> Optional[CheckReport]:
        for c in self.checks:
            if not c.passed:
                return c
        return None


def conn_value(v: Any) -> ConnValue:
    """Encode a connectivity value (int or +-inf) for JSON."""
    if isinstance(v, float):
        return "inf" if v > 0 else "-inf"
    if isinstance(v, Fraction) and v.denominator != 1:
        return str(v)
    return int(v)
