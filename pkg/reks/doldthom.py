"""
Equivariant Dold-Thom construction M(X) for finitely generated abelian groups
with a G-action.

M is presented as Z^r / R with R = diag(orders) Z^r (order 0 meaning a free
summand) and G acting through integer matrices that preserve R. Level n of
M(X) is the direct sum of copies of M over the non-base simplices of X_n;
structure maps push labels forward and add them up.

The fixed points M(X)^H are computed two ways: orbit by orbit, using
M^{H_x} on a representative of each H-orbit, and directly as the H-fixed
part of the permutation representation on each orbit block. Both routes
produce presented chain complexes whose homology is the Moore homology of
the fixed simplicial abelian group.
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import structlog
from sympy.polys.domains import QQ, ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import hermite_normal_form, smith_normal_decomp

from .core.config import settings
from .core.exceptions import GroupMismatchError, ValidationError, check_bound
from .equivariance import ConnFn, FiniteGroup, FiniteGSet, preserves_connectivity
from .homology import (
    ChainComplex,
    ChainMap,
    PresentedComplex,
    connectivity,
    equivariant_space_conn,
    from_dod,
    homology,
    induced_rank,
    mapping_cone,
    zeros,
)
from .models.reports import BredonReport, CheckReport, CheckStatus, HomologyReport, SubgroupHomology
from .sset import SimplicialMap, SimplicialSet, cofiber, indexed_wedge


logger = structlog.get_logger()

Vector = Tuple[int, ...]
Element = Dict[int, Vector]
Matrix = List[List[int]]


def _identity(r: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(r)] for i in range(r)]


def _apply(A: Matrix, v: Sequence[int]) -> List[int]:
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def fixed_lattice(orders: Sequence[int], matrices: Sequence[Matrix]) -> DomainMatrix:
    """
    Basis (as columns) of {v in Z^r : (A - I) v in R for every A}, where
    R = diag(orders) Z^r. Its image in Z^r / R is the fixed subgroup.
    """
    r = len(orders)
    moving = [A for A in matrices if A != _identity(r)]
    if not moving:
        return DomainMatrix.eye(r, ZZ).to_dense()
    width = r + r * len(moving)
    rows = []
    for a, A in enumerate(moving):
        for i in range(r):
            row = [0] * width
            for j in range(r):
                row[j] = A[i][j] - (1 if i == j else 0)
            row[r + a * r + i] = -orders[i]
            rows.append(row)
    system = DomainMatrix.from_list(rows, ZZ)
    D, _, T = smith_normal_decomp(system)
    diagonal = D.to_list()
    rank = sum(1 for k in range(min(len(rows), width)) if diagonal[k][k])
    T_rows = T.to_list()
    gens = [[int(T_rows[i][c]) for c in range(rank, width)] for i in range(r)]
    if not gens or not gens[0] or all(v == 0 for row in gens for v in row):
        return zeros(r, 0).to_dense()
    return hermite_normal_form(DomainMatrix.from_list(gens, ZZ)).to_dense()


class Lattice:
    """A lattice with a basis B (columns) and exact coordinates through a rational left inverse."""

    def __init__(self, basis: DomainMatrix):
        self.basis = basis
        self.dim, self.rank = basis.shape
        rows = basis.to_list()
        self.columns: List[Vector] = [tuple(int(row[c]) for row in rows) for c in range(self.rank)]
        self._left_inverse = None
        if self.rank:
            Bq = basis.convert_to(QQ)
            left = (Bq.transpose() * Bq).inv() * Bq.transpose()
            self._left_inverse = [[Fraction(int(e.numerator), int(e.denominator)) for e in row] for row in left.to_list()]

    def coordinates(self, v: Sequence[int]) -> List[int]:
        if not self.rank:
            if any(v):
                raise ValidationError("vector outside the zero lattice", {"vector": list(v)})
            return []
        coords = []
        for row in self._left_inverse:
            c = sum(a * x for a, x in zip(row, v))
            if c.denominator != 1:
                raise ValidationError("vector is not in the lattice", {"vector": list(v)})
            coords.append(int(c))
        rebuilt = [sum(col[i] * c for col, c in zip(self.columns, coords)) for i in range(self.dim)]
        if rebuilt != list(v):
            raise ValidationError("vector is not in the lattice", {"vector": list(v)})
        return coords


class GAbelianGroup:
    """Z^r / diag(orders) with G acting by the integer matrices matrices[g]."""

    def __init__(
        self,
        group: FiniteGroup,
        orders: Sequence[int],
        matrices: Optional[Sequence[Matrix]] = None,
        name: str = "M",
    ):
        self.group = group
        self.orders = [int(d) for d in orders]
        self.matrices = [
            [list(map(int, row)) for row in A]
            for A in (matrices or [_identity(len(self.orders))] * group.order)
        ]
        self.name = name
        self._fixed_cache: Dict[FrozenSet[int], Lattice] = {}
        self.validate()

    @property
    def rank(self) -> int:
        return len(self.orders)

    @property
    def is_finite(self) -> bool:
        return all(d > 0 for d in self.orders)

    @property
    def order(self) -> int:
        result = 1
        for d in self.orders:
            result *= d
        return result

    def validate(self) -> "GAbelianGroup":
        r = self.rank
        if any(d < 0 or d == 1 for d in self.orders):
            raise ValidationError("orders must be 0 or at least 2", {"orders": self.orders})
        if len(self.matrices) != self.group.order or any(
            len(A) != r or any(len(row) != r for row in A) for A in self.matrices
        ):
            raise ValidationError("one r x r matrix per group element is required")
        for g, A in enumerate(self.matrices):
            for j, d in enumerate(self.orders):
                image = [A[i][j] * d for i in range(r)]
                if self.reduce(image) != (0,) * r:
                    raise ValidationError("action does not preserve the relations", {"g": g, "generator": j})
        basis = [tuple(1 if i == j else 0 for i in range(r)) for j in range(r)]
        for e in basis:
            if self.act(self.group.identity, e) != e:
                raise ValidationError("identity does not act trivially", {"generator": e})
        for g, h in itertools.product(self.group.elements, repeat=2):
            for e in basis:
                if self.act(self.group.mul(g, h), e) != self.act(g, self.act(h, e)):
                    raise ValidationError("action is not a homomorphism", {"g": g, "h": h, "generator": e})
        return self

    def reduce(self, v: Sequence[int]) -> Vector:
        return tuple(x % d if d else x for x, d in zip(v, self.orders))

    def act(self, g: int, v: Sequence[int]) -> Vector:
        return self.reduce(_apply(self.matrices[g], v))

    def add(self, a: Sequence[int], b: Sequence[int]) -> Vector:
        return self.reduce([x + y for x, y in zip(a, b)])

    def zero(self) -> Vector:
        return (0,) * self.rank

    def unit(self, t: int) -> Vector:
        return tuple(1 if i == t else 0 for i in range(self.rank))

    def elements(self) -> List[Vector]:
        if not self.is_finite:
            raise ValidationError(f"{self.name} is infinite")
        check_bound("ENUMERATION_LIMIT", settings.ENUMERATION_LIMIT, self.order)
        return [tuple(v) for v in itertools.product(*(range(d) for d in self.orders))]

    def fixed_basis(self, subgroup) -> Lattice:
        """Lattice L_K with L_K / R = M^K."""
        key = frozenset(subgroup)
        if key not in self._fixed_cache:
            self._fixed_cache[key] = Lattice(
                fixed_lattice(self.orders, [self.matrices[h] for h in sorted(key)])
            )
        return self._fixed_cache[key]

    def fixed_subgroup(self, subgroup) -> List[Vector]:
        """Elements of M^K, by enumeration (finite M only)."""
        sub = frozenset(subgroup)
        return [v for v in self.elements() if all(self.act(h, v) == v for h in sub)]

    def __repr__(self) -> str:
        return f"GAbelianGroup({self.name}, orders={self.orders}, group={self.group.name})"

    # Presets

    @classmethod
    def preset(cls, name: str, group: FiniteGroup) -> "GAbelianGroup":
        if name == "Z":
            return cls(group, [0], name="Z")
        if name in ("Z2", "Z3", "Z4"):
            return cls(group, [int(name[1:])], name=name)
        if name == "Z4neg":
            return cls(group, [4], _sign_matrices(group, [[-1]]), name="Z4neg")
        if name == "Zneg":
            return cls(group, [0], _sign_matrices(group, [[-1]]), name="Zneg")
        if name == "Z2xZ2swap":
            return cls(group, [2, 2], _sign_matrices(group, [[0, 1], [1, 0]]), name="Z2xZ2swap")
        raise ValidationError(f"unknown coefficient preset {name!r}")


def _sign_matrices(group: FiniteGroup, twist: Matrix) -> List[Matrix]:
    if group.order != 2:
        raise ValidationError(f"twisted coefficients are defined over C2, got {group.name}")
    r = len(twist)
    return [twist if g != group.identity else _identity(r) for g in group.elements]


def resolve_subgroup(group: FiniteGroup, key=None) -> FrozenSet[int]:
    """None for the trivial subgroup, a class index or label, or an explicit subgroup."""
    if key is None:
        return frozenset({group.identity})
    if isinstance(key, (int, str)):
        lattice = group.lattice
        return lattice.representative(lattice.class_index(key))
    sub = frozenset(key)
    if not group.is_subgroup(sub):
        raise ValidationError("not a subgroup", {"subset": sorted(sub)})
    return sub


@dataclass
class Orbit:
    rep: int
    members: List[int]
    coset: Dict[int, int]
    stabilizer: FrozenSet[int]


def _orbit_of(X: SimplicialSet, n: int, x: int, sub: FrozenSet[int]) -> Orbit:
    coset: Dict[int, int] = {}
    for h in sorted(sub):
        coset.setdefault(X.act[n][h][x], h)
    return Orbit(
        rep=x,
        members=sorted(coset),
        coset=coset,
        stabilizer=frozenset(h for h in sub if X.act[n][h][x] == x),
    )


def orbit_decomposition(
    X: SimplicialSet,
    n: int,
    sub: FrozenSet[int],
    simplices: Sequence[int],
    reps: Optional[Sequence[int]] = None,
) -> List[Orbit]:
    """H-orbits of the given simplices, with the given representatives first."""
    seen = set()
    result = []
    for x in list(reps or []) + list(simplices):
        if x in seen:
            continue
        orbit = _orbit_of(X, n, x, sub)
        seen.update(orbit.members)
        result.append(orbit)
    if not seen <= set(simplices):
        raise ValidationError("representatives fall outside the simplex set", {"level": n})
    return result


class DTSpace:
    """M(X): elements at level n are {simplex index: label vector}, base dropped."""

    def __init__(self, M: GAbelianGroup, X: SimplicialSet):
        if M.group != X.group:
            raise GroupMismatchError(f"{M.name} over {M.group.name}, {X.name} over {X.group.name}")
        if not X.pointed:
            raise ValidationError(f"{X.name} is not pointed")
        self.M = M
        self.X = X
        self.name = f"{M.name}({X.name})"

    @property
    def dim(self) -> int:
        return self.X.dim

    @property
    def group(self) -> FiniteGroup:
        return self.X.group

    def generators(self, n: int) -> List[Tuple[int, int]]:
        return [(x, t) for x in self.X.nonbase(n) for t in range(self.M.rank)]

    def generator(self, n: int, x: int, t: int) -> Element:
        return self.collect(n, [(x, self.M.unit(t))])

    def collect(self, n: int, pairs) -> Element:
        """Sum labels per simplex, dropping the basepoint and zeros."""
        total: Dict[int, List[int]] = {}
        for x, m in pairs:
            if self.X.is_base(n, x):
                continue
            acc = total.setdefault(x, [0] * self.M.rank)
            for k, v in enumerate(m):
                acc[k] += v
        result = {}
        for x, acc in total.items():
            v = self.M.reduce(acc)
            if any(v):
                result[x] = v
        return result

    def face(self, n: int, i: int, v: Element) -> Element:
        return self.collect(n - 1, ((self.X.face(n, i, x), m) for x, m in v.items()))

    def degeneracy(self, n: int, i: int, v: Element) -> Element:
        return self.collect(n + 1, ((self.X.degeneracy(n, i, x), m) for x, m in v.items()))

    def act(self, g: int, n: int, v: Element) -> Element:
        return self.collect(n, ((self.X.act[n][g][x], self.M.act(g, m)) for x, m in v.items()))

    def is_fixed(self, n: int, v: Element, subgroup) -> bool:
        return all(self.act(h, n, v) == v for h in subgroup)

    def fixed(self, subgroup=None) -> "FixedDT":
        return FixedDT(self, resolve_subgroup(self.group, subgroup))

    def moore_complex(self, subgroup=None) -> PresentedComplex:
        return orbit_moore_complex(self, resolve_subgroup(self.group, subgroup))[0]

    def lattice_moore_complex(self, subgroup=None) -> PresentedComplex:
        return lattice_moore_complex(self, resolve_subgroup(self.group, subgroup))

    def __repr__(self) -> str:
        return f"DTSpace({self.name}, dim={self.dim})"


def dold_thom(M: GAbelianGroup, X: SimplicialSet) -> DTSpace:
    return DTSpace(M, X)


def transfer(f: SimplicialMap, M: GAbelianGroup, n: int, v: Element) -> Element:
    """f_*: the label of y is the sum of the labels on f^{-1}(y)."""
    return DTSpace(M, f.target).collect(n, ((f(n, x), m) for x, m in v.items()))


def check_transfer_functoriality(M: GAbelianGroup, f: SimplicialMap, g: SimplicialMap) -> CheckReport:
    """(g o f)_* = g_* o f_* on every generator."""
    gf = g.compose(f)
    source = DTSpace(M, f.source)
    checked = 0
    for n in range(f.source.dim + 1):
        for x, t in source.generators(n):
            v = source.generator(n, x, t)
            left = transfer(gf, M, n, v)
            right = transfer(g, M, n, transfer(f, M, n, v))
            checked += 1
            if left != right:
                return CheckReport.failure(
                    "transfer_functoriality", "(g o f)_* differs from g_* o f_*", checked,
                    level=n, simplex=f.source.label(n, x), coordinate=t,
                )
    return CheckReport(name="transfer_functoriality", checked=checked)


class FixedDT:
    """
    The orbit formula for M(X)^H: level n is the sum over H-orbits [x] of
    non-base simplices of M^{H_x}, with phi(m) = sum over cosets of h.m at h x.
    """

    def __init__(self, dt: DTSpace, subgroup: FrozenSet[int]):
        self.dt = dt
        self.subgroup = subgroup
        X = dt.X
        self.levels: List[List[Orbit]] = [
            orbit_decomposition(X, n, subgroup, X.nonbase(n)) for n in range(X.dim + 1)
        ]

    def lattice(self, orbit: Orbit) -> Lattice:
        return self.dt.M.fixed_basis(orbit.stabilizer)

    def rank(self, n: int) -> int:
        return sum(self.lattice(o).rank for o in self.levels[n])

    def phi(self, n: int, orbit: Orbit, m: Sequence[int]) -> Element:
        M = self.dt.M
        return self.dt.collect(n, ((z, M.act(h, m)) for z, h in orbit.coset.items()))

    def pi(self, n: int, v: Element) -> List[Tuple[Orbit, Vector]]:
        return [(o, v.get(o.rep, self.dt.M.zero())) for o in self.levels[n]]

    def face(self, n: int, i: int, orbit: Orbit, m: Sequence[int]) -> Element:
        """d_i by the orbit formula, returned through phi."""
        X, M = self.dt.X, self.dt.M
        by_rep: Dict[int, Orbit] = {o.rep: o for o in self.levels[n - 1]}
        acc: Dict[int, List[int]] = {}
        for z, h in orbit.coset.items():
            y = X.face(n, i, z)
            if y in by_rep:
                total = acc.setdefault(y, [0] * M.rank)
                for k, val in enumerate(_apply(M.matrices[h], m)):
                    total[k] += val
        result: Element = {}
        for y, total in acc.items():
            for z, label in self.phi(n - 1, by_rep[y], M.reduce(total)).items():
                result[z] = label
        return result

    def verify(self, levels: Optional[int] = None) -> CheckReport:
        """
        Check phi against the fixed points of each orbit block: images are
        fixed, the block's fixed lattice is hit exactly, and faces agree with
        the orbit formula.
        """
        dt, M, X = self.dt, self.dt.M, self.dt.X
        name = "dt_fixed_comparison"
        top = X.dim if levels is None else min(levels, X.dim)
        checked = 0
        for n in range(top + 1):
            for orbit in self.levels[n]:
                lattice = self.lattice(orbit)
                for b in lattice.columns:
                    image = self.phi(n, orbit, b)
                    checked += 1
                    if not dt.is_fixed(n, image, self.subgroup):
                        return CheckReport.failure(name, "phi image is not fixed", checked,
                                                   level=n, simplex=X.label(n, orbit.rep), label=b)
                    if image.get(orbit.rep, M.zero()) != M.reduce(b):
                        return CheckReport.failure(name, "pi o phi is not the identity", checked,
                                                   level=n, simplex=X.label(n, orbit.rep), label=b)
                    if n == 0:
                        continue
                    for i in range(n + 1):
                        if dt.face(n, i, image) != self.face(n, i, orbit, b):
                            return CheckReport.failure(name, "orbit formula disagrees with d_i", checked,
                                                       level=n, i=i, simplex=X.label(n, orbit.rep), label=b)
                block = _block_lattice(M, X, n, orbit, self.subgroup)
                for column in block.columns:
                    u = dt.collect(n, _block_pairs(M, orbit, column))
                    m = u.get(orbit.rep, M.zero())
                    checked += 1
                    try:
                        lattice.coordinates(list(m))
                    except ValidationError:
                        return CheckReport.failure(name, "fixed element has a non-fixed label", checked,
                                                   level=n, simplex=X.label(n, orbit.rep))
                    if self.phi(n, orbit, m) != u:
                        return CheckReport.failure(name, "phi o pi is not the identity", checked,
                                                   level=n, simplex=X.label(n, orbit.rep))
        logger.debug("dt_fixed_verified", space=dt.name, subgroup=sorted(self.subgroup), checked=checked)
        return CheckReport(name=name, checked=checked)


def dt_fixed(M: GAbelianGroup, X: SimplicialSet, subgroup=None) -> FixedDT:
    return DTSpace(M, X).fixed(subgroup)


def _block_matrices(M: GAbelianGroup, X: SimplicialSet, n: int, orbit: Orbit, sub) -> Tuple[List[int], List[Matrix]]:
    pos = {z: k for k, z in enumerate(orbit.members)}
    r = M.rank
    size = r * len(orbit.members)
    mats = []
    for h in sorted(sub):
        A = [[0] * size for _ in range(size)]
        for z in orbit.members:
            hz = pos[X.act[n][h][z]]
            for t in range(r):
                for s in range(r):
                    A[hz * r + s][pos[z] * r + t] = M.matrices[h][s][t]
        mats.append(A)
    return M.orders * len(orbit.members), mats


def _block_lattice(M: GAbelianGroup, X: SimplicialSet, n: int, orbit: Orbit, sub) -> Lattice:
    orders, mats = _block_matrices(M, X, n, orbit, sub)
    return Lattice(fixed_lattice(orders, mats))


def _block_pairs(M: GAbelianGroup, orbit: Orbit, column: Sequence[int]):
    r = M.rank
    for k, z in enumerate(orbit.members):
        yield z, tuple(column[k * r:(k + 1) * r])


# Moore complexes of fixed points


@dataclass
class _Layout:
    orbits: List[List[Orbit]]
    lattices: List[List[Lattice]]
    l_offsets: List[List[int]] = field(default_factory=list)
    r_offsets: List[List[int]] = field(default_factory=list)

    def __post_init__(self):
        for level in self.lattices:
            self.l_offsets.append(list(itertools.accumulate([0] + [lat.rank for lat in level])))

    def l_rank(self, n: int) -> int:
        return self.l_offsets[n][-1]

    def r_rank(self, n: int) -> int:
        return self.r_offsets[n][-1]


def _relation_slots(M_orders: Sequence[int]) -> List[int]:
    return [t for t, d in enumerate(M_orders) if d]


def _assemble(
    layout: _Layout,
    relation_orders: List[List[List[int]]],
    l_boundary,
    r_boundary,
    r_vector,
    name: str,
) -> PresentedComplex:
    """
    Assemble L, R and R -> L from per-orbit data.

    relation_orders[n][k] lists the orders of the free coordinates (ambient
    for the orbit block) carrying a relation; l_boundary(n, k, c) and
    r_boundary(n, k, s) return {(orbit', coordinate): value} in level n-1,
    r_vector(n, k, s) the ambient relation vector of slot s.
    """
    top = len(layout.orbits) - 1
    for n in range(top + 1):
        layout.r_offsets.append(list(itertools.accumulate([0] + [len(s) for s in relation_orders[n]])))
    l_bounds = [zeros(0, layout.l_rank(0))]
    r_bounds = [zeros(0, layout.r_rank(0))]
    incl = []
    for n in range(top + 1):
        dod: Dict[int, Dict[int, int]] = {}
        for k, lattice in enumerate(layout.lattices[n]):
            for s in range(len(relation_orders[n][k])):
                coords = lattice.coordinates(r_vector(n, k, s))
                for a, v in enumerate(coords):
                    dod.setdefault(layout.l_offsets[n][k] + a, {})[layout.r_offsets[n][k] + s] = v
        incl.append(from_dod(dod, (layout.l_rank(n), layout.r_rank(n))))
        if n == 0:
            continue
        ldod: Dict[int, Dict[int, int]] = {}
        rdod: Dict[int, Dict[int, int]] = {}
        for k, lattice in enumerate(layout.lattices[n]):
            for c in range(lattice.rank):
                for (k2, a), v in l_boundary(n, k, c).items():
                    row = ldod.setdefault(layout.l_offsets[n - 1][k2] + a, {})
                    col = layout.l_offsets[n][k] + c
                    row[col] = row.get(col, 0) + v
            for s in range(len(relation_orders[n][k])):
                for (k2, a), v in r_boundary(n, k, s).items():
                    row = rdod.setdefault(layout.r_offsets[n - 1][k2] + a, {})
                    col = layout.r_offsets[n][k] + s
                    row[col] = row.get(col, 0) + v
        l_bounds.append(from_dod(ldod, (layout.l_rank(n - 1), layout.l_rank(n))))
        r_bounds.append(from_dod(rdod, (layout.r_rank(n - 1), layout.r_rank(n))))
    L = ChainComplex([layout.l_rank(n) for n in range(top + 1)], l_bounds, name=f"L {name}")
    R = ChainComplex([layout.r_rank(n) for n in range(top + 1)], r_bounds, name=f"R {name}")
    return PresentedComplex(L, R, ChainMap(R, L, incl, f"R->L {name}"), name)


def _split_by_orbit(acc: Dict[int, List[int]], orbit_index: Dict[int, Tuple[int, int]], width, r: int) -> Dict[int, List[int]]:
    """Regroup ambient per-simplex vectors into per-orbit block vectors."""
    blocks: Dict[int, List[int]] = {}
    for y, vec in acc.items():
        k, pos = orbit_index[y]
        block = blocks.setdefault(k, [0] * (r * width(k)))
        for t in range(r):
            block[pos * r + t] += vec[t]
    return blocks


def orbit_moore_complex(
    dt: DTSpace, sub: FrozenSet[int], reps: Optional[List[List[int]]] = None
) -> Tuple[PresentedComplex, List[List[Orbit]]]:
    """Normalized complex of M(X)^H through the orbit formula, over nondegenerate orbits."""
    X, M = dt.X, dt.M
    r = M.rank
    slots = _relation_slots(M.orders)
    orbits = []
    for n in range(X.dim + 1):
        simplices = [x for x in X.nondegenerate(n) if not X.is_base(n, x)]
        orbits.append(orbit_decomposition(X, n, sub, simplices, reps[n] if reps else None))
    layout = _Layout(orbits, [[M.fixed_basis(o.stabilizer) for o in level] for level in orbits])
    rep_index = [{o.rep: k for k, o in enumerate(level)} for level in orbits]

    def push(n, orbit, vec):
        acc: Dict[int, List[int]] = {}
        for i in range(n + 1):
            sign = -1 if i % 2 else 1
            for z, h in orbit.coset.items():
                y = X.face(n, i, z)
                if y in rep_index[n - 1]:
                    total = acc.setdefault(rep_index[n - 1][y], [0] * r)
                    for t, val in enumerate(_apply(M.matrices[h], vec)):
                        total[t] += sign * val
        return acc

    def l_boundary(n, k, c):
        out = {}
        for k2, vec in push(n, orbits[n][k], layout.lattices[n][k].columns[c]).items():
            for a, v in enumerate(layout.lattices[n - 1][k2].coordinates(vec)):
                if v:
                    out[(k2, a)] = v
        return out

    def r_vector(n, k, s):
        t = slots[s]
        return [M.orders[t] if i == t else 0 for i in range(r)]

    def r_boundary(n, k, s):
        out = {}
        for k2, vec in push(n, orbits[n][k], r_vector(n, k, s)).items():
            for s2, t in enumerate(slots):
                if vec[t] % M.orders[t]:
                    raise ValidationError("relations are not a subcomplex", {"level": n})
                if vec[t]:
                    out[(k2, s2)] = vec[t] // M.orders[t]
            if any(vec[t] for t in range(r) if not M.orders[t]):
                raise ValidationError("relations are not a subcomplex", {"level": n})
        return out

    relation_orders = [[[M.orders[t] for t in slots] for _ in level] for level in orbits]
    complex_ = _assemble(layout, relation_orders, l_boundary, r_boundary, r_vector, f"{dt.name}^H")
    return complex_, orbits


def lattice_moore_complex(dt: DTSpace, sub: FrozenSet[int]) -> PresentedComplex:
    """Normalized complex of M(X)^H as the fixed part of each orbit block, no orbit formula."""
    X, M = dt.X, dt.M
    r = M.rank
    orbits = []
    for n in range(X.dim + 1):
        simplices = [x for x in X.nondegenerate(n) if not X.is_base(n, x)]
        orbits.append(orbit_decomposition(X, n, sub, simplices))
    lattices = [[_block_lattice(M, X, n, o, sub) for o in level] for n, level in enumerate(orbits)]
    layout = _Layout(orbits, lattices)
    where = [
        {z: (k, pos) for k, o in enumerate(level) for pos, z in enumerate(o.members)} for level in orbits
    ]
    slot_lists = [
        [[(pos, t) for pos in range(len(o.members)) for t in _relation_slots(M.orders)] for o in level]
        for level in orbits
    ]

    def push(n, orbit, column):
        acc: Dict[int, List[int]] = {}
        for pos, z in enumerate(orbit.members):
            vec = column[pos * r:(pos + 1) * r]
            if not any(vec):
                continue
            for i in range(n + 1):
                y = X.face(n, i, z)
                if y not in where[n - 1]:
                    continue
                total = acc.setdefault(y, [0] * r)
                sign = -1 if i % 2 else 1
                for t in range(r):
                    total[t] += sign * vec[t]
        return _split_by_orbit(acc, where[n - 1], lambda k: len(orbits[n - 1][k].members), r)

    def l_boundary(n, k, c):
        out = {}
        for k2, block in push(n, orbits[n][k], lattices[n][k].columns[c]).items():
            for a, v in enumerate(lattices[n - 1][k2].coordinates(block)):
                if v:
                    out[(k2, a)] = v
        return out

    def r_vector(n, k, s):
        pos, t = slot_lists[n][k][s]
        vec = [0] * (r * len(orbits[n][k].members))
        vec[pos * r + t] = M.orders[t]
        return vec

    def r_boundary(n, k, s):
        out = {}
        for k2, block in push(n, orbits[n][k], r_vector(n, k, s)).items():
            index = {slot: s2 for s2, slot in enumerate(slot_lists[n - 1][k2])}
            for idx, val in enumerate(block):
                if not val:
                    continue
                pos, t = divmod(idx, r)
                d = M.orders[t]
                if not d or val % d:
                    raise ValidationError("relations are not a subcomplex", {"level": n})
                out[(k2, index[(pos, t)])] = val // d
        return out

    relation_orders = [[[M.orders[t] for _, t in lst] for lst in level] for level in slot_lists]
    return _assemble(layout, relation_orders, l_boundary, r_boundary, r_vector, f"{dt.name}^H lattice")


def moore_homology(dt: DTSpace, subgroup=None, field: Optional[int] = None) -> HomologyReport:
    return dt.moore_complex(subgroup).homology(field)


def bredon(M: GAbelianGroup, X: SimplicialSet, field: Optional[int] = None) -> BredonReport:
    """Moore homology of M(X)^H for one subgroup per conjugacy class."""
    dt = DTSpace(M, X)
    lattice = X.group.lattice
    subgroups = []
    for c in range(lattice.num_classes):
        rep = lattice.representative(c)
        subgroups.append(
            SubgroupHomology(subgroup=lattice.labels[c], order=len(rep), report=dt.moore_complex(rep).homology(field))
        )
    logger.info("bredon_computed", space=X.name, coefficients=M.name, classes=lattice.num_classes)
    return BredonReport(group=X.group.name, coefficients=M.name, space=X.name, subgroups=subgroups)


def verify_bredon_routes(M: GAbelianGroup, X: SimplicialSet) -> CheckReport:
    """Orbit-formula homology against the direct fixed-lattice homology, per subgroup class."""
    dt = DTSpace(M, X)
    lattice = X.group.lattice
    details = {}
    for c in range(lattice.num_classes):
        rep = lattice.representative(c)
        orbit_route = dt.moore_complex(rep).homology()
        direct_route = dt.lattice_moore_complex(rep).homology()
        details[lattice.labels[c]] = orbit_route.summary()
        if orbit_route.groups != direct_route.groups:
            report = CheckReport.failure(
                "bredon_routes", "orbit and lattice routes disagree", c + 1,
                subgroup=lattice.labels[c], orbit=orbit_route.summary(), lattice=direct_route.summary(),
            )
            logger.warning("bredon_routes_failed", space=X.name, subgroup=lattice.labels[c])
            return report
    return CheckReport(name="bredon_routes", checked=lattice.num_classes, details=details)


# Linearity


def verify_wedge_linearity(M: GAbelianGroup, X: SimplicialSet, J: FiniteGSet, levels: int = 5) -> CheckReport:
    """
    M(v_J X) -> prod_J M(X) on generators: a bijection of bases commuting
    with faces, degeneracies and the G-action, hence an isomorphism of
    simplicial G-abelian groups.
    """
    name = "dt_wedge_product_iso"
    W = indexed_wedge(X, J)
    dW, dX = DTSpace(M, W), DTSpace(M, X)
    G = X.group
    top = min(levels, X.dim)

    def to_product(n: int, v: Element) -> Dict[int, Element]:
        out: Dict[int, Element] = {}
        for w, m in v.items():
            x, j = W.label(n, w)
            out.setdefault(j, {})[x] = m
        return out

    def product_act(g: int, n: int, parts: Dict[int, Element]) -> Dict[int, Element]:
        result = {J.act(g, j): dX.act(g, n, v) for j, v in parts.items()}
        return {j: v for j, v in result.items() if v}

    def clean(parts: Dict[int, Element]) -> Dict[int, Element]:
        return {j: v for j, v in parts.items() if v}

    checked = 0
    for n in range(top + 1):
        images = {W.label(n, w) for w in W.nonbase(n)}
        expected = {(x, j) for j in range(J.size) for x in X.nonbase(n)}
        if images != expected:
            return CheckReport.failure(name, "generators are not in bijection", checked, level=n)
        for w, t in dW.generators(n):
            v = dW.generator(n, w, t)
            image = to_product(n, v)
            checked += 1
            if n > 0:
                for i in range(n + 1):
                    lhs = to_product(n - 1, dW.face(n, i, v))
                    rhs = clean({j: dX.face(n, i, part) for j, part in image.items()})
                    if lhs != rhs:
                        return CheckReport.failure(name, "comparison does not commute with d_i", checked,
                                                   level=n, i=i, simplex=W.label(n, w))
            if n < X.dim:
                for i in range(n + 1):
                    lhs = to_product(n + 1, dW.degeneracy(n, i, v))
                    rhs = clean({j: dX.degeneracy(n, i, part) for j, part in image.items()})
                    if lhs != rhs:
                        return CheckReport.failure(name, "comparison does not commute with s_i", checked,
                                                   level=n, i=i, simplex=W.label(n, w))
            for g in G.elements:
                if to_product(n, dW.act(g, n, v)) != product_act(g, n, image):
                    return CheckReport.failure(name, "comparison is not equivariant", checked,
                                               level=n, g=g, simplex=W.label(n, w))
    logger.info("dt_wedge_iso_verified", space=X.name, J=J.size, coefficients=M.name, checked=checked)
    return CheckReport(name=name, checked=checked, details={"levels": top, "J": J.size})


def _cone_indices(P: PresentedComplex, n: int, l_part: List[int], r_part: List[int]) -> List[int]:
    """Positions of the given L_n and R_{n-1} coordinates inside Cone_n = L_n + R_{n-1}."""
    return list(l_part) + [P.lattice.ranks[n] + s for s in r_part]


def _orbit_coordinates(P_layout: List[List[Orbit]], M: GAbelianGroup, n: int, take) -> Tuple[List[int], List[int]]:
    l_idx, r_idx = [], []
    l_off = r_off = 0
    slots = len(_relation_slots(M.orders))
    for o in P_layout[n]:
        k = M.fixed_basis(o.stabilizer).rank
        if take(o):
            l_idx.extend(range(l_off, l_off + k))
            r_idx.extend(range(r_off, r_off + slots))
        l_off += k
        r_off += slots
    return l_idx, r_idx


def _selection(rows: int, picks: List[int], transpose: bool = False) -> DomainMatrix:
    dod: Dict[int, Dict[int, int]] = {}
    for k, p in enumerate(picks):
        if transpose:
            dod.setdefault(k, {})[p] = 1
        else:
            dod.setdefault(p, {})[k] = 1
    return from_dod(dod, (len(picks), rows) if transpose else (rows, len(picks)))


def _same(a: DomainMatrix, b: DomainMatrix) -> bool:
    if a.shape != b.shape:
        return False
    if 0 in a.shape:
        return True
    return (a.to_sparse() - b.to_sparse()).is_zero_matrix


def verify_cofiber_sequence(
    M: GAbelianGroup,
    f: SimplicialMap,
    degrees: int = 4,
    fields: Sequence[int] = (0, 2, 3),
) -> CheckReport:
    """
    M(X) -> M(Y) -> M(Y/X) for an injective equivariant f: X -> Y.

    On every subgroup class the fixed Moore complex of Y splits as that of X
    followed by that of Y/X (checked literally on presented complexes), the
    integral homology of Y/X matches the cone of the inclusion, and the long
    exact sequence is exact over Q and small prime fields.
    """
    name = "dt_cofiber_sequence"
    f.check()
    if not f.is_injective():
        raise ValidationError("cofiber sequences need an injective map", {"map": f.name})
    X, Y = f.source, f.target
    C, q = cofiber(f)
    lattice = Y.group.lattice
    checked = 0
    for c in range(lattice.num_classes):
        sub = lattice.representative(c)
        label = lattice.labels[c]
        PA, orbits_a = orbit_moore_complex(DTSpace(M, X), sub)
        PC, orbits_c = orbit_moore_complex(DTSpace(M, C), sub)
        reps = []
        for n in range(Y.dim + 1):
            preimage = {q(n, y): y for y in range(Y.size(n))
                        if not Y.is_base(n, y) and not C.is_base(n, q(n, y))}
            reps.append([f(n, o.rep) for o in orbits_a[n]] + [preimage[o.rep] for o in orbits_c[n]])
        PB, orbits_b = orbit_moore_complex(DTSpace(M, Y), sub, reps)
        cones = {key: mapping_cone(P.inclusion) for key, P in (("A", PA), ("B", PB), ("C", PC))}
        top = cones["B"].top
        image_reps = [set(r[: len(orbits_a[n])]) for n, r in enumerate(reps)]

        idx_a, idx_c = [], []
        for n in range(top + 1):
            la, ra = _orbit_coordinates(orbits_b, M, n, lambda o, n=n: o.rep in image_reps[n])
            lc, rc = _orbit_coordinates(orbits_b, M, n, lambda o, n=n: o.rep not in image_reps[n])
            ra_prev, rc_prev = ([], []) if n == 0 else (
                _orbit_coordinates(orbits_b, M, n - 1, lambda o, m=n - 1: o.rep in image_reps[m])[1],
                _orbit_coordinates(orbits_b, M, n - 1, lambda o, m=n - 1: o.rep not in image_reps[m])[1],
            )
            idx_a.append(_cone_indices(PB, n, la, ra_prev))
            idx_c.append(_cone_indices(PB, n, lc, rc_prev))
            if len(orbits_b[n]) != len(orbits_a[n]) + len(orbits_c[n]):
                return CheckReport.failure(name, "orbits of Y do not split", checked, subgroup=label, level=n)

        deltas = [None]
        for n in range(1, top + 1):
            d = cones["B"].boundaries[n]
            checked += 1
            blocks = {
                "A": d.extract(idx_a[n - 1], idx_a[n]),
                "C": d.extract(idx_c[n - 1], idx_c[n]),
                "lower": d.extract(idx_c[n - 1], idx_a[n]),
            }
            if not _same(blocks["A"], cones["A"].boundaries[n]):
                return CheckReport.failure(name, "sub-block differs from the complex of X", checked, subgroup=label, degree=n)
            if not _same(blocks["C"], cones["C"].boundaries[n]):
                return CheckReport.failure(name, "quotient block differs from the complex of Y/X", checked, subgroup=label, degree=n)
            if not blocks["lower"].is_zero_matrix and 0 not in blocks["lower"].shape:
                return CheckReport.failure(name, "X is not a subcomplex", checked, subgroup=label, degree=n)
            deltas.append(d.extract(idx_a[n - 1], idx_c[n]))

        inclusion = ChainMap(cones["A"], cones["B"], [_selection(cones["B"].ranks[n], idx_a[n]) for n in range(top + 1)], "i")
        projection = ChainMap(cones["B"], cones["C"], [_selection(cones["B"].ranks[n], idx_c[n], True) for n in range(top + 1)], "p")
        checked += 1
        via_cone = homology(mapping_cone(inclusion))
        direct = homology(cones["C"])
        if via_cone.groups[: degrees + 1] != direct.groups[: degrees + 1]:
            return CheckReport.failure(name, "cone of M(X) -> M(Y) differs from M(Y/X)", checked,
                                       subgroup=label, cone=via_cone.summary(), quotient=direct.summary())

        for p in fields:
            h = {key: homology(cx, p) for key, cx in cones.items()}
            last = min(degrees, top - 1)

            def rank_i(n):
                return induced_rank(inclusion.matrices[n], cones["A"].boundary(n), cones["B"].boundary(n + 1), p)

            def rank_p(n):
                return induced_rank(projection.matrices[n], cones["B"].boundary(n), cones["C"].boundary(n + 1), p)

            def rank_d(n):
                if n == 0:
                    return 0
                return induced_rank(deltas[n], cones["C"].boundary(n), cones["A"].boundary(n), p)

            for n in range(last + 1):
                checked += 1
                ri, rp, rd, rd_next = rank_i(n), rank_p(n), rank_d(n), rank_d(n + 1)
                at_a = rd_next + ri == h["A"].degree(n).betti
                at_b = ri + rp == h["B"].degree(n).betti
                at_c = rp + rd == h["C"].degree(n).betti
                if not (at_a and at_b and at_c):
                    return CheckReport.failure(
                        name, "long exact sequence is not exact", checked,
                        subgroup=label, degree=n, field=p, ranks=(ri, rp, rd, rd_next),
                        dims=(h["A"].degree(n).betti, h["B"].degree(n).betti, h["C"].degree(n).betti),
                    )
    logger.info("dt_cofiber_sequence_verified", map=f.name, coefficients=M.name, checked=checked)
    return CheckReport(name=name, checked=checked, details={"degrees": degrees, "fields": list(fields)})


def verify_linearity(M: GAbelianGroup, source, levels: int = 5, degrees: int = 4) -> CheckReport:
    """
    Dispatch on the input: (X, J) checks the wedge/product isomorphism, an
    injective map checks its cofiber sequence, and a cocartesian square
    checks both of its cofiber sequences and that their cofibers agree.
    """
    from .sset import GCube

    if isinstance(source, tuple):
        X, J = source
        return verify_wedge_linearity(M, X, J, levels)
    if isinstance(source, SimplicialMap):
        return verify_cofiber_sequence(M, source, degrees)
    if isinstance(source, GCube):
        if source.size != 2:
            raise ValidationError("linearity is checked on squares", {"size": source.size})
        source.check()
        first = source.edges[(frozenset(), frozenset({0}))]
        second = source.edges[(frozenset({1}), frozenset({0, 1}))]
        reports = [verify_cofiber_sequence(M, e, degrees) for e in (first, second)]
        for report in reports:
            if not report.passed:
                return report
        cofibers = [bredon(M, cofiber(e)[0]) for e in (first, second)]
        left = [s.report.groups for s in cofibers[0].subgroups]
        right = [s.report.groups for s in cofibers[1].subgroups]
        checked = sum(r.checked for r in reports) + 1
        if left != right:
            return CheckReport.failure("dt_square_linearity", "parallel cofibers differ", checked)
        return CheckReport(name="dt_square_linearity", checked=checked)
    raise ValidationError(f"cannot check linearity of {type(source).__name__}")


def verify_conn_preservation(M: GAbelianGroup, X: SimplicialSet) -> CheckReport:
    """conn M(X)^H >= min over K <= H of conn X^K, with margins per class."""
    dt = DTSpace(M, X)
    lattice = X.group.lattice
    measured = ConnFn(
        X.group,
        [connectivity(dt.moore_complex(lattice.representative(c)).homology()) for c in range(lattice.num_classes)],
    )
    inputs = equivariant_space_conn(X)
    bound = inputs.subgroup_min()
    details = {"measured": measured.to_dict(), "bound": bound.to_dict()}
    window_limited = any(v == float("inf") for v in measured.values)
    if not preserves_connectivity(measured, inputs):
        logger.warning("dt_conn_preservation_failed", space=X.name, **details)
        report = CheckReport.failure("dt_conn_preservation", "measured connectivity below the bound", lattice.num_classes, **details)
        report.details = details
        return report
    return CheckReport(
        name="dt_conn_preservation",
        status=CheckStatus.WINDOW_LIMITED if window_limited else CheckStatus.PASS,
        checked=lattice.num_classes,
        details=details,
    )
