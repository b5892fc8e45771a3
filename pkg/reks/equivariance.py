"""
Finite groups, subgroup lattices, finite G-sets and connectivity functions.

A connectivity function assigns a value in Z (or Q) extended by +inf to every
conjugacy class of subgroups. The bound evaluators below take and return such
functions; min over an empty index set is +inf and +inf absorbs sums.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import structlog

from .core.config import settings
from .core.exceptions import GroupMismatchError, ValidationError, check_bound


logger = structlog.get_logger()

INF = math.inf
Value = Union[int, Fraction, float]
Subgroup = FrozenSet[int]


class FiniteGroup:
    """A finite group given by its multiplication table on 0..n-1."""

    def __init__(
        self,
        table: Sequence[Sequence[int]],
        name: str = "G",
        labels: Optional[List[str]] = None,
    ):
        self.table: Tuple[Tuple[int, ...], ...] = tuple(tuple(r) for r in table)
        self.order = len(self.table)
        self.name = name
        self.labels = labels or [str(i) for i in range(self.order)]
        check_bound("MAX_GROUP_ORDER", settings.MAX_GROUP_ORDER, self.order)
        self.identity, self.inverses = self.validate()

    def validate(self) -> Tuple[int, List[int]]:
        n = self.order
        if n == 0:
            raise ValidationError("group table is empty")
        for a, row in enumerate(self.table):
            if len(row) != n or any(not 0 <= x < n for x in row):
                raise ValidationError(
                    "group table is not a total n x n table", {"row": a}
                )
        for a, b, c in itertools.product(range(n), repeat=3):
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)):
                raise ValidationError(
                    "group table is not associative", {"a": a, "b": b, "c": c}
                )
        identity = None
        for e in range(n):
            if all(self.mul(e, x) == x and self.mul(x, e) == x for x in range(n)):
                identity = e
                break
        if identity is None:
            raise ValidationError("group table has no identity")
        inverses = []
        for a in range(n):
            inv = [b for b in range(n) if self.mul(a, b) == identity]
            if not inv or self.mul(inv[0], a) != identity:
                raise ValidationError("element has no inverse", {"element": a})
            inverses.append(inv[0])
        return identity, inverses

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverses[a]

    @property
    def elements(self) -> range:
        return range(self.order)

    def conjugate(self, subgroup: Subgroup, g: int) -> Subgroup:
        return frozenset(self.mul(self.mul(g, h), self.inv(g)) for h in subgroup)

    def generated(self, gens) -> Subgroup:
        closure = {self.identity, *gens}
        frontier = list(closure)
        while frontier:
            a = frontier.pop()
            for b in list(closure):
                for c in (self.mul(a, b), self.mul(b, a)):
                    if c not in closure:
                        closure.add(c)
                        frontier.append(c)
        return frozenset(closure)

    def is_subgroup(self, subset) -> bool:
        s = frozenset(subset)
        if self.identity not in s:
            return False
        return all(self.mul(a, self.inv(b)) in s for a in s for b in s)

    @cached_property
    def lattice(self) -> "SubgroupLattice":
        return subgroup_lattice(self)

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteGroup) and self.table == other.table

    def __hash__(self) -> int:
        return hash(self.table)

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name}, order={self.order})"

    # Presets

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        table = [[(a + b) % n for b in range(n)] for a in range(n)]
        return cls(table, name=f"C{n}")

    @classmethod
    def klein(cls) -> "FiniteGroup":
        table = [[a ^ b for b in range(4)] for a in range(4)]
        return cls(table, name="K4")

    @classmethod
    def symmetric3(cls) -> "FiniteGroup":
        perms = sorted(itertools.permutations(range(3)))
        index = {p: i for i, p in enumerate(perms)}
        # (p*q)(i) = p(q(i))
        table = [
            [index[tuple(p[q[i]] for i in range(3))] for q in perms] for p in perms
        ]
        return cls(table, name="S3", labels=["".join(map(str, p)) for p in perms])

    @classmethod
    def preset(cls, name: str) -> "FiniteGroup":
        if name == "K4":
            return cls.klein()
        if name == "S3":
            return cls.symmetric3()
        if name.startswith("C") and name[1:].isdigit() and int(name[1:]) > 0:
            return cls.cyclic(int(name[1:]))
        raise ValidationError(f"unknown group preset {name!r}")


@dataclass
class SubgroupLattice:
    group: FiniteGroup
    subgroups: List[Subgroup]
    classes: List[List[int]]
    class_of: List[int]
    labels: List[str]

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def representative(self, c: int) -> Subgroup:
        return self.subgroups[self.classes[c][0]]

    def class_index(self, key: Union[int, str, Subgroup]) -> int:
        if isinstance(key, int):
            if not 0 <= key < self.num_classes:
                raise ValidationError(f"no subgroup class {key}")
            return key
        if isinstance(key, str):
            if key not in self.labels:
                raise ValidationError(f"no subgroup class labelled {key!r}")
            return self.labels.index(key)
        sub = frozenset(key)
        if sub not in self._index:
            raise ValidationError("not a subgroup", {"subset": sorted(sub)})
        return self.class_of[self._index[sub]]

    @cached_property
    def _index(self) -> Dict[Subgroup, int]:
        return {s: i for i, s in enumerate(self.subgroups)}

    @cached_property
    def below(self) -> List[List[int]]:
        """below[c]: classes having a member contained in the representative of c."""
        result = []
        for c in range(self.num_classes):
            rep = self.representative(c)
            result.append(
                sorted({self.class_of[i] for i, s in enumerate(self.subgroups) if s <= rep})
            )
        return result

    @cached_property
    def strictly_below(self) -> List[List[int]]:
        result = []
        for c in range(self.num_classes):
            rep = self.representative(c)
            result.append(
                sorted({self.class_of[i] for i, s in enumerate(self.subgroups) if s < rep})
            )
        return result

    def is_contained(self, k: int, h: int) -> bool:
        return k in self.below[h]


def subgroup_lattice(group: FiniteGroup) -> SubgroupLattice:
    """All subgroups as joins of cyclic subgroups, with conjugacy classes."""
    check_bound("MAX_GROUP_ORDER", settings.MAX_GROUP_ORDER, group.order)

    found = {group.generated([g]) for g in group.elements}
    frontier = list(found)
    while frontier:
        a = frontier.pop()
        for b in list(found):
            join = group.generated(a | b)
            if join not in found:
                found.add(join)
                frontier.append(join)

    subgroups = sorted(found, key=lambda s: (len(s), sorted(s)))
    index = {s: i for i, s in enumerate(subgroups)}

    class_of = [-1] * len(subgroups)
    classes: List[List[int]] = []
    for i, s in enumerate(subgroups):
        if class_of[i] >= 0:
            continue
        members = sorted({index[group.conjugate(s, g)] for g in group.elements})
        for m in members:
            class_of[m] = len(classes)
        classes.append(members)

    labels = _class_labels(group, subgroups, classes)
    logger.info(
        "subgroup_lattice_built",
        group=group.name,
        subgroups=len(subgroups),
        classes=len(classes),
    )
    return SubgroupLattice(group, subgroups, classes, class_of, labels)


def _class_labels(group, subgroups, classes) -> List[str]:
    raw = []
    for members in classes:
        s = subgroups[members[0]]
        if len(s) == 1:
            raw.append("1")
        elif len(s) == group.order:
            raw.append(group.name)
        elif any(group.generated([g]) == s for g in s):
            raw.append(f"C{len(s)}")
        else:
            raw.append(f"H{len(s)}")
    labels = []
    for i, lab in enumerate(raw):
        if raw.count(lab) > 1:
            lab = lab + "abcdefghijklmnopqrstuvwxyz"[raw[:i].count(lab)]
        labels.append(lab)
    return labels


class FiniteGSet:
    """A finite G-set; action[g][x] is g.x."""

    def __init__(
        self,
        group: FiniteGroup,
        action: Sequence[Sequence[int]],
        labels: Optional[List] = None,
    ):
        self.group = group
        self.action = [tuple(r) for r in action]
        self.size = len(self.action[0]) if self.action else 0
        self.labels = labels if labels is not None else list(range(self.size))
        self._validate()

    def _validate(self):
        G = self.group
        if len(self.action) != G.order:
            raise ValidationError("action table needs one row per group element")
        for x in range(self.size):
            if self.action[G.identity][x] != x:
                raise ValidationError("identity does not act trivially", {"point": x})
        for g, h in itertools.product(G.elements, repeat=2):
            gh = G.mul(g, h)
            for x in range(self.size):
                if self.action[gh][x] != self.action[g][self.action[h][x]]:
                    raise ValidationError(
                        "action is not associative", {"g": g, "h": h, "point": x}
                    )

    def act(self, g: int, x: int) -> int:
        return self.action[g][x]

    @classmethod
    def trivial(cls, group: FiniteGroup, n: int = 1) -> "FiniteGSet":
        return cls(group, [list(range(n)) for _ in group.elements])

    @classmethod
    def free(cls, group: FiniteGroup, n: int = 1) -> "FiniteGSet":
        """nG: n copies of G under left multiplication."""
        points = [(i, g) for i in range(n) for g in group.elements]
        index = {p: k for k, p in enumerate(points)}
        action = [[index[(i, group.mul(h, g))] for (i, g) in points] for h in group.elements]
        return cls(group, action, labels=points)

    @classmethod
    def cosets(cls, group: FiniteGroup, subgroup) -> "FiniteGSet":
        """G/H with left multiplication."""
        sub = frozenset(subgroup)
        if not group.is_subgroup(sub):
            raise ValidationError("not a subgroup", {"subset": sorted(sub)})
        cosets: List[Subgroup] = []
        for g in group.elements:
            c = frozenset(group.mul(g, h) for h in sub)
            if c not in cosets:
                cosets.append(c)
        index = {c: i for i, c in enumerate(cosets)}
        action = [
            [index[frozenset(group.mul(h, x) for x in c)] for c in cosets]
            for h in group.elements
        ]
        return cls(group, action, labels=[min(c) for c in cosets])

    def disjoint_union(self, other: "FiniteGSet") -> "FiniteGSet":
        if self.group != other.group:
            raise GroupMismatchError("disjoint union of G-sets over different groups")
        action = [
            list(self.action[g]) + [self.size + y for y in other.action[g]]
            for g in self.group.elements
        ]
        labels = [(0, x) for x in self.labels] + [(1, y) for y in other.labels]
        return FiniteGSet(self.group, action, labels)

    def orbits(self, subgroup) -> List[List[int]]:
        seen = set()
        result = []
        for x in range(self.size):
            if x in seen:
                continue
            orbit = sorted({self.action[h][x] for h in subgroup})
            seen.update(orbit)
            result.append(orbit)
        return result

    def stabilizer(self, x: int, subgroup) -> Subgroup:
        return frozenset(h for h in subgroup if self.action[h][x] == x)

    def fixed(self, subgroup) -> List[int]:
        return [x for x in range(self.size) if all(self.action[h][x] == x for h in subgroup)]


@dataclass(frozen=True)
class GSetAnalysis:
    orbits: List[List[int]]
    stabilizers: List[Subgroup]
    fixed: List[int]


def gset_analysis(gset: FiniteGSet, subgroup) -> GSetAnalysis:
    sub = frozenset(subgroup)
    if not gset.group.is_subgroup(sub):
        raise ValidationError("not a subgroup", {"subset": sorted(sub)})
    orbits = gset.orbits(sub)
    return GSetAnalysis(
        orbits=orbits,
        stabilizers=[gset.stabilizer(o[0], sub) for o in orbits],
        fixed=gset.fixed(sub),
    )


def _check_value(v, rational: bool):
    if isinstance(v, float):
        if math.isinf(v):
            return v
        raise ValidationError(f"connectivity value {v} is not exact")
    if isinstance(v, bool):
        raise ValidationError("connectivity values are numbers")
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return int(v)
        if rational:
            return v
    raise ValidationError(f"connectivity value {v!r} is not an integer")


class ConnFn:
    """Integer-valued (or +-inf) function on subgroup classes."""

    rational = False

    def __init__(self, group: FiniteGroup, values: Sequence[Value]):
        self.group = group
        lattice = group.lattice
        if len(values) != lattice.num_classes:
            raise ValidationError(
                f"expected {lattice.num_classes} values, got {len(values)}"
            )
        self.values: Tuple[Value, ...] = tuple(_check_value(v, self.rational) for v in values)

    @classmethod
    def constant(cls, group: FiniteGroup, value: Value) -> "ConnFn":
        return cls(group, [value] * group.lattice.num_classes)

    @classmethod
    def from_function(cls, group: FiniteGroup, f: Callable[[Subgroup], Value]) -> "ConnFn":
        lattice = group.lattice
        return cls(group, [f(lattice.representative(c)) for c in range(lattice.num_classes)])

    @property
    def lattice(self) -> SubgroupLattice:
        return self.group.lattice

    def __getitem__(self, key) -> Value:
        return self.values[self.lattice.class_index(key)]

    def _pair(self, other) -> Tuple[Value, ...]:
        if isinstance(other, ConnFn):
            if other.group != self.group:
                raise GroupMismatchError(f"{self.group.name} vs {other.group.name}")
            return other.values
        return (other,) * len(self.values)

    def _make(self, values, *others) -> "ConnFn":
        rational = self.rational or any(getattr(o, "rational", False) for o in others)
        rational = rational or any(isinstance(v, Fraction) and v.denominator != 1 for v in values)
        return (ConnFnQ if rational else ConnFn)(self.group, values)

    def minimum(self, other) -> "ConnFn":
        return self._make([min(a, b) for a, b in zip(self.values, self._pair(other))], other)

    def __add__(self, other) -> "ConnFn":
        return self._make([_add(a, b) for a, b in zip(self.values, self._pair(other))], other)

    __radd__ = __add__

    def __sub__(self, other) -> "ConnFn":
        return self._make([_add(a, _neg(b)) for a, b in zip(self.values, self._pair(other))], other)

    def shift(self, k: int) -> "ConnFn":
        return self + k

    def scale(self, k: Union[int, Fraction]) -> "ConnFn":
        return self._make([v if math.isinf(v) else v * k for v in self.values])

    def floor(self) -> "ConnFn":
        return ConnFn(self.group, [v if math.isinf(v) else math.floor(v) for v in self.values])

    def subgroup_min(self) -> "ConnFn":
        """H -> min over K <= H."""
        return self._make([min(self.values[k] for k in ks) for ks in self.lattice.below])

    def proper_min(self) -> "ConnFn":
        """H -> min over K strictly contained in H; +inf when there is none."""
        return self._make(
            [min((self.values[k] for k in ks), default=INF) for ks in self.lattice.strictly_below]
        )

    def dominates(self, other) -> bool:
        return all(a >= b for a, b in zip(self.values, self._pair(other)))

    def unbounded_classes(self) -> List[str]:
        return [self.lattice.labels[c] for c, v in enumerate(self.values) if v == -INF]

    def to_dict(self) -> Dict[str, Union[int, str]]:
        from .models.reports import conn_value

        return {lab: conn_value(v) for lab, v in zip(self.lattice.labels, self.values)}

    def __eq__(self, other) -> bool:
        if isinstance(other, ConnFn):
            return self.group == other.group and self.values == other.values
        if isinstance(other, (tuple, list)):
            return self.values == tuple(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.group, self.values))

    def __repr__(self) -> str:
        return "(" + ", ".join(str(v) for v in self.values) + ")"


class ConnFnQ(ConnFn):
    """Rational-valued variant; bounds are floored only at comparison time."""

    rational = True


def _neg(v: Value) -> Value:
    return -v


def _add(a: Value, b: Value) -> Value:
    if a == INF or b == INF:
        if a == -INF or b == -INF:
            raise ValidationError("+inf and -inf in the same sum")
        return INF
    if a == -INF or b == -INF:
        return -INF
    return a + b


def _same_group(fns: Sequence[ConnFn]) -> FiniteGroup:
    if not fns:
        raise ValidationError("at least one connectivity function is required")
    group = fns[0].group
    for f in fns[1:]:
        if f.group != group:
            raise GroupMismatchError(f"{group.name} vs {f.group.name}")
    return group


def excision_bound(e_conns: Sequence[ConnFn], c: ConnFn) -> ConnFn:
    """H -> sum_i min_{K<=H} (conn e_i^K - c(K)), floored."""
    group = _same_group(list(e_conns) + [c])
    if any(math.isinf(v) for v in c.values):
        raise ValidationError("the excision offset c must be finite")
    total = ConnFn.constant(group, 0)
    for e in e_conns:
        total = total + (e - c).subgroup_min()
    return total.floor()


def wedge_bound(p_conn: ConnFn, v: ConnFn) -> ConnFn:
    """H -> min{2 conn p^H, min_{K<H} conn p^K} - v(H); v(H) = +inf gives -inf."""
    _same_group([p_conn, v])
    inner = p_conn.scale(2).minimum(p_conn.proper_min())
    values = []
    for a, b in zip(inner.values, v.values):
        values.append(-INF if b == INF else _add(a, -b))
    result = ConnFn(p_conn.group, values)
    if result.unbounded_classes():
        logger.warning("wedge_bound_unbounded_below", classes=result.unbounded_classes())
    return result


def wedge_product_bound(p_conn: ConnFn) -> ConnFn:
    """Connectivity of the indexed wedge-to-product map: min{2p(H)-1, min_{K<H} p(K)}."""
    return (p_conn.scale(2) - 1).minimum(p_conn.proper_min())


def wedge_to_product_conn(gset: FiniteGSet, summand: ConnFn) -> ConnFn:
    """
    Homological connectivity of v_J Y -> prod_J Y from the connectivity of Y.

    On H-fixed points the map is v_{J^H} Y^H -> prod_{J^H} Y^H x prod Y^{H_j},
    the last product over the orbits of J/H with more than one point. Two or
    more fixed summands give the cross term of the product, 2 conn Y^H + 1;
    every other orbit adds the factor Y^{H_j}, conn Y^{H_j}. Exact whenever
    the lowest homology of Y^H is finitely generated.
    """
    if gset.group != summand.group:
        raise GroupMismatchError(f"{gset.group.name} vs {summand.group.name}")

    def at(sub):
        c = summand[sub]
        values = [INF if len(gset.fixed(sub)) < 2 else _add(_add(c, c), 1)]
        values += [summand[gset.stabilizer(orbit[0], sub)] for orbit in gset.orbits(sub) if len(orbit) > 1]
        return min(values)

    return ConnFn.from_function(gset.group, at)


def approximation_bound(p_conn: ConnFn, c: ConnFn, lam: ConnFn) -> ConnFn:
    """min{2 min_{K<=H}(p(K) - c(K)), min_{K<H}(p(K) + lam(K))}, floored."""
    _same_group([p_conn, c, lam])
    first = (p_conn - c).subgroup_min().scale(2)
    second = (p_conn + lam).proper_min()
    return first.minimum(second).floor()


def _require_c2(group: FiniteGroup):
    if group.order != 2:
        raise ValidationError(f"this bound is stated for G = C2, got {group.name}")


def cube_cartesian_bound(e_conns: Sequence[ConnFn]) -> ConnFn:
    """(sum e_j(1), sum min{e_j(1), e_j(C2)}) for cubes over C2."""
    group = _same_group(list(e_conns))
    _require_c2(group)
    under = sum(e.values[0] for e in e_conns)
    fixed = sum(min(e.values[0], e.values[1]) for e in e_conns)
    return ConnFn(group, [under, fixed])


def sign_sphere_certificate_bound(e_conns: Sequence[ConnFn]) -> ConnFn:
    """(sum (e_i(1) + 1), sum min{e_i(1) + 1, e_i(C2)})."""
    group = _same_group(list(e_conns))
    _require_c2(group)
    under = sum(_add(e.values[0], 1) for e in e_conns)
    fixed = sum(min(_add(e.values[0], 1), e.values[1]) for e in e_conns)
    return ConnFn(group, [under, fixed])


def trace_bound(conn_x: ConnFn) -> ConnFn:
    """(2c + 1, min{2 c^{C2}, c} + 1) for c = conn X over C2."""
    _require_c2(conn_x.group)
    c, cf = conn_x.values
    return ConnFn(conn_x.group, [_add(2 * c, 1), _add(min(2 * cf, c), 1)])


def sphere_gain(gset: FiniteGSet) -> ConnFn:
    """Gain of smashing with S^{R[I]}: H -> number of H-orbits of I."""
    return ConnFn.from_function(gset.group, lambda sub: len(gset.orbits(sub)))


def named_gain(group: FiniteGroup, name: str) -> ConnFn:
    if name == "S1":
        return ConnFn.constant(group, 1)
    if name == "S11":
        _require_c2(group)
        return ConnFn(group, [1, 0])
    if name == "rho":
        return sphere_gain(FiniteGSet.free(group, 1))
    raise ValidationError(f"unknown sphere {name!r}")


@dataclass(frozen=True)
class AnalyticityCertificate:
    rho: ConnFn
    q: ConnFn
    v: ConnFn

    def excision_condition(self, n: int) -> Tuple[ConnFn, ConnFn]:
        """(c, kappa) = (rho - q/(n+1), rho + 1)."""
        c = self.rho - self.q.scale(Fraction(1, n + 1))
        return c, self.rho + 1

    def wedge_condition(self) -> Tuple[ConnFn, ConnFn]:
        return self.v, self.rho + 1


def certificate_shift(cert: AnalyticityCertificate, shift: ConnFn) -> AnalyticityCertificate:
    if any(math.isinf(s) for s in shift.values):
        raise ValidationError("certificate shift must be finite")
    return AnalyticityCertificate(rho=cert.rho - shift, q=cert.q, v=cert.v)


def preserves_connectivity(measured: ConnFn, inputs: ConnFn) -> bool:
    """measured(H) >= min_{K<=H} inputs(K) for every H."""
    return measured.dominates(inputs.subgroup_min())
