"""
Finite pointed simplicial G-sets and Real simplicial sets, truncated at D.

Every level 0..D is stored explicitly, degenerate simplices included, so all
constructions are levelwise and the simplicial identities can be checked
exhaustively. Simplices carry hashable labels; structure maps are index
tables.
"""

import itertools
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Hashable, List, Optional, Sequence, Tuple

import structlog

from .core.config import settings
from .core.exceptions import GroupMismatchError, ValidationError, check_bound
from .equivariance import FiniteGroup, FiniteGSet


logger = structlog.get_logger()

BASE = "*"
Label = Hashable


def trivial_group() -> FiniteGroup:
    return FiniteGroup.cyclic(1)


def monotone_tuples(length: int, top: int) -> List[Tuple[int, ...]]:
    """Monotone maps [length-1] -> [top] as tuples."""
    return list(itertools.combinations_with_replacement(range(top + 1), length))


def surjections(m: int, k: int) -> List[Tuple[int, ...]]:
    """Monotone surjections [m] -> [k]."""
    return [t for t in monotone_tuples(m + 1, k) if len(set(t)) == k + 1]


def _drop(t: Tuple, i: int) -> Tuple:
    return t[:i] + t[i + 1 :]


def _repeat(t: Tuple, i: int) -> Tuple:
    return t[: i + 1] + t[i:]


def _reverse_monotone(t: Tuple[int, ...], top: int) -> Tuple[int, ...]:
    return tuple(top - a for a in reversed(t))


class SimplicialSet:
    """
    Levelwise truncated simplicial set with optional basepoint, G-action and
    Real involution.

    faces[n][x][i] is the index of d_i x in level n-1, degens[n][x][i] the
    index of s_i x in level n+1 (absent at the top level), act[n][g][x] the
    index of g.x and involution[n][x] the index of w x.
    """

    def __init__(
        self,
        labels: List[List[Label]],
        faces: List[List[Tuple[int, ...]]],
        degens: List[List[Tuple[int, ...]]],
        base: Optional[List[int]] = None,
        group: Optional[FiniteGroup] = None,
        act: Optional[List[List[Tuple[int, ...]]]] = None,
        involution: Optional[List[Tuple[int, ...]]] = None,
        name: str = "X",
    ):
        self.labels = labels
        self.dim = len(labels) - 1
        self.faces = faces
        self.degens = degens
        self.base = base
        self.group = group or trivial_group()
        self.act = act or [
            [tuple(range(len(level)))] * self.group.order for level in labels
        ]
        self.involution = involution
        self.name = name
        self.index: List[Dict[Label, int]] = [
            {lab: i for i, lab in enumerate(level)} for level in labels
        ]

    # Construction

    @classmethod
    def from_functions(
        cls,
        levels: Sequence[Sequence[Label]],
        face: Callable[[int, int, Label], Label],
        degen: Callable[[int, int, Label], Label],
        base=None,
        group: Optional[FiniteGroup] = None,
        action: Optional[Callable[[int, int, Label], Label]] = None,
        involution: Optional[Callable[[int, Label], Label]] = None,
        name: str = "X",
    ) -> "SimplicialSet":
        """Build from label lists and structure functions face(n, i, x), degen(n, i, x)."""
        labels = [list(level) for level in levels]
        dim = len(labels) - 1
        index = [{lab: i for i, lab in enumerate(level)} for level in labels]

        def lookup(n: int, lab: Label, what: str) -> int:
            try:
                return index[n][lab]
            except KeyError:
                raise ValidationError(
                    f"{what} leaves the simplex set", {"level": n, "simplex": lab}
                )

        faces = [[()] * len(labels[0])]
        for n in range(1, dim + 1):
            faces.append(
                [
                    tuple(lookup(n - 1, face(n, i, x), "face") for i in range(n + 1))
                    for x in labels[n]
                ]
            )
        degens = []
        for n in range(dim):
            degens.append(
                [
                    tuple(lookup(n + 1, degen(n, i, x), "degeneracy") for i in range(n + 1))
                    for x in labels[n]
                ]
            )
        degens.append([()] * len(labels[dim]))

        base_idx = None
        if base is not None:
            base_fn = base if callable(base) else (lambda n: base)
            base_idx = [lookup(n, base_fn(n), "basepoint") for n in range(dim + 1)]

        group = group or trivial_group()
        act = None
        if action is not None:
            act = [
                [tuple(lookup(n, action(g, n, x), "action") for x in labels[n]) for g in group.elements]
                for n in range(dim + 1)
            ]
        inv = None
        if involution is not None:
            inv = [
                tuple(lookup(n, involution(n, x), "involution") for x in labels[n])
                for n in range(dim + 1)
            ]
        return cls(labels, faces, degens, base_idx, group, act, inv, name)

    # Access

    def size(self, n: int) -> int:
        return len(self.labels[n])

    def face(self, n: int, i: int, x: int) -> int:
        return self.faces[n][x][i]

    def degeneracy(self, n: int, i: int, x: int) -> int:
        return self.degens[n][x][i]

    def act_on(self, g: int, n: int, x: int) -> int:
        return self.act[n][g][x]

    @property
    def pointed(self) -> bool:
        return self.base is not None

    @property
    def is_real(self) -> bool:
        return self.involution is not None

    def is_base(self, n: int, x: int) -> bool:
        return self.base is not None and self.base[n] == x

    def label(self, n: int, x: int) -> Label:
        return self.labels[n][x]

    @cached_property
    def _degenerate(self) -> List[FrozenSet[int]]:
        result = [frozenset()]
        for n in range(1, self.dim + 1):
            result.append(frozenset(s for x in range(self.size(n - 1)) for s in self.degens[n - 1][x]))
        return result

    def is_degenerate(self, n: int, x: int) -> bool:
        return x in self._degenerate[n]

    def nondegenerate(self, n: int) -> List[int]:
        return [x for x in range(self.size(n)) if x not in self._degenerate[n]]

    def nonbase(self, n: int) -> List[int]:
        return [x for x in range(self.size(n)) if not self.is_base(n, x)]

    def with_group(self, group: FiniteGroup) -> "SimplicialSet":
        """Same simplicial set with the trivial action of another group."""
        return SimplicialSet(
            self.labels, self.faces, self.degens, self.base, group, None, self.involution, self.name
        )

    def without_involution(self) -> "SimplicialSet":
        return SimplicialSet(
            self.labels, self.faces, self.degens, self.base, self.group, self.act, None, self.name
        )

    # Identities

    def check_identities(self) -> "SimplicialSet":
        """Raise ValidationError on the first failing simplicial, equivariance or Real identity."""
        d, s = self.face, self.degeneracy

        def fail(message, n, x, **extra):
            raise ValidationError(
                message, {"space": self.name, "level": n, "simplex": repr(self.label(n, x)), **extra}
            )

        for n in range(self.dim + 1):
            for x in range(self.size(n)):
                if n >= 2:
                    for j in range(n + 1):
                        for i in range(j):
                            if d(n - 1, i, d(n, j, x)) != d(n - 1, j - 1, d(n, i, x)):
                                fail("d_i d_j != d_{j-1} d_i", n, x, i=i, j=j)
                if n + 2 <= self.dim:
                    for j in range(n + 1):
                        for i in range(j + 1):
                            if s(n + 1, i, s(n, j, x)) != s(n + 1, j + 1, s(n, i, x)):
                                fail("s_i s_j != s_{j+1} s_i", n, x, i=i, j=j)
                if n + 1 <= self.dim:
                    for j in range(n + 1):
                        y = s(n, j, x)
                        for i in range(n + 2):
                            got = d(n + 1, i, y)
                            if i < j:
                                want = s(n - 1, j - 1, d(n, i, x))
                            elif i in (j, j + 1):
                                want = x
                            else:
                                want = s(n - 1, j, d(n, i - 1, x))
                            if got != want:
                                fail("mixed face/degeneracy identity", n, x, i=i, j=j)
            self._check_action(n, fail)
            if self.involution is not None:
                self._check_real(n, fail)
        return self

    def _check_action(self, n, fail):
        G = self.group
        for g in G.elements:
            for x in range(self.size(n)):
                gx = self.act[n][g][x]
                for h in G.elements:
                    if self.act[n][G.mul(g, h)][x] != self.act[n][g][self.act[n][h][x]]:
                        fail("action is not associative", n, x, g=g, h=h)
                if n >= 1:
                    for i in range(n + 1):
                        if self.act[n - 1][g][self.face(n, i, x)] != self.face(n, i, gx):
                            fail("action does not commute with faces", n, x, g=g, i=i)
                if n < self.dim:
                    for i in range(n + 1):
                        if self.act[n + 1][g][self.degeneracy(n, i, x)] != self.degeneracy(n, i, gx):
                            fail("action does not commute with degeneracies", n, x, g=g, i=i)
            if self.base is not None and self.act[n][g][self.base[n]] != self.base[n]:
                fail("basepoint is not fixed", n, self.base[n], g=g)
            if self.act[n][G.identity] != tuple(range(self.size(n))):
                fail("identity acts nontrivially", n, 0)

    def _check_real(self, n, fail):
        w = self.involution
        for x in range(self.size(n)):
            if w[n][w[n][x]] != x:
                fail("involution does not square to the identity", n, x)
            if n >= 1:
                for i in range(n + 1):
                    if w[n - 1][self.face(n, i, x)] != self.face(n, n - i, w[n][x]):
                        fail("w d_i != d_{n-i} w", n, x, i=i)
            if n < self.dim:
                for i in range(n + 1):
                    if w[n + 1][self.degeneracy(n, i, x)] != self.degeneracy(n, n - i, w[n][x]):
                        fail("w s_i != s_{n-i} w", n, x, i=i)
        if self.base is not None and w[n][self.base[n]] != self.base[n]:
            fail("basepoint is not fixed by the involution", n, self.base[n])

    def __repr__(self) -> str:
        sizes = [self.size(n) for n in range(self.dim + 1)]
        return f"SimplicialSet({self.name}, group={self.group.name}, sizes={sizes})"


RealSimplicialSet = SimplicialSet


class SimplicialMap:
    """Levelwise map of simplicial sets; maps[n][x] is the image index."""

    def __init__(self, source: SimplicialSet, target: SimplicialSet, maps: List[Tuple[int, ...]], name: str = "f"):
        if source.dim != target.dim:
            raise ValidationError(f"truncations differ: {source.dim} vs {target.dim}")
        self.source = source
        self.target = target
        self.maps = maps
        self.name = name

    @classmethod
    def from_function(cls, source, target, fn: Callable[[int, Label], Label], name="f") -> "SimplicialMap":
        maps = []
        for n in range(source.dim + 1):
            row = []
            for x in source.labels[n]:
                y = fn(n, x)
                if y not in target.index[n]:
                    raise ValidationError("map leaves the target", {"level": n, "simplex": repr(x)})
                row.append(target.index[n][y])
            maps.append(tuple(row))
        return cls(source, target, maps, name)

    @classmethod
    def identity(cls, X: SimplicialSet) -> "SimplicialMap":
        return cls(X, X, [tuple(range(X.size(n))) for n in range(X.dim + 1)], "id")

    @classmethod
    def to_point(cls, X: SimplicialSet) -> "SimplicialMap":
        P = point(X.dim, X.group)
        return cls(X, P, [(0,) * X.size(n) for n in range(X.dim + 1)], "to_point")

    @classmethod
    def from_point(cls, X: SimplicialSet) -> "SimplicialMap":
        P = point(X.dim, X.group)
        return cls(P, X, [(X.base[n],) for n in range(X.dim + 1)], "basepoint")

    def __call__(self, n: int, x: int) -> int:
        return self.maps[n][x]

    def check(self) -> "SimplicialMap":
        X, Y = self.source, self.target
        equivariant = X.group == Y.group
        for n in range(X.dim + 1):
            for x in range(X.size(n)):
                fx = self.maps[n][x]
                if n >= 1:
                    for i in range(n + 1):
                        if self.maps[n - 1][X.face(n, i, x)] != Y.face(n, i, fx):
                            raise ValidationError("map does not commute with faces", {"level": n, "simplex": repr(X.label(n, x)), "i": i})
                if n < X.dim:
                    for i in range(n + 1):
                        if self.maps[n + 1][X.degeneracy(n, i, x)] != Y.degeneracy(n, i, fx):
                            raise ValidationError("map does not commute with degeneracies", {"level": n, "simplex": repr(X.label(n, x)), "i": i})
                if equivariant:
                    for g in X.group.elements:
                        if self.maps[n][X.act[n][g][x]] != Y.act[n][g][fx]:
                            raise ValidationError("map is not equivariant", {"level": n, "simplex": repr(X.label(n, x)), "g": g})
                if X.involution is not None and Y.involution is not None:
                    if self.maps[n][X.involution[n][x]] != Y.involution[n][fx]:
                        raise ValidationError("map does not commute with the involution", {"level": n, "simplex": repr(X.label(n, x))})
            if X.base is not None and Y.base is not None and self.maps[n][X.base[n]] != Y.base[n]:
                raise ValidationError("map is not pointed", {"level": n})
        return self

    def is_injective(self) -> bool:
        return all(len(set(row)) == len(row) for row in self.maps)

    def is_isomorphism(self) -> bool:
        return self.is_injective() and all(
            len(self.maps[n]) == self.target.size(n) for n in range(self.source.dim + 1)
        )

    def compose(self, first: "SimplicialMap") -> "SimplicialMap":
        """self o first."""
        if first.target is not self.source:
            raise ValidationError("maps are not composable")
        maps = [tuple(self.maps[n][y] for y in first.maps[n]) for n in range(self.source.dim + 1)]
        return SimplicialMap(first.source, self.target, maps, f"{self.name}.{first.name}")

    def fixed_points(self, subgroup) -> "SimplicialMap":
        XH = fixed_points(self.source, subgroup)
        YH = fixed_points(self.target, subgroup)
        return SimplicialMap.from_function(
            XH, YH, lambda n, x: self.target.labels[n][self.maps[n][self.source.index[n][x]]], self.name
        )


# Basic objects


def point(dim: int, group: Optional[FiniteGroup] = None) -> SimplicialSet:
    return SimplicialSet.from_functions(
        [[BASE]] * (dim + 1),
        lambda n, i, x: BASE,
        lambda n, i, x: BASE,
        base=BASE,
        group=group,
        action=lambda g, n, x: BASE,
        involution=lambda n, x: BASE,
        name="pt",
    )


def discrete(points: FiniteGSet, dim: int) -> SimplicialSet:
    """J_+ : the constant simplicial G-set on J with a disjoint basepoint."""
    labels = [BASE] + list(range(points.size))
    return SimplicialSet.from_functions(
        [labels] * (dim + 1),
        lambda n, i, x: x,
        lambda n, i, x: x,
        base=BASE,
        group=points.group,
        action=lambda g, n, x: x if x == BASE else points.act(g, x),
        name="J+",
    )


def simplex(k: int, dim: int, pointed: bool = False) -> SimplicialSet:
    """Delta[k] as monotone tuples, with its Real involution; optionally with a disjoint basepoint."""
    levels = [monotone_tuples(n + 1, k) for n in range(dim + 1)]
    if pointed:
        levels = [[BASE] + lev for lev in levels]
    keep = (lambda f: lambda n, i, x: x if x == BASE else f(n, i, x))
    return SimplicialSet.from_functions(
        levels,
        keep(lambda n, i, x: _drop(x, i)),
        keep(lambda n, i, x: _repeat(x, i)),
        base=BASE if pointed else None,
        involution=lambda n, x: x if x == BASE else _reverse_monotone(x, k),
        name=f"D[{k}]" + ("+" if pointed else ""),
    )


def boundary(k: int, dim: int, pointed: bool = False) -> SimplicialSet:
    levels = [[t for t in monotone_tuples(n + 1, k) if len(set(t)) <= k] for n in range(dim + 1)]
    if pointed:
        levels = [[BASE] + lev for lev in levels]
    keep = (lambda f: lambda n, i, x: x if x == BASE else f(n, i, x))
    return SimplicialSet.from_functions(
        levels,
        keep(lambda n, i, x: _drop(x, i)),
        keep(lambda n, i, x: _repeat(x, i)),
        base=BASE if pointed else None,
        involution=lambda n, x: x if x == BASE else _reverse_monotone(x, k),
        name=f"dD[{k}]" + ("+" if pointed else ""),
    )


def sphere(k: int, dim: int, group: Optional[FiniteGroup] = None) -> SimplicialSet:
    """Delta[k]/boundary: surjections [n] -> [k] plus the collapsed basepoint.

    The reversal involution makes it a Real simplicial set; for k = 1 this is
    the sign circle S^{1,1}.
    """

    def face(n, i, x):
        if x == BASE:
            return BASE
        y = _drop(x, i)
        return y if len(set(y)) == k + 1 else BASE

    levels = [[BASE] + surjections(n, k) for n in range(dim + 1)]
    return SimplicialSet.from_functions(
        levels,
        face,
        lambda n, i, x: x if x == BASE else _repeat(x, i),
        base=BASE,
        group=group,
        action=(lambda g, n, x: x) if group is not None else None,
        involution=lambda n, x: x if x == BASE else _reverse_monotone(x, k),
        name=f"S^{k}",
    )


def real_circle(dim: int) -> SimplicialSet:
    """S^{1,1}: the simplicial circle with (i_0..i_p) -> (1-i_p..1-i_0)."""
    X = sphere(1, dim)
    X.name = "S^{1,1}"
    return X


def real_sphere(k: int, dim: int) -> SimplicialSet:
    return sphere(k, dim)


def quotient(X: SimplicialSet, sub: Sequence[Sequence[int]], name: Optional[str] = None) -> SimplicialSet:
    """Collapse a sub-simplicial set (indices per level, closed under structure maps) to the basepoint."""
    subsets = [set(level) for level in sub]
    if X.base is not None:
        for n in range(X.dim + 1):
            subsets[n].add(X.base[n])
    for n in range(X.dim + 1):
        for x in subsets[n]:
            if n >= 1 and any(X.face(n, i, x) not in subsets[n - 1] for i in range(n + 1)):
                raise ValidationError("collapsed subset is not closed under faces", {"level": n})
            if any(X.act[n][g][x] not in subsets[n] for g in X.group.elements):
                raise ValidationError("collapsed subset is not invariant", {"level": n})

    def collapse(n, x):
        return BASE if x in subsets[n] else X.labels[n][x]

    levels = [[BASE] + [X.labels[n][x] for x in range(X.size(n)) if x not in subsets[n]] for n in range(X.dim + 1)]
    inv = None
    if X.involution is not None:
        inv = lambda n, lab: lab if lab == BASE else collapse(n, X.involution[n][X.index[n][lab]])
    return SimplicialSet.from_functions(
        levels,
        lambda n, i, lab: BASE if lab == BASE else collapse(n - 1, X.face(n, i, X.index[n][lab])),
        lambda n, i, lab: BASE if lab == BASE else collapse(n + 1, X.degeneracy(n, i, X.index[n][lab])),
        base=BASE,
        group=X.group,
        action=lambda g, n, lab: BASE if lab == BASE else collapse(n, X.act[n][g][X.index[n][lab]]),
        involution=inv,
        name=name or f"{X.name}/A",
    )


def truncate(X: SimplicialSet, dim: int) -> SimplicialSet:
    """Levels 0..dim of X."""
    if not 0 <= dim <= X.dim:
        raise ValidationError(f"cannot truncate {X.name} at {dim}", {"top": X.dim})
    if dim == X.dim:
        return X
    return SimplicialSet(
        X.labels[: dim + 1],
        X.faces[: dim + 1],
        X.degens[:dim] + [[()] * X.size(dim)],
        base=X.base[: dim + 1] if X.base is not None else None,
        group=X.group,
        act=X.act[: dim + 1],
        involution=X.involution[: dim + 1] if X.involution is not None else None,
        name=X.name,
    )


def from_nondegenerate(
    dim: int,
    simplices: Dict[int, List[Label]],
    faces: Dict[Label, List[Tuple[Tuple[int, ...], Label]]],
    base: Optional[Label] = None,
    group: Optional[FiniteGroup] = None,
    action: Optional[Dict[int, Dict[Label, Label]]] = None,
    involution: Optional[Dict[Label, Label]] = None,
    name: str = "X",
) -> SimplicialSet:
    """
    Build from nondegenerate simplices. faces[y][i] = (eps, z) says d_i y = eps^* z
    for a monotone surjection eps onto [dim z]. Simplices at level m are pairs
    (eta, y) with eta: [m] -> [dim y] a monotone surjection.
    """
    dim_of = {y: k for k, ys in simplices.items() for y in ys}

    def face(m, i, x):
        eta, y = x
        rest = _drop(eta, i)
        k = dim_of[y]
        if len(set(rest)) == k + 1:
            return (rest, y)
        j = next(v for v in range(k + 1) if v not in rest)
        lowered = tuple(v - 1 if v > j else v for v in rest)
        eps, z = faces[y][j]
        return (tuple(eps[v] for v in lowered), z)

    levels = []
    for m in range(dim + 1):
        levels.append(
            [(eta, y) for k in sorted(simplices) if k <= m for y in simplices[k] for eta in surjections(m, k)]
        )

    act_fn = None
    if action is not None:
        act_fn = lambda g, n, x: (x[0], action.get(g, {}).get(x[1], x[1]))
    inv_fn = None
    if involution is not None:
        inv_fn = lambda n, x: (_reverse_monotone(x[0], dim_of[x[1]]), involution[x[1]])
    return SimplicialSet.from_functions(
        levels,
        face,
        lambda n, i, x: (_repeat(x[0], i), x[1]),
        base=(lambda n: ((0,) * (n + 1), base)) if base is not None else None,
        group=group,
        action=act_fn,
        involution=inv_fn,
        name=name,
    )


# Products, wedges, smashes


def _same_group(*spaces: SimplicialSet) -> FiniteGroup:
    group = spaces[0].group
    for X in spaces[1:]:
        if X.group != group:
            raise GroupMismatchError(f"{group.name} vs {X.group.name}")
        if X.dim != spaces[0].dim:
            raise ValidationError(f"truncations differ: {spaces[0].dim} vs {X.dim}")
    return group


def _both_real(*spaces):
    return all(X.involution is not None for X in spaces)


def product(X: SimplicialSet, Y: SimplicialSet) -> SimplicialSet:
    group = _same_group(X, Y)
    levels = [list(itertools.product(range(X.size(n)), range(Y.size(n)))) for n in range(X.dim + 1)]
    inv = None
    if _both_real(X, Y):
        inv = lambda n, p: (X.involution[n][p[0]], Y.involution[n][p[1]])
    base = None
    if X.pointed and Y.pointed:
        base = lambda n: (X.base[n], Y.base[n])
    P = SimplicialSet.from_functions(
        levels,
        lambda n, i, p: (X.face(n, i, p[0]), Y.face(n, i, p[1])),
        lambda n, i, p: (X.degeneracy(n, i, p[0]), Y.degeneracy(n, i, p[1])),
        base=base,
        group=group,
        action=lambda g, n, p: (X.act[n][g][p[0]], Y.act[n][g][p[1]]),
        involution=inv,
        name=f"({X.name} x {Y.name})",
    )
    return P


def _require_pointed(*spaces):
    for X in spaces:
        if not X.pointed:
            raise ValidationError(f"{X.name} is not pointed")


def wedge(X: SimplicialSet, Y: SimplicialSet) -> SimplicialSet:
    group = _same_group(X, Y)
    _require_pointed(X, Y)
    parts = (X, Y)

    def tag(n, k, x):
        return BASE if parts[k].is_base(n, x) else (k, x)

    levels = [[BASE] + [(k, x) for k in (0, 1) for x in parts[k].nonbase(n)] for n in range(X.dim + 1)]
    inv = None
    if _both_real(X, Y):
        inv = lambda n, t: BASE if t == BASE else tag(n, t[0], parts[t[0]].involution[n][t[1]])
    return SimplicialSet.from_functions(
        levels,
        lambda n, i, t: BASE if t == BASE else tag(n - 1, t[0], parts[t[0]].face(n, i, t[1])),
        lambda n, i, t: BASE if t == BASE else tag(n + 1, t[0], parts[t[0]].degeneracy(n, i, t[1])),
        base=BASE,
        group=group,
        action=lambda g, n, t: BASE if t == BASE else tag(n, t[0], parts[t[0]].act[n][g][t[1]]),
        involution=inv,
        name=f"({X.name} v {Y.name})",
    )


def smash(X: SimplicialSet, Y: SimplicialSet) -> SimplicialSet:
    group = _same_group(X, Y)
    _require_pointed(X, Y)

    def pair(n, x, y):
        return BASE if X.is_base(n, x) or Y.is_base(n, y) else (x, y)

    levels = [[BASE] + list(itertools.product(X.nonbase(n), Y.nonbase(n))) for n in range(X.dim + 1)]
    inv = None
    if _both_real(X, Y):
        inv = lambda n, p: BASE if p == BASE else pair(n, X.involution[n][p[0]], Y.involution[n][p[1]])
    return SimplicialSet.from_functions(
        levels,
        lambda n, i, p: BASE if p == BASE else pair(n - 1, X.face(n, i, p[0]), Y.face(n, i, p[1])),
        lambda n, i, p: BASE if p == BASE else pair(n + 1, X.degeneracy(n, i, p[0]), Y.degeneracy(n, i, p[1])),
        base=BASE,
        group=group,
        action=lambda g, n, p: BASE if p == BASE else pair(n, X.act[n][g][p[0]], Y.act[n][g][p[1]]),
        involution=inv,
        name=f"({X.name} ^ {Y.name})",
    )


def _check_indexing(X: SimplicialSet, J: FiniteGSet):
    if X.group != J.group:
        raise GroupMismatchError(f"{X.name} over {X.group.name}, J over {J.group.name}")
    _require_pointed(X)


def indexed_wedge(X: SimplicialSet, J: FiniteGSet) -> SimplicialSet:
    """J-indexed wedge with g(x, j) = (gx, gj)."""
    _check_indexing(X, J)

    def tag(n, x, j):
        return BASE if X.is_base(n, x) else (x, j)

    levels = [[BASE] + [(x, j) for j in range(J.size) for x in X.nonbase(n)] for n in range(X.dim + 1)]
    return SimplicialSet.from_functions(
        levels,
        lambda n, i, t: BASE if t == BASE else tag(n - 1, X.face(n, i, t[0]), t[1]),
        lambda n, i, t: BASE if t == BASE else tag(n + 1, X.degeneracy(n, i, t[0]), t[1]),
        base=BASE,
        group=X.group,
        action=lambda g, n, t: BASE if t == BASE else tag(n, X.act[n][g][t[0]], J.act(g, t[1])),
        name=f"v_J {X.name}",
    )


def _permute_tuple(X: SimplicialSet, J: FiniteGSet, g: int, n: int, xs: Tuple[int, ...]) -> Tuple[int, ...]:
    ginv = X.group.inv(g)
    return tuple(X.act[n][g][xs[J.act(ginv, j)]] for j in range(J.size))


def indexed_product(X: SimplicialSet, J: FiniteGSet) -> SimplicialSet:
    """J-tuples with g(x)_j = g x_{g^-1 j}."""
    _check_indexing(X, J)
    sizes = [X.size(n) ** J.size for n in range(X.dim + 1)]
    check_bound("ENUMERATION_LIMIT", settings.ENUMERATION_LIMIT, max(sizes))
    levels = [list(itertools.product(range(X.size(n)), repeat=J.size)) for n in range(X.dim + 1)]
    return SimplicialSet.from_functions(
        levels,
        lambda n, i, xs: tuple(X.face(n, i, x) for x in xs),
        lambda n, i, xs: tuple(X.degeneracy(n, i, x) for x in xs),
        base=lambda n: (X.base[n],) * J.size,
        group=X.group,
        action=lambda g, n, xs: _permute_tuple(X, J, g, n, xs),
        name=f"prod_J {X.name}",
    )


def comparison_map(X: SimplicialSet, J: FiniteGSet) -> SimplicialMap:
    """The inclusion of the indexed wedge into the indexed product."""
    W = indexed_wedge(X, J)
    P = indexed_product(X, J)

    def fn(n, t):
        if t == BASE:
            return (X.base[n],) * J.size
        x, j = t
        return tuple(x if k == j else X.base[n] for k in range(J.size))

    return SimplicialMap.from_function(W, P, fn, "wedge_to_product")


def indexed_smash(X: SimplicialSet, J: FiniteGSet) -> SimplicialSet:
    _check_indexing(X, J)

    def collapse(n, xs):
        return BASE if any(X.is_base(n, x) for x in xs) else xs

    levels = [[BASE] + list(itertools.product(X.nonbase(n), repeat=J.size)) for n in range(X.dim + 1)]
    check_bound("ENUMERATION_LIMIT", settings.ENUMERATION_LIMIT, max(len(lev) for lev in levels))
    return SimplicialSet.from_functions(
        levels,
        lambda n, i, xs: BASE if xs == BASE else collapse(n - 1, tuple(X.face(n, i, x) for x in xs)),
        lambda n, i, xs: BASE if xs == BASE else collapse(n + 1, tuple(X.degeneracy(n, i, x) for x in xs)),
        base=BASE,
        group=X.group,
        action=lambda g, n, xs: BASE if xs == BASE else _permute_tuple(X, J, g, n, xs),
        name=f"^_J {X.name}",
    )


def rep_sphere(I: FiniteGSet, dim: int) -> SimplicialSet:
    """S^{R[I]}: the I-fold smash of simplicial circles with G permuting factors."""
    if I.size == 0:
        raise ValidationError("representation sphere needs a nonempty G-set")
    S = indexed_smash(sphere(1, dim, I.group), I)
    S.name = f"S^R[{I.size}]"
    return S


def suspension(X: SimplicialSet) -> SimplicialSet:
    S = smash(sphere(1, X.dim, X.group), X)
    S.name = f"S{X.name}"
    return S


def cone(X: SimplicialSet) -> Tuple[SimplicialSet, SimplicialMap]:
    """Reduced cone X ^ (Delta[1], 1) and the inclusion x -> (x, 0...0)."""
    _require_pointed(X)
    ones = [(1,) * (n + 1) for n in range(X.dim + 1)]

    def pair(n, x, a):
        return BASE if X.is_base(n, x) or a == ones[n] else (x, a)

    levels = [
        [BASE] + [(x, a) for x in X.nonbase(n) for a in monotone_tuples(n + 1, 1) if a != ones[n]]
        for n in range(X.dim + 1)
    ]
    C = SimplicialSet.from_functions(
        levels,
        lambda n, i, p: BASE if p == BASE else pair(n - 1, X.face(n, i, p[0]), _drop(p[1], i)),
        lambda n, i, p: BASE if p == BASE else pair(n + 1, X.degeneracy(n, i, p[0]), _repeat(p[1], i)),
        base=BASE,
        group=X.group,
        action=lambda g, n, p: BASE if p == BASE else (X.act[n][g][p[0]], p[1]),
        name=f"C{X.name}",
    )
    inclusion = SimplicialMap.from_function(
        X, C, lambda n, x: pair(n, X.index[n][x], (0,) * (n + 1)), "cone_inclusion"
    )
    return C, inclusion


def mapping_cylinder(f: SimplicialMap) -> Tuple[SimplicialSet, SimplicialMap, SimplicialMap]:
    """Reduced cylinder of f: X -> Y, with the end inclusion X -> Cyl and the projection Cyl -> Y."""
    X, Y = f.source, f.target
    _require_pointed(X, Y)
    ones = [(1,) * (n + 1) for n in range(X.dim + 1)]

    def cell(n, x, a):
        if X.is_base(n, x):
            return ("Y", Y.base[n])
        if a == ones[n]:
            return ("Y", f(n, x))
        return ("C", x, a)

    levels = [
        [("Y", y) for y in range(Y.size(n))]
        + [("C", x, a) for x in X.nonbase(n) for a in monotone_tuples(n + 1, 1) if a != ones[n]]
        for n in range(X.dim + 1)
    ]

    def face(n, i, c):
        if c[0] == "Y":
            return ("Y", Y.face(n, i, c[1]))
        return cell(n - 1, X.face(n, i, c[1]), _drop(c[2], i))

    def degen(n, i, c):
        if c[0] == "Y":
            return ("Y", Y.degeneracy(n, i, c[1]))
        return cell(n + 1, X.degeneracy(n, i, c[1]), _repeat(c[2], i))

    def act(g, n, c):
        if c[0] == "Y":
            return ("Y", Y.act[n][g][c[1]])
        return ("C", X.act[n][g][c[1]], c[2])

    group = _same_group(X, Y)
    Cyl = SimplicialSet.from_functions(
        levels, face, degen, base=lambda n: ("Y", Y.base[n]), group=group, action=act, name=f"Cyl({f.name})"
    )
    end = SimplicialMap.from_function(
        X, Cyl, lambda n, x: cell(n, X.index[n][x], (0,) * (n + 1)), "cylinder_inclusion"
    )
    proj = SimplicialMap.from_function(
        Cyl, Y, lambda n, c: Y.labels[n][c[1] if c[0] == "Y" else f(n, c[1])], "cylinder_projection"
    )
    return Cyl, end, proj


def pushout(f: SimplicialMap, g: SimplicialMap) -> Tuple[SimplicialSet, SimplicialMap, SimplicialMap]:
    """X u_A Y for f: A -> X injective and g: A -> Y; returns (P, X -> P, Y -> P)."""
    if f.source is not g.source:
        raise ValidationError("pushout legs must share their source")
    if not f.is_injective():
        raise ValidationError("pushout along a non-injective map", {"map": f.name})
    A, X, Y = f.source, f.target, g.target
    group = _same_group(A, X, Y)
    preimage = [{f(n, a): a for a in range(A.size(n))} for n in range(A.dim + 1)]

    def from_x(n, x):
        a = preimage[n].get(x)
        return ("Y", g(n, a)) if a is not None else ("X", x)

    levels = [
        [("Y", y) for y in range(Y.size(n))] + [("X", x) for x in range(X.size(n)) if x not in preimage[n]]
        for n in range(X.dim + 1)
    ]

    def structure(fx, fy):
        return lambda n, i, c: fy(n, i, c[1]) if c[0] == "Y" else fx(n, i, c[1])

    base = None
    if Y.pointed:
        base = lambda n: ("Y", Y.base[n])
    P = SimplicialSet.from_functions(
        levels,
        structure(lambda n, i, x: from_x(n - 1, X.face(n, i, x)), lambda n, i, y: ("Y", Y.face(n, i, y))),
        structure(lambda n, i, x: from_x(n + 1, X.degeneracy(n, i, x)), lambda n, i, y: ("Y", Y.degeneracy(n, i, y))),
        base=base,
        group=group,
        action=lambda h, n, c: ("Y", Y.act[n][h][c[1]]) if c[0] == "Y" else from_x(n, X.act[n][h][c[1]]),
        name=f"({X.name} u {Y.name})",
    )
    jx = SimplicialMap.from_function(X, P, lambda n, x: from_x(n, X.index[n][x]), "pushout_x")
    jy = SimplicialMap.from_function(Y, P, lambda n, y: ("Y", Y.index[n][y]), "pushout_y")
    return P, jx, jy


def cofiber(f: SimplicialMap) -> Tuple[SimplicialSet, SimplicialMap]:
    """Y/X for an injective pointed map f: X -> Y, with the quotient map."""
    P, jy, _ = pushout(f, SimplicialMap.to_point(f.source))
    P.name = f"{f.target.name}/{f.source.name}"
    return P, jy


@dataclass
class GCube:
    """Strongly cocartesian cube built by iterated pushouts; vertices keyed by subsets."""

    vertices: Dict[FrozenSet[int], SimplicialSet]
    edges: Dict[Tuple[FrozenSet[int], FrozenSet[int]], SimplicialMap]
    initial_maps: List[SimplicialMap]

    @property
    def size(self) -> int:
        return len(self.initial_maps)

    def terminal(self) -> SimplicialSet:
        return self.vertices[frozenset(range(self.size))]

    def check(self) -> "GCube":
        for (S, T), e in self.edges.items():
            e.check()
        for S in self.vertices:
            for i, j in itertools.combinations([k for k in range(self.size) if k not in S], 2):
                Si, Sj, Sij = S | {i}, S | {j}, S | {i, j}
                left = self.edges[(Si, Sij)].compose(self.edges[(S, Si)])
                right = self.edges[(Sj, Sij)].compose(self.edges[(S, Sj)])
                if left.maps != right.maps:
                    raise ValidationError("cube square does not commute", {"vertex": sorted(S), "i": i, "j": j})
        return self


def build_cocartesian_cube(maps: Sequence[SimplicialMap]) -> GCube:
    """Iterated pushout of levelwise injective maps e_i: X_0 -> Y_i."""
    if not maps:
        raise ValidationError("a cube needs at least one initial map")
    A = maps[0].source
    for e in maps:
        if e.source is not A:
            raise ValidationError("initial maps must share their domain")
        if not e.is_injective():
            raise ValidationError("initial map is not levelwise injective", {"map": e.name})
        _same_group(A, e.target)
    images = [[{e(n, a): a for a in range(A.size(n))} for n in range(A.dim + 1)] for e in maps]

    def normal(n, k, y):
        a = images[k][n].get(y)
        return ("0", a) if a is not None else (k, y)

    def vertex(S: FrozenSet[int]) -> SimplicialSet:
        ks = sorted(S)
        levels = [
            [("0", a) for a in range(A.size(n))]
            + [(k, y) for k in ks for y in range(maps[k].target.size(n)) if y not in images[k][n]]
            for n in range(A.dim + 1)
        ]

        def lift(fa, fy):
            return lambda n, i, c: ("0", fa(n, i, c[1])) if c[0] == "0" else fy(n, i, c[0], c[1])

        base = (lambda n: ("0", A.base[n])) if A.pointed else None
        return SimplicialSet.from_functions(
            levels,
            lift(A.face, lambda n, i, k, y: normal(n - 1, k, maps[k].target.face(n, i, y))),
            lift(A.degeneracy, lambda n, i, k, y: normal(n + 1, k, maps[k].target.degeneracy(n, i, y))),
            base=base,
            group=A.group,
            action=lambda g, n, c: ("0", A.act[n][g][c[1]]) if c[0] == "0" else normal(n, c[0], maps[c[0]].target.act[n][g][c[1]]),
            name="X_" + "".join(map(str, ks)),
        )

    count = len(maps)
    vertices = {}
    for r in range(count + 1):
        for ks in itertools.combinations(range(count), r):
            vertices[frozenset(ks)] = vertex(frozenset(ks))
    edges = {}
    for S, V in vertices.items():
        for k in range(count):
            if k in S:
                continue
            T = S | {k}
            edges[(S, T)] = SimplicialMap.from_function(V, vertices[T], lambda n, c: c, f"inc{k}")
    logger.info("cocartesian_cube_built", size=count, vertices=len(vertices))
    return GCube(vertices, edges, list(maps))


# Fixed points and subdivision


def fixed_points(X: SimplicialSet, subgroup) -> SimplicialSet:
    sub = frozenset(subgroup)
    keep = [[x for x in range(X.size(n)) if all(X.act[n][h][x] == x for h in sub)] for n in range(X.dim + 1)]
    levels = [[X.labels[n][x] for x in keep[n]] for n in range(X.dim + 1)]

    def via(table):
        return lambda n, i, lab: X.labels[n + table][
            (X.faces if table < 0 else X.degens)[n][X.index[n][lab]][i]
        ]

    inv = None
    if X.involution is not None and X.group.order == 1:
        inv = lambda n, lab: X.labels[n][X.involution[n][X.index[n][lab]]]
    return SimplicialSet.from_functions(
        levels,
        via(-1),
        via(1),
        base=(lambda n: X.labels[n][X.base[n]]) if X.pointed else None,
        involution=inv,
        name=f"{X.name}^H",
    )


def edgewise_subdivide(Z: SimplicialSet) -> SimplicialSet:
    """sd_e Z: level p is Z_{2p+1}; C2 acts through the involution."""
    if Z.involution is None:
        raise ValidationError(f"{Z.name} has no Real structure")
    out_dim = (Z.dim - 1) // 2
    if out_dim < 0:
        raise ValidationError("edgewise subdivision needs Z_1")
    C2 = FiniteGroup.cyclic(2)
    w = Z.involution

    def idx(p, lab):
        return Z.index[2 * p + 1][lab]

    def face(p, i, lab):
        m = 2 * p + 1
        return Z.labels[m - 2][Z.face(m - 1, i, Z.face(m, m - i, idx(p, lab)))]

    def degen(p, i, lab):
        m = 2 * p + 1
        return Z.labels[m + 2][Z.degeneracy(m + 1, i, Z.degeneracy(m, m - i, idx(p, lab)))]

    return SimplicialSet.from_functions(
        [Z.labels[2 * p + 1] for p in range(out_dim + 1)],
        face,
        degen,
        base=(lambda p: Z.labels[2 * p + 1][Z.base[2 * p + 1]]) if Z.pointed else None,
        group=C2,
        action=lambda g, p, lab: lab if g == 0 else Z.labels[2 * p + 1][w[2 * p + 1][idx(p, lab)]],
        name=f"sd_e {Z.name}",
    )


# Retractive objects


class RetractiveGSset:
    """(X, p, s) over B with p o s = id_B and s levelwise injective."""

    def __init__(self, total: SimplicialSet, base: SimplicialSet, p: SimplicialMap, s: SimplicialMap):
        self.total = total
        self.base = base
        self.p = p
        self.s = s
        if p.source is not total or p.target is not base or s.source is not base or s.target is not total:
            raise ValidationError("retraction data does not match the spaces")
        if p.compose(s).maps != SimplicialMap.identity(base).maps:
            raise ValidationError("p o s is not the identity")
        if not s.is_injective():
            raise ValidationError("section is not injective")

    @classmethod
    def unit(cls, B: SimplicialSet) -> "RetractiveGSset":
        """S^0 x B."""
        levels = [[(e, b) for e in (BASE, 1) for b in range(B.size(n))] for n in range(B.dim + 1)]
        T = SimplicialSet.from_functions(
            levels,
            lambda n, i, t: (t[0], B.face(n, i, t[1])),
            lambda n, i, t: (t[0], B.degeneracy(n, i, t[1])),
            group=B.group,
            action=lambda g, n, t: (t[0], B.act[n][g][t[1]]),
            base=(lambda n: (BASE, B.base[n])) if B.pointed else None,
            name=f"S0 x {B.name}",
        )
        p = SimplicialMap.from_function(T, B, lambda n, t: B.labels[n][t[1]], "p")
        s = SimplicialMap.from_function(B, T, lambda n, b: (BASE, B.index[n][b]), "s")
        return cls(T, B, p, s)

    @classmethod
    def trivial_over(cls, B: SimplicialSet, X: SimplicialSet) -> "RetractiveGSset":
        """X x B with section b -> (*, b)."""
        _require_pointed(X)
        T = product(X, B)
        p = SimplicialMap.from_function(T, B, lambda n, t: B.labels[n][t[1]], "p")
        s = SimplicialMap.from_function(B, T, lambda n, b: (X.base[n], B.index[n][b]), "s")
        return cls(T, B, p, s)

    @classmethod
    def over_point(cls, X: SimplicialSet) -> "RetractiveGSset":
        _require_pointed(X)
        P = point(X.dim, X.group)
        return cls(X, P, SimplicialMap.to_point(X), SimplicialMap.from_point(X))

    def in_section(self, n: int, x: int) -> bool:
        return self.s(n, self.p(n, x)) == x


def smash_over_base(X: RetractiveGSset, Y: RetractiveGSset) -> RetractiveGSset:
    """X ^_B Y: pairs over the same base simplex, away from the sections, plus a copy of B."""
    if X.base is not Y.base:
        raise ValidationError("smash over base needs a common base")
    B = X.base
    _same_group(X.total, Y.total)
    Xt, Yt = X.total, Y.total

    def pair(n, x, y):
        if X.in_section(n, x) or Y.in_section(n, y):
            return ("B", X.p(n, x))
        return (x, y)

    levels = []
    for n in range(B.dim + 1):
        level = [("B", b) for b in range(B.size(n))]
        free_y: Dict[int, List[int]] = {}
        for y in range(Yt.size(n)):
            if not Y.in_section(n, y):
                free_y.setdefault(Y.p(n, y), []).append(y)
        for x in range(Xt.size(n)):
            if not X.in_section(n, x):
                level.extend((x, y) for y in free_y.get(X.p(n, x), []))
        levels.append(level)

    def structure(fb, fx, fy, shift):
        def apply(n, i, c):
            if c[0] == "B":
                return ("B", fb(n, i, c[1]))
            return pair(n + shift, fx(n, i, c[0]), fy(n, i, c[1]))

        return apply

    T = SimplicialSet.from_functions(
        levels,
        structure(B.face, Xt.face, Yt.face, -1),
        structure(B.degeneracy, Xt.degeneracy, Yt.degeneracy, 1),
        base=(lambda n: ("B", B.base[n])) if B.pointed else None,
        group=B.group,
        action=lambda g, n, c: ("B", B.act[n][g][c[1]]) if c[0] == "B" else pair(n, Xt.act[n][g][c[0]], Yt.act[n][g][c[1]]),
        name=f"({Xt.name} ^_B {Yt.name})",
    )
    p = SimplicialMap.from_function(
        T, B, lambda n, c: B.labels[n][c[1] if c[0] == "B" else X.p(n, c[0])], "p"
    )
    s = SimplicialMap.from_function(B, T, lambda n, b: ("B", B.index[n][b]), "s")
    return RetractiveGSset(T, B, p, s)


def indexed_wedge_over_base(X: RetractiveGSset, J: FiniteGSet) -> RetractiveGSset:
    """The indexed wedge over B: X ^_B (J_+ x B)."""
    return smash_over_base(X, RetractiveGSset.trivial_over(X.base, discrete(J, X.base.dim)))


def suspension_over_base(X: RetractiveGSset, I: FiniteGSet) -> RetractiveGSset:
    """S^{R[I]}_B X = X ^_B (S^{R[I]} x B)."""
    return smash_over_base(X, RetractiveGSset.trivial_over(X.base, rep_sphere(I, X.base.dim)))


# Random Real simplicial sets for property suites


def random_real_simplicial_set(rng: random.Random, dim: int, depth: int = 1) -> SimplicialSet:
    """A random wedge/smash/product combination of small Real spheres."""

    def leaf():
        choice = rng.randrange(4)
        if choice == 0:
            return real_circle(dim)
        if choice == 1:
            return real_sphere(2, dim)
        if choice == 2:
            return boundary(2, dim, pointed=True)
        return simplex(1, dim, pointed=True)

    def build(d):
        if d == 0 or rng.random() < 0.35:
            return leaf()
        op = rng.randrange(3)
        left = build(d - 1)
        if op == 0:
            return wedge(left, build(d - 1))
        if op == 1:
            return smash(left, leaf())
        return product(left, real_circle(dim))

    Z = build(depth)
    logger.debug("random_real_set_built", name=Z.name, top=Z.size(dim))
    return Z
