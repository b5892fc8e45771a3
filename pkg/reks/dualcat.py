"""
Finite categories with duality.

Categories are given by object lists and hom/composition functions; hom-sets
are materialized lazily and cached, so every law can be checked by brute
force on the finite tables. A duality is a contravariant endofunctor D with a
natural isomorphism eta: id => D^2 (absent when D is strict).

Constructions here: the strictification DC of a category with duality, the
strictified bimodule DM, the sym category of self-dual isomorphisms, the
semidirect product C x| M and the coproduct groupoid of M, the split
extension classification, the strict replacement of an equivalence, Real
nerves, and the swallowing retraction r with its homotopy H.
"""

import itertools
import random
from dataclasses import dataclass
from typing import Any, Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import structlog

from .core.config import settings
from .core.exceptions import BoundError, ValidationError, check_bound
from .homology import homology, reduced_chains
from .models.reports import CheckReport
from .sset import BASE, SimplicialSet, edgewise_subdivide, fixed_points

logger = structlog.get_logger()

Obj = Hashable

# Object tuples examined exhaustively by the law checks before sampling
TUPLE_BUDGET = 4096


@dataclass(frozen=True)
class Arrow:
    src: Obj
    tgt: Obj
    data: Hashable

    def __repr__(self) -> str:
        return f"{self.data!r}: {self.src!r} -> {self.tgt!r}"


def _object_tuples(objects: Sequence[Obj], arity: int, rng: random.Random) -> Tuple[List[Tuple], bool]:
    if len(objects) ** arity <= TUPLE_BUDGET:
        return list(itertools.product(objects, repeat=arity)), False
    return [tuple(rng.choice(objects) for _ in range(arity)) for _ in range(TUPLE_BUDGET)], True


class FinCat:
    """
    A finite category.

    hom(a, b) lists the data of the arrows a -> b; compose(g, f) returns the
    data of g o f. Additive categories also pass add, neg and zero on
    parallel arrows.
    """

    def __init__(
        self,
        objects: Iterable[Obj],
        hom: Callable[[Obj, Obj], Iterable[Hashable]],
        compose: Callable[[Arrow, Arrow], Hashable],
        identity: Callable[[Obj], Hashable],
        name: str = "C",
        add: Optional[Callable[[Arrow, Arrow], Hashable]] = None,
        neg: Optional[Callable[[Arrow], Hashable]] = None,
        zero: Optional[Callable[[Obj, Obj], Hashable]] = None,
    ):
        self.objects = list(objects)
        self.name = name
        self._hom = hom
        self._compose = compose
        self._identity = identity
        self._add = add
        self._neg = neg
        self._zero = zero
        self._homs: Dict[Tuple[Obj, Obj], List[Arrow]] = {}
        self._hom_sets: Dict[Tuple[Obj, Obj], frozenset] = {}
        self._inverses: Dict[Arrow, Optional[Arrow]] = {}

    def __repr__(self) -> str:
        return f"FinCat({self.name}, objects={len(self.objects)})"

    # Arrows

    def hom(self, a: Obj, b: Obj) -> List[Arrow]:
        key = (a, b)
        if key not in self._homs:
            arrows = [Arrow(a, b, d) for d in self._hom(a, b)]
            check_bound("ENUMERATION_LIMIT", settings.ENUMERATION_LIMIT, len(arrows))
            self._homs[key] = arrows
        return self._homs[key]

    def contains(self, f: Arrow) -> bool:
        key = (f.src, f.tgt)
        if key not in self._hom_sets:
            self._hom_sets[key] = frozenset(self.hom(*key))
        return f in self._hom_sets[key]

    def arrows(self) -> Iterable[Arrow]:
        for a in self.objects:
            for b in self.objects:
                yield from self.hom(a, b)

    def identity(self, a: Obj) -> Arrow:
        return Arrow(a, a, self._identity(a))

    def compose(self, g: Arrow, f: Arrow) -> Arrow:
        """g o f."""
        if f.tgt != g.src:
            raise ValidationError("arrows are not composable", {"f": repr(f), "g": repr(g)})
        return Arrow(f.src, g.tgt, self._compose(g, f))

    def chain(self, *arrows: Arrow) -> Arrow:
        """Composite of arrows listed in the order they are applied."""
        out = arrows[0]
        for f in arrows[1:]:
            out = self.compose(f, out)
        return out

    def inverse(self, f: Arrow) -> Optional[Arrow]:
        if f not in self._inverses:
            found = None
            for g in self.hom(f.tgt, f.src):
                if self.compose(g, f) == self.identity(f.src) and self.compose(f, g) == self.identity(f.tgt):
                    found = g
                    break
            self._inverses[f] = found
        return self._inverses[f]

    def invert(self, f: Arrow) -> Arrow:
        g = self.inverse(f)
        if g is None:
            raise ValidationError("arrow is not an isomorphism", {"arrow": repr(f)})
        return g

    def isomorphisms(self, a: Obj, b: Obj) -> List[Arrow]:
        return [f for f in self.hom(a, b) if self.inverse(f) is not None]

    # Additive structure

    @property
    def additive(self) -> bool:
        return self._add is not None

    def add(self, f: Arrow, g: Arrow) -> Arrow:
        if (f.src, f.tgt) != (g.src, g.tgt):
            raise ValidationError("arrows are not parallel", {"f": repr(f), "g": repr(g)})
        return Arrow(f.src, f.tgt, self._add(f, g))

    def neg(self, f: Arrow) -> Arrow:
        return Arrow(f.src, f.tgt, self._neg(f))

    def zero(self, a: Obj, b: Obj) -> Arrow:
        return Arrow(a, b, self._zero(a, b))

    # Derived categories

    def core(self) -> "FinCat":
        """The subcategory of isomorphisms iC."""
        return FinCat(
            self.objects,
            lambda a, b: [f.data for f in self.isomorphisms(a, b)],
            self._compose,
            self._identity,
            name=f"i{self.name}",
        )

    def check(self, rng: Optional[random.Random] = None) -> CheckReport:
        """Unit and associativity laws."""
        rng = rng or random.Random(settings.SEED)
        name = f"category_laws[{self.name}]"
        checked = 0
        for a in self.objects:
            for b in self.objects:
                for f in self.hom(a, b):
                    checked += 1
                    if self.compose(f, self.identity(a)) != f or self.compose(self.identity(b), f) != f:
                        return CheckReport.failure(name, "unit law fails", checked, arrow=f)
        triples, sampled = _object_tuples(self.objects, 4, rng)
        for a, b, c, d in triples:
            for f in self.hom(a, b):
                for g in self.hom(b, c):
                    gf = self.compose(g, f)
                    for h in self.hom(c, d):
                        checked += 1
                        if self.compose(h, gf) != self.compose(self.compose(h, g), f):
                            return CheckReport.failure(name, "composition is not associative", checked, f=f, g=g, h=h)
        return CheckReport(name=name, checked=checked, details={"sampled": sampled})

    def validate(self) -> "FinCat":
        report = self.check()
        if not report.passed:
            raise ValidationError(report.counterexample.message, report.counterexample.location)
        return self

    # Presets

    @classmethod
    def from_group(cls, group, name: Optional[str] = None) -> "FinCat":
        """BG: one object, arrows the group elements."""
        return cls(
            ["*"],
            lambda a, b: list(group.elements),
            lambda g, f: group.mul(g.data, f.data),
            lambda a: group.identity,
            name=name or f"B{group.name}",
        )

    @classmethod
    def indiscrete(cls, n: int, name: str = "I") -> "FinCat":
        """The groupoid with n objects and exactly one arrow between any two."""
        return cls(
            range(n),
            lambda a, b: [(a, b)],
            lambda g, f: (f.src, g.tgt),
            lambda a: (a, a),
            name=f"{name}{n}",
        )


class Functor:
    def __init__(
        self,
        source: FinCat,
        target: FinCat,
        on_objects: Callable[[Obj], Obj],
        on_arrows: Callable[[Arrow], Arrow],
        contravariant: bool = False,
        name: str = "F",
    ):
        self.source = source
        self.target = target
        self.on_objects = on_objects
        self.on_arrows = on_arrows
        self.contravariant = contravariant
        self.name = name

    def __call__(self, x):
        if isinstance(x, Arrow):
            return self.on_arrows(x)
        return self.on_objects(x)

    @classmethod
    def identity(cls, C: FinCat) -> "Functor":
        return cls(C, C, lambda c: c, lambda f: f, name=f"id_{C.name}")

    def check(self, rng: Optional[random.Random] = None) -> CheckReport:
        """Endpoints, identities and composites."""
        rng = rng or random.Random(settings.SEED)
        S, T = self.source, self.target
        name = f"functor_laws[{self.name}]"
        checked = 0
        for a in S.objects:
            checked += 1
            if self(S.identity(a)) != T.identity(self(a)):
                return CheckReport.failure(name, "identity is not preserved", checked, object=a)
        triples, sampled = _object_tuples(S.objects, 3, rng)
        for a, b, c in triples:
            for f in S.hom(a, b):
                Ff = self(f)
                ends = (self(b), self(a)) if self.contravariant else (self(a), self(b))
                if (Ff.src, Ff.tgt) != ends or not T.contains(Ff):
                    return CheckReport.failure(name, "image of an arrow is not an arrow between the images", checked, arrow=f)
                for g in S.hom(b, c):
                    checked += 1
                    left = self(S.compose(g, f))
                    right = T.compose(Ff, self(g)) if self.contravariant else T.compose(self(g), Ff)
                    if left != right:
                        return CheckReport.failure(name, "composition is not preserved", checked, f=f, g=g)
        return CheckReport(name=name, checked=checked, details={"sampled": sampled})


def check_equivalence(F: Functor) -> CheckReport:
    """Fully faithful on every hom-set and essentially surjective."""
    S, T = F.source, F.target
    name = f"equivalence[{F.name}]"
    checked = 0
    for a in S.objects:
        for b in S.objects:
            checked += 1
            images = [F(f) for f in S.hom(a, b)]
            if len(set(images)) != len(images):
                return CheckReport.failure(name, "functor is not faithful", checked, source=a, target=b)
            if set(images) != set(T.hom(F(a), F(b))):
                return CheckReport.failure(name, "functor is not full", checked, source=a, target=b)
    image = [F(a) for a in S.objects]
    for t in T.objects:
        checked += 1
        if not any(T.isomorphisms(x, t) for x in image):
            return CheckReport.failure(name, "functor is not essentially surjective", checked, object=t)
    return CheckReport(
        name=name,
        checked=checked,
        details={"fully_faithful": True, "essentially_surjective": True},
    )


class DualityData:
    """(D, eta) on a finite category; eta is None for a strict duality."""

    def __init__(self, D: Functor, eta: Optional[Callable[[Obj], Arrow]] = None):
        if not D.contravariant or D.source is not D.target:
            raise ValidationError("a duality is a contravariant endofunctor", {"functor": D.name})
        self.category = D.source
        self.D = D
        self._eta = eta

    @property
    def strict(self) -> bool:
        return self._eta is None

    def eta(self, c: Obj) -> Arrow:
        if self._eta is None:
            return self.category.identity(c)
        return self._eta(c)

    def __call__(self, x):
        return self.D(x)

    @classmethod
    def strict_from(cls, C: FinCat, on_objects, on_arrows, name: str = "D") -> "DualityData":
        return cls(Functor(C, C, on_objects, on_arrows, contravariant=True, name=name))

    def check(self) -> CheckReport:
        C, D = self.category, self.D
        name = f"duality[{C.name}]"
        report = D.check()
        if not report.passed:
            return report.model_copy(update={"name": name})
        checked = report.checked
        for c in C.objects:
            checked += 1
            if self.strict:
                if D(D(c)) != c:
                    return CheckReport.failure(name, "strict duality does not square to the identity", checked, object=c)
                continue
            eta_c = self.eta(c)
            if (eta_c.src, eta_c.tgt) != (c, D(D(c))) or C.inverse(eta_c) is None:
                return CheckReport.failure(name, "eta_c is not an isomorphism c -> DDc", checked, object=c)
            if C.compose(D(eta_c), self.eta(D(c))) != C.identity(D(c)):
                return CheckReport.failure(name, "D(eta_c) o eta_Dc is not the identity", checked, object=c)
        for f in C.arrows():
            checked += 1
            if self.strict:
                if D(D(f)) != f:
                    return CheckReport.failure(name, "strict duality does not square to the identity", checked, arrow=f)
            elif C.compose(self.eta(f.tgt), f) != C.compose(D(D(f)), self.eta(f.src)):
                return CheckReport.failure(name, "eta is not natural", checked, arrow=f)
        return CheckReport(name=name, checked=checked, details={"strict": self.strict})

    def validate(self) -> "DualityData":
        report = self.check()
        if not report.passed:
            raise ValidationError(report.counterexample.message, report.counterexample.location)
        return self


def trivial_duality(C: FinCat) -> DualityData:
    """D = id on a category whose composition is commutative (e.g. B of an abelian group)."""
    return DualityData.strict_from(C, lambda c: c, lambda f: Arrow(f.tgt, f.src, f.data), name="id")


def swap_duality(C: FinCat) -> DualityData:
    """On the indiscrete groupoid on two objects: D swaps them."""
    return DualityData.strict_from(
        C,
        lambda c: 1 - c,
        lambda f: Arrow(1 - f.tgt, 1 - f.src, (1 - f.tgt, 1 - f.src)),
        name="swap",
    )


# Strictification


def strictify(duality: DualityData) -> Tuple[FinCat, DualityData, Functor]:
    """
    DC: objects (c, d, phi: d -> Dc) with phi an isomorphism; arrows
    (c,d,phi) -> (c',d',phi') are pairs (a: c -> c', b: d' -> d) with
    phi o b = D(a) o phi'. The duality (c, d, phi) -> (d, c, D(phi) o eta_c),
    (a, b) -> (b, a) is strict. Returns DC, its duality and the projection.
    """
    C, D = duality.category, duality.D
    objects = [(c, d, phi.data) for c in C.objects for d in C.objects for phi in C.isomorphisms(d, D(c))]

    def phi_of(X) -> Arrow:
        return Arrow(X[1], D(X[0]), X[2])

    def hom(X, Y):
        out = []
        for a in C.hom(X[0], Y[0]):
            Da_phi = C.compose(D(a), phi_of(Y))
            for b in C.hom(Y[1], X[1]):
                if C.compose(phi_of(X), b) == Da_phi:
                    out.append((a.data, b.data))
        return out

    def compose(g: Arrow, f: Arrow):
        X, Y, Z = f.src, f.tgt, g.tgt
        a = C.compose(Arrow(Y[0], Z[0], g.data[0]), Arrow(X[0], Y[0], f.data[0]))
        b = C.compose(Arrow(Y[1], X[1], f.data[1]), Arrow(Z[1], Y[1], g.data[1]))
        return (a.data, b.data)

    DC = FinCat(
        objects,
        hom,
        compose,
        lambda X: (C.identity(X[0]).data, C.identity(X[1]).data),
        name=f"D{C.name}",
    )

    def dual_object(X):
        return (X[1], X[0], C.compose(D(phi_of(X)), duality.eta(X[0])).data)

    dual = DualityData.strict_from(
        DC,
        dual_object,
        lambda f: Arrow(dual_object(f.tgt), dual_object(f.src), (f.data[1], f.data[0])),
        name=f"D{D.name}",
    )
    projection = Functor(
        DC, C, lambda X: X[0], lambda f: Arrow(f.src[0], f.tgt[0], f.data[0]), name="proj"
    )
    logger.info("strictified", category=C.name, objects=len(objects))
    return DC, dual, projection


def canonical_inclusion(duality: DualityData, DC: FinCat) -> Functor:
    """For a strict duality: a -> (a, Da, id), f -> (f, Df)."""
    C, D = duality.category, duality.D
    return Functor(
        C,
        DC,
        lambda a: (a, D(a), C.identity(D(a)).data),
        lambda f: Arrow(
            (f.src, D(f.src), C.identity(D(f.src)).data),
            (f.tgt, D(f.tgt), C.identity(D(f.tgt)).data),
            (f.data, D(f).data),
        ),
        name="incl",
    )


# Bimodules


class Bimodule:
    """
    M(c, d) a finite abelian group for each pair of objects, covariant in d
    through push (f_* for f: d -> d') and contravariant in c through pull
    (g^* for g: c' -> c). J(c, d, m) lands in M(Dd, Dc).
    """

    def __init__(
        self,
        category: FinCat,
        elements: Callable[[Obj, Obj], List[Hashable]],
        add: Callable[[Hashable, Hashable], Hashable],
        zero: Callable[[Obj, Obj], Hashable],
        push: Callable[[Arrow, Hashable], Hashable],
        pull: Callable[[Arrow, Hashable], Hashable],
        J: Optional[Callable[[Obj, Obj, Hashable], Hashable]] = None,
        duality: Optional[DualityData] = None,
        name: str = "M",
    ):
        self.category = category
        self._elements = elements
        self.add = add
        self.zero = zero
        self.push = push
        self.pull = pull
        self._J = J
        self.duality = duality
        self.name = name
        self._cache: Dict[Tuple[Obj, Obj], List[Hashable]] = {}

    def elements(self, c: Obj, d: Obj) -> List[Hashable]:
        if (c, d) not in self._cache:
            self._cache[(c, d)] = list(self._elements(c, d))
        return self._cache[(c, d)]

    def J(self, c: Obj, d: Obj, m: Hashable) -> Hashable:
        if self._J is None:
            raise ValidationError(f"bimodule {self.name} carries no duality")
        return self._J(c, d, m)

    @classmethod
    def zero_module(cls, C: FinCat, duality: Optional[DualityData] = None) -> "Bimodule":
        return cls(
            C, lambda c, d: [0], lambda m, n: 0, lambda c, d: 0,
            lambda f, m: 0, lambda g, m: 0, lambda c, d, m: 0, duality, name="0",
        )

    @classmethod
    def character(
        cls,
        C: FinCat,
        n: int,
        chi: Callable[[Arrow], int] = lambda f: 1,
        sign: int = 1,
        duality: Optional[DualityData] = None,
    ) -> "Bimodule":
        """Z/n in every slot, arrows acting through the multiplicative character chi."""
        return cls(
            C,
            lambda c, d: list(range(n)),
            lambda m, k: (m + k) % n,
            lambda c, d: 0,
            lambda f, m: (chi(f) * m) % n,
            lambda g, m: (chi(g) * m) % n,
            lambda c, d, m: (sign * m) % n,
            duality,
            name=f"Z/{n}",
        )

    def check(self, rng: Optional[random.Random] = None) -> CheckReport:
        """Bifunctoriality, additivity, and naturality and involutivity of J."""
        rng = rng or random.Random(settings.SEED)
        C = self.category
        name = f"bimodule_laws[{self.name}]"
        checked = 0
        pairs, sampled = _object_tuples(C.objects, 2, rng)
        for c, d in pairs:
            elems = self.elements(c, d)
            for m in elems:
                checked += 1
                if self.push(C.identity(d), m) != m or self.pull(C.identity(c), m) != m:
                    return CheckReport.failure(name, "identities do not act trivially", checked, source=c, target=d, element=m)
            for m, n in itertools.product(elems, repeat=2):
                checked += 1
                if self.add(m, n) not in elems:
                    return CheckReport.failure(name, "sum leaves the group", checked, element=m, other=n)
        triples, tsampled = _object_tuples(C.objects, 3, rng)
        for c, d, e in triples:
            for m in self.elements(c, d):
                for f in C.hom(d, e):
                    fm = self.push(f, m)
                    checked += 1
                    if fm not in self.elements(c, e):
                        return CheckReport.failure(name, "push leaves the group", checked, arrow=f, element=m)
                    for f2 in C.hom(e, e):
                        if self.push(C.compose(f2, f), m) != self.push(f2, fm):
                            return CheckReport.failure(name, "push is not functorial", checked, f=f, g=f2, element=m)
                    for g in C.hom(c, c):
                        checked += 1
                        if self.push(f, self.pull(g, m)) != self.pull(g, fm):
                            return CheckReport.failure(name, "push and pull do not commute", checked, f=f, g=g, element=m)
                    for n in self.elements(c, d):
                        if self.push(f, self.add(m, n)) != self.add(fm, self.push(f, n)):
                            return CheckReport.failure(name, "push is not additive", checked, arrow=f, element=m)
                for g in C.hom(e, c):
                    checked += 1
                    gm = self.pull(g, m)
                    if gm not in self.elements(e, d):
                        return CheckReport.failure(name, "pull leaves the group", checked, arrow=g, element=m)
                    for g2 in C.hom(e, e):
                        if self.pull(C.compose(g, g2), m) != self.pull(g2, gm):
                            return CheckReport.failure(name, "pull is not functorial", checked, f=g, g=g2, element=m)
        if self._J is not None and self.duality is not None:
            failure = self._check_duality(pairs)
            if failure is not None:
                return failure
        return CheckReport(name=name, checked=checked, details={"sampled": sampled or tsampled})

    def _check_duality(self, pairs) -> Optional[CheckReport]:
        C, dual = self.category, self.duality
        D = dual.D
        name = f"bimodule_duality[{self.name}]"
        checked = 0
        for c, d in pairs:
            for m in self.elements(c, d):
                checked += 1
                jm = self.J(c, d, m)
                if jm not in self.elements(D(d), D(c)):
                    return CheckReport.failure(name, "J leaves M(Dd, Dc)", checked, element=m)
                twice = self.J(D(d), D(c), jm)
                expected = self.pull(C.invert(dual.eta(c)), self.push(dual.eta(d), m))
                if twice != expected:
                    return CheckReport.failure(name, "J o J differs from the eta-conjugate", checked, element=m, source=c, target=d)
                for e in C.objects:
                    for f in C.hom(d, e):
                        if self.J(c, e, self.push(f, m)) != self.pull(D(f), jm):
                            return CheckReport.failure(name, "J is not natural in the second slot", checked, arrow=f, element=m)
                    for g in C.hom(e, c):
                        if self.J(e, d, self.pull(g, m)) != self.push(D(g), jm):
                            return CheckReport.failure(name, "J is not natural in the first slot", checked, arrow=g, element=m)
        return None


def strictify_bimodule(M: Bimodule, duality: DualityData, DC: FinCat, Ddual: DualityData) -> Bimodule:
    """DM((c,d,phi), (c',d',phi')) = M(c, c'), with J transported along the phi's."""
    C, D = duality.category, duality.D

    def down(f: Arrow) -> Arrow:
        return Arrow(f.src[0], f.tgt[0], f.data[0])

    def J(X, Y, m):
        jm = M.J(X[0], Y[0], m)
        pulled = M.pull(Arrow(Y[1], D(Y[0]), Y[2]), jm)
        return M.push(C.invert(Arrow(X[1], D(X[0]), X[2])), pulled)

    return Bimodule(
        DC,
        lambda X, Y: M.elements(X[0], Y[0]),
        M.add,
        lambda X, Y: M.zero(X[0], Y[0]),
        lambda f, m: M.push(down(f), m),
        lambda g, m: M.pull(down(g), m),
        J,
        Ddual,
        name=f"D{M.name}",
    )


def kernel_bimodule(p: Functor, s: Functor, duality_b: Optional[DualityData] = None, duality_c: Optional[DualityData] = None) -> Bimodule:
    """ker p(c, d) = arrows s(c) -> s(d) of B that p sends to zero."""
    B, C = p.source, p.target

    def elements(c, d):
        return [f for f in B.hom(s(c), s(d)) if p(f) == C.zero(p(f.src), p(f.tgt))]

    J = None
    if duality_b is not None:
        J = lambda c, d, m: duality_b(m)  # noqa: E731
    return Bimodule(
        C,
        elements,
        B.add,
        lambda c, d: B.zero(s(c), s(d)),
        lambda f, m: B.compose(s(f), m),
        lambda g, m: B.compose(m, s(g)),
        J,
        duality_c,
        name=f"ker {p.name}",
    )


# Semidirect products


def semidirect_cat(C: FinCat, M: Bimodule, duality: Optional[DualityData] = None) -> Tuple[FinCat, Optional[DualityData]]:
    """C x| M: arrows (f, m) with (f, m) o (g, n) = (f o g, f_* n + g^* m)."""

    def down(f: Arrow) -> Arrow:
        return Arrow(f.src, f.tgt, f.data[0])

    def compose(second: Arrow, first: Arrow):
        f, g = down(second), down(first)
        m, n = second.data[1], first.data[1]
        return (C.compose(f, g).data, M.add(M.push(f, n), M.pull(g, m)))

    S = FinCat(
        C.objects,
        lambda c, d: [(f.data, m) for f in C.hom(c, d) for m in M.elements(c, d)],
        compose,
        lambda c: (C.identity(c).data, M.zero(c, c)),
        name=f"{C.name}x|{M.name}",
    )
    if duality is None:
        return S, None
    D = duality.D
    semi_dual = DualityData.strict_from(
        S,
        D.on_objects,
        lambda f: Arrow(D(f.tgt), D(f.src), (D(down(f)).data, M.J(f.src, f.tgt, f.data[1]))),
        name=f"{D.name}x|J",
    )
    return S, semi_dual


@dataclass
class CoprodEmbedding:
    """The groupoid of the M(c, c) under addition and e: m -> (id_c, m)."""

    coprod: FinCat
    coprod_duality: Optional[DualityData]
    semidirect: FinCat
    semidirect_duality: Optional[DualityData]
    e: Functor

    def check(self) -> CheckReport:
        name = "coprod_embedding"
        report = self.e.check()
        if not report.passed:
            return report.model_copy(update={"name": name})
        checked = report.checked
        G, S = self.coprod, self.semidirect
        for c in G.objects:
            for f in G.hom(c, c):
                checked += 1
                if S.inverse(self.e(f)) is None:
                    return CheckReport.failure(name, "e(m) is not invertible", checked, arrow=f)
                if self.coprod_duality is not None and self.e(self.coprod_duality(f)) != self.semidirect_duality(self.e(f)):
                    return CheckReport.failure(name, "e does not commute with the dualities", checked, arrow=f)
        return CheckReport(name=name, checked=checked)


def coprod_embed(C: FinCat, M: Bimodule, duality: Optional[DualityData] = None) -> CoprodEmbedding:
    G = FinCat(
        C.objects,
        lambda c, d: M.elements(c, c) if c == d else [],
        lambda g, f: M.add(g.data, f.data),
        lambda c: M.zero(c, c),
        name=f"coprod {M.name}",
    )
    S, semi_dual = semidirect_cat(C, M, duality)
    iS = S.core()
    coprod_dual = None
    if duality is not None:
        D = duality.D
        coprod_dual = DualityData.strict_from(
            G, D.on_objects, lambda f: Arrow(D(f.src), D(f.src), M.J(f.src, f.src, f.data)), name="J"
        )
    e = Functor(G, iS, lambda c: c, lambda f: Arrow(f.src, f.tgt, (C.identity(f.src).data, f.data)), name="e")
    return CoprodEmbedding(G, coprod_dual, iS, semi_dual, e)


def classify_split_extension(
    p: Functor,
    s: Functor,
    U: Callable[[Obj], Arrow],
    duality_b: Optional[DualityData] = None,
    duality_c: Optional[DualityData] = None,
) -> Tuple[Optional[Functor], CheckReport]:
    """
    F: C x| ker p -> B, (f, m) -> s(f) + m, for p: B -> C additive with a
    section s and U_c: p s c -> c. Equivalence is checked through the inverse
    g -> (f, g - s(f)) with f = U_d o p(g) o U_c^-1.
    """
    B, C = p.source, p.target
    name = "split_extension"
    if not B.additive:
        raise ValidationError("split extensions need an additive category", {"category": B.name})
    K = kernel_bimodule(p, s, duality_b, duality_c)
    checked = 0
    for c, d, e in itertools.product(C.objects, repeat=3):
        for f in K.elements(c, d):
            for g in K.elements(d, e):
                checked += 1
                if B.compose(g, f) != B.zero(s(c), s(e)):
                    return None, CheckReport.failure(name, "composite of kernel arrows is nonzero", checked, f=f, g=g)
    for b in B.objects:
        checked += 1
        if not any(B.isomorphisms(s(c), b) for c in C.objects):
            return None, CheckReport.failure(name, "s is not essentially surjective", checked, object=b)

    S, semi_dual = semidirect_cat(C, K, duality_c if duality_b is not None else None)

    def F_arrow(x: Arrow) -> Arrow:
        f = Arrow(x.src, x.tgt, x.data[0])
        return B.add(s(f), x.data[1])

    F = Functor(S, B, s.on_objects, F_arrow, name="F")

    def inverse(g: Arrow, c, d) -> Arrow:
        f = C.chain(C.invert(U(c)), p(g), U(d))
        return Arrow(c, d, (f.data, B.add(g, B.neg(s(f)))))

    functor_report = F.check()
    if not functor_report.passed:
        return None, functor_report.model_copy(update={"name": name})
    checked += functor_report.checked
    for c in C.objects:
        for d in C.objects:
            for g in B.hom(s(c), s(d)):
                checked += 1
                x = inverse(g, c, d)
                if not S.contains(x) or F(x) != g:
                    return None, CheckReport.failure(name, "F(F^-1(g)) differs from g", checked, arrow=g)
            for x in S.hom(c, d):
                checked += 1
                if inverse(F(x), c, d) != x:
                    return None, CheckReport.failure(name, "F^-1(F(x)) differs from x", checked, arrow=x)
                if semi_dual is not None and F(semi_dual(x)) != duality_b(F(x)):
                    return None, CheckReport.failure(name, "F does not commute with the dualities", checked, arrow=x)
    logger.info("split_extension_classified", source=S.name, target=B.name, checked=checked)
    return F, CheckReport(name=name, checked=checked, details={"kernel": K.name})


# Symmetric forms


def sym(duality: DualityData) -> FinCat:
    """Objects (a, k: a -> Da) with k an isomorphism and D(k) = k; arrows f with k = D(f) k' f."""
    if not duality.strict:
        raise ValidationError("sym needs a strict duality")
    A, D = duality.category, duality.D
    objects = [(a, k.data) for a in A.objects for k in A.isomorphisms(a, D(a)) if D(k) == k]

    def hom(x, y):
        k = Arrow(x[0], D(x[0]), x[1])
        k2 = Arrow(y[0], D(y[0]), y[1])
        return [f.data for f in A.hom(x[0], y[0]) if A.compose(D(f), A.compose(k2, f)) == k]

    return FinCat(
        objects,
        hom,
        lambda g, f: A.compose(Arrow(f.tgt[0], g.tgt[0], g.data), Arrow(f.src[0], f.tgt[0], f.data)).data,
        lambda x: A.identity(x[0]).data,
        name=f"sym {A.name}",
    )


@dataclass
class SymEquivalences:
    """sym A and sym DA with p: sym DA -> sym A, s the other way and u: id => s p."""

    sym_a: FinCat
    sym_da: FinCat
    p: Functor
    s: Functor
    u: Callable[[Obj], Arrow]

    def check(self) -> CheckReport:
        name = "sym_equivalences"
        checked = 0
        for F in (self.p, self.s):
            report = F.check()
            if not report.passed:
                return report.model_copy(update={"name": name})
            checked += report.checked
        for x in self.sym_a.objects:
            checked += 1
            if self.p(self.s(x)) != x:
                return CheckReport.failure(name, "p(s(x)) differs from x", checked, object=x)
            for y in self.sym_a.objects:
                for f in self.sym_a.hom(x, y):
                    if self.p(self.s(f)) != f:
                        return CheckReport.failure(name, "p(s(f)) differs from f", checked, arrow=f)
        S = self.sym_da
        for X in S.objects:
            ux = self.u(X)
            checked += 1
            if not S.contains(ux) or S.inverse(ux) is None:
                return CheckReport.failure(name, "u_X is not an isomorphism X -> s p X", checked, object=X)
            for Y in S.objects:
                for f in S.hom(X, Y):
                    if S.compose(self.u(Y), f) != S.compose(self.s(self.p(f)), ux):
                        return CheckReport.failure(name, "u is not natural", checked, arrow=f)
        return CheckReport(name=name, checked=checked, details={"objects": len(self.sym_a.objects)})


def sym_equivalences(duality: DualityData) -> SymEquivalences:
    A, D = duality.category, duality.D
    DA, Ddual, _ = strictify(duality)
    sym_a, sym_da = sym(duality), sym(Ddual)

    def phi_of(X) -> Arrow:
        return Arrow(X[1], D(X[0]), X[2])

    def p_obj(x):
        X, k = x
        k1 = Arrow(X[0], X[1], k[0])
        return (X[0], A.compose(phi_of(X), k1).data)

    def s_obj(y):
        a, k = y
        return ((a, D(a), A.identity(D(a)).data), (k, k))

    p = Functor(sym_da, sym_a, p_obj, lambda f: Arrow(p_obj(f.src), p_obj(f.tgt), f.data[0]), name="p")
    s = Functor(
        sym_a,
        sym_da,
        s_obj,
        lambda f: Arrow(s_obj(f.src), s_obj(f.tgt), (f.data, D(Arrow(f.src[0], f.tgt[0], f.data)).data)),
        name="s",
    )

    def u(x):
        X = x[0]
        return Arrow(x, s(p(x)), (A.identity(X[0]).data, A.invert(phi_of(X)).data))

    return SymEquivalences(sym_a, sym_da, p, s, u)


@dataclass
class StrictReplacement:
    """D(F', xi): DB -> DA built from an equivalence F: A -> B commuting with D."""

    F: Functor
    quasi_inverse: Functor
    xi: Callable[[Obj], Arrow]
    strict_functor: Functor
    dual_a: DualityData
    dual_b: DualityData
    ddual_a: DualityData
    ddual_b: DualityData

    def check(self) -> CheckReport:
        name = "strict_replacement"
        checked = 0
        Fp, A = self.quasi_inverse, self.F.source
        B = self.F.target
        for G in (Fp, self.strict_functor):
            report = G.check()
            if not report.passed:
                return report.model_copy(update={"name": name})
            checked += report.checked
        Da, Db = self.dual_a.D, self.dual_b.D
        for b in B.objects:
            for b2 in B.objects:
                for f in B.hom(b, b2):
                    checked += 1
                    left = A.compose(self.xi(b), Fp(Db(f)))
                    right = A.compose(Da(Fp(f)), self.xi(b2))
                    if left != right:
                        return CheckReport.failure(name, "xi is not natural", checked, arrow=f)
        G = self.strict_functor
        DB = G.source
        rng = random.Random(settings.SEED)
        for X in DB.objects:
            checked += 1
            if G(self.ddual_b(X)) != self.ddual_a(G(X)):
                return CheckReport.failure(name, "D(F', xi) does not commute with the dualities on objects", checked, object=X)
        pairs, sampled = _object_tuples(DB.objects, 2, rng)
        for X, Y in pairs:
            for f in DB.hom(X, Y):
                checked += 1
                if G(self.ddual_b(f)) != self.ddual_a(G(f)):
                    return CheckReport.failure(name, "D(F', xi) does not commute with the dualities", checked, arrow=f)
        return CheckReport(name=name, checked=checked, details={"sampled": sampled})


def lemma_equivalence(F: Functor, dual_a: DualityData, dual_b: DualityData) -> StrictReplacement:
    """
    For each b pick the first a_b with an isomorphism eps_b: F(a_b) -> b;
    F'(f) = F^-1(eps_b'^-1 f eps_b), xi_b = F^-1(D(eps_b) eps_Db) and
    D(F', xi)(b, d, phi) = (F'b, F'd, xi_b F'(phi)).
    """
    A, B = F.source, F.target
    Da, Db = dual_a.D, dual_b.D
    choice: Dict[Obj, Tuple[Obj, Arrow]] = {}
    for b in B.objects:
        for a in A.objects:
            isos = B.isomorphisms(F(a), b)
            if isos:
                choice[b] = (a, isos[0])
                break
        else:
            raise ValidationError("F is not essentially surjective", {"object": repr(b)})

    def preimage(a, a2, g: Arrow) -> Arrow:
        for f in A.hom(a, a2):
            if F(f) == g:
                return f
        raise ValidationError("F is not full", {"arrow": repr(g)})

    def fp_obj(b):
        return choice[b][0]

    def fp_arrow(f: Arrow) -> Arrow:
        (a, eps), (a2, eps2) = choice[f.src], choice[f.tgt]
        return preimage(a, a2, B.chain(eps, f, B.invert(eps2)))

    Fp = Functor(B, A, fp_obj, fp_arrow, name="F'")

    def xi(b) -> Arrow:
        a, eps = choice[b]
        a_d, eps_d = choice[Db(b)]
        return preimage(a_d, Da(a), B.compose(Db(eps), eps_d))

    DA, ddual_a, _ = strictify(dual_a)
    DB, ddual_b, _ = strictify(dual_b)

    def g_obj(X):
        b, d, phi = X
        return (fp_obj(b), fp_obj(d), A.compose(xi(b), fp_arrow(Arrow(d, Db(b), phi))).data)

    def g_arrow(f: Arrow) -> Arrow:
        a = fp_arrow(Arrow(f.src[0], f.tgt[0], f.data[0]))
        b = fp_arrow(Arrow(f.tgt[1], f.src[1], f.data[1]))
        return Arrow(g_obj(f.src), g_obj(f.tgt), (a.data, b.data))

    G = Functor(DB, DA, g_obj, g_arrow, name="D(F',xi)")
    logger.info("strict_replacement_built", source=B.name, target=A.name)
    return StrictReplacement(F, Fp, xi, G, dual_a, dual_b, ddual_a, ddual_b)


# Nerves


def nerve(C: FinCat, dim: int, duality: Optional[DualityData] = None) -> SimplicialSet:
    """
    N C truncated at dim, with a disjoint basepoint. A p-simplex is a pair
    (objects c_0..c_p, arrow data f_1..f_p). With a strict duality the
    involution reverses the string and applies D.
    """
    levels: List[List[Any]] = [[BASE] + [((c,), ()) for c in C.objects]]
    for p in range(1, dim + 1):
        level = [BASE]
        for objs, fs in levels[-1][1:]:
            for c in C.objects:
                for f in C.hom(objs[-1], c):
                    level.append((objs + (c,), fs + (f.data,)))
        check_bound("ENUMERATION_LIMIT", settings.ENUMERATION_LIMIT, len(level))
        levels.append(level)

    def arrow(objs, fs, i) -> Arrow:
        return Arrow(objs[i - 1], objs[i], fs[i - 1])

    def face(p, i, x):
        if x == BASE:
            return BASE
        objs, fs = x
        if i == 0:
            return (objs[1:], fs[1:])
        if i == p:
            return (objs[:-1], fs[:-1])
        g = C.compose(arrow(objs, fs, i + 1), arrow(objs, fs, i))
        return (objs[:i] + objs[i + 1 :], fs[: i - 1] + (g.data,) + fs[i + 1 :])

    def degen(p, i, x):
        if x == BASE:
            return BASE
        objs, fs = x
        return (objs[: i + 1] + objs[i:], fs[:i] + (C.identity(objs[i]).data,) + fs[i:])

    involution = None
    if duality is not None:
        if not duality.strict:
            raise ValidationError("the Real nerve needs a strict duality")
        D = duality.D

        def involution(p, x):
            if x == BASE:
                return BASE
            objs, fs = x
            dual_fs = tuple(D(arrow(objs, fs, i)).data for i in range(p, 0, -1))
            return (tuple(D(c) for c in reversed(objs)), dual_fs)

    return SimplicialSet.from_functions(
        levels, face, degen, base=BASE, involution=involution, name=f"N{C.name}"
    )


def real_nerve(duality: DualityData, dim: int) -> SimplicialSet:
    return nerve(duality.category, dim, duality)


def check_nerve_fixed_points(duality: DualityData, degrees: int = 3) -> CheckReport:
    """(sd_e N C)^{Z/2} and N sym C have the same homology."""
    name = "nerve_fixed_points"
    Z = real_nerve(duality, 2 * degrees + 1)
    fixed = fixed_points(edgewise_subdivide(Z), [0, 1])
    left = homology(reduced_chains(fixed))
    right = homology(reduced_chains(nerve(sym(duality), degrees)))
    details = {"fixed": left.summary(), "sym": right.summary()}
    if left.summary() != right.summary():
        report = CheckReport.failure(name, "homology of the fixed points differs from that of N sym", 1)
        return report.model_copy(update={"details": details})
    return CheckReport(name=name, checked=degrees, details=details)


# Swallowing


class DiagramShape:
    """
    A finite poset shape given by generating edges, with a position in [top]
    for each vertex (monotone along edges) and an order-reversing involution
    whose positions satisfy pos(dual v) = top - pos(v).
    """

    def __init__(self, vertices: Sequence[Hashable], edges: Sequence[Tuple[Hashable, Hashable]], position: Dict[Hashable, int], top: int, dual: Dict[Hashable, Hashable], name: str = "shape"):
        self.vertices = list(vertices)
        self.edges = list(edges)
        self.position = position
        self.top = top
        self.dual = dual
        self.name = name
        self.vindex = {v: i for i, v in enumerate(self.vertices)}
        self.eindex = {e: i for i, e in enumerate(self.edges)}
        for v, w in self.edges:
            if position[v] > position[w]:
                raise ValidationError("positions must increase along edges", {"edge": (v, w)})
            if (dual[w], dual[v]) not in self.eindex:
                raise ValidationError("the involution does not preserve edges", {"edge": (v, w)})

    @classmethod
    def chain(cls, q: int) -> "DiagramShape":
        return cls(
            range(q + 1),
            [(j, j + 1) for j in range(q)],
            {j: j for j in range(q + 1)},
            q,
            {j: q - j for j in range(q + 1)},
            name=f"[{q}]",
        )

    @property
    def is_chain(self) -> bool:
        return self.vertices == list(range(self.top + 1)) and self.edges == [(j, j + 1) for j in range(self.top)]


# A diagram is (objects per vertex, arrows per edge); a string of length
# 2k+1 is (diagrams ob_0..ob_{2k+1}, natural isomorphisms g_1..g_{2k+1},
# bimodule families m_1..m_{2k+1}), each family indexed by vertex.
Diagram = Tuple[Tuple[Obj, ...], Tuple[Arrow, ...]]
SwallowString = Tuple[Tuple[Diagram, ...], Tuple[Tuple[Arrow, ...], ...], Tuple[Tuple[Hashable, ...], ...]]
Collapsed = Tuple[Diagram, Tuple[Tuple[Hashable, ...], ...]]


class Swallowing:
    """
    The retraction r: N_{2k+1}(i(Diagrams DC) x| DM) -> coprod DM^{2k+1}
    contracting every string onto the middle square, and the homotopy
    H(x, sigma) that contracts the vertices v with sigma(pos v) = 1.
    """

    def __init__(self, duality: DualityData, M: Bimodule, k: int, shape: DiagramShape):
        if not duality.strict:
            raise ValidationError("swallowing needs a strict duality on C")
        self.C = duality.category
        self.D = duality.D
        self.k = k
        self.shape = shape
        self.DC, self.Ddual, _ = strictify(duality)
        self.DM = strictify_bimodule(M, duality, self.DC, self.Ddual)
        self._out: Dict[Tuple[str, Diagram], List[Tuple[Diagram, Tuple[Arrow, ...], Tuple[Hashable, ...]]]] = {}

    @property
    def length(self) -> int:
        return 2 * self.k + 1

    # Pointwise contraction

    def _units(self, obs: Sequence[Obj], arrows: Sequence[Arrow]) -> Tuple[Obj, List[Arrow]]:
        """The middle object and u_i: ob_i -> mid at one vertex."""
        C, k = self.C, self.k
        X = [o[0] for o in obs]
        Y = [o[1] for o in obs]
        a = [None] + [Arrow(X[i - 1], X[i], g.data[0]) for i, g in enumerate(arrows, 1)]
        b = [None] + [Arrow(Y[i], Y[i - 1], g.data[1]) for i, g in enumerate(arrows, 1)]
        phi_k = Arrow(Y[k], self.D(X[k]), obs[k][2])
        mid = (X[k], Y[k + 1], C.compose(phi_k, b[k + 1]).data)
        units = []
        for i in range(len(obs)):
            if i <= k:
                x = C.identity(X[i])
                for t in range(i + 1, k + 1):
                    x = C.compose(a[t], x)
                y = C.identity(Y[k + 1])
                for t in range(k + 1, i, -1):
                    y = C.compose(b[t], y)
            else:
                xa = C.identity(X[k])
                for t in range(k + 1, i + 1):
                    xa = C.compose(a[t], xa)
                yb = C.identity(Y[i])
                for t in range(i, k + 1, -1):
                    yb = C.compose(b[t], yb)
                x, y = C.invert(xa), C.invert(yb)
            units.append(Arrow(obs[i], mid, (x.data, y.data)))
        return mid, units

    def contraction(self, x: SwallowString, shape: Optional[DiagramShape] = None) -> Tuple[Diagram, List[List[Arrow]]]:
        """The middle diagram of x and U_x as units[v][i] = u_i at vertex v."""
        shape = shape or self.shape
        obs, isos, _ = x
        mids, units = [], []
        for v in range(len(shape.vertices)):
            mid, us = self._units([ob[0][v] for ob in obs], [g[v] for g in isos])
            mids.append(mid)
            units.append(us)
        k = self.k
        maps = []
        for e, (v, w) in enumerate(shape.edges):
            fa, fb = obs[k][1][e], obs[k + 1][1][e]
            maps.append(Arrow(mids[shape.vindex[v]], mids[shape.vindex[w]], (fa.data[0], fb.data[1])))
        return (tuple(mids), tuple(maps)), units

    def r(self, x: SwallowString, shape: Optional[DiagramShape] = None, contraction=None) -> Collapsed:
        shape = shape or self.shape
        DC, DM = self.DC, self.DM
        mid, units = contraction or self.contraction(x, shape)
        ms = x[2]
        out = []
        for i in range(1, self.length + 1):
            out.append(
                tuple(
                    DM.push(units[v][i], DM.pull(DC.invert(units[v][i - 1]), ms[i - 1][v]))
                    for v in range(len(shape.vertices))
                )
            )
        return (mid, tuple(out))

    def embed(self, c: Collapsed) -> SwallowString:
        """N_{2k+1} e: the constant string on the middle diagram."""
        mid, rs = c
        ident = tuple(self.DC.identity(z) for z in mid[0])
        return ((mid,) * (self.length + 1), (ident,) * self.length, rs)

    def H(self, x: SwallowString, sigma: Sequence[int], shape: Optional[DiagramShape] = None, contraction=None) -> SwallowString:
        shape = shape or self.shape
        DC, DM = self.DC, self.DM
        obs, isos, ms = x
        (mids, mid_maps), units = contraction or self.contraction(x, shape)
        contracted = [sigma[shape.position[v]] == 1 for v in shape.vertices]
        nv = len(shape.vertices)
        new_obs = []
        for i, ob in enumerate(obs):
            objs = tuple(mids[v] if contracted[v] else ob[0][v] for v in range(nv))
            maps = []
            for e, (v, w) in enumerate(shape.edges):
                vi, wi = shape.vindex[v], shape.vindex[w]
                if contracted[vi] and contracted[wi]:
                    maps.append(mid_maps[e])
                elif not contracted[vi] and not contracted[wi]:
                    maps.append(ob[1][e])
                elif contracted[wi]:
                    maps.append(DC.compose(units[wi][i], ob[1][e]))
                else:
                    raise ValidationError("sigma is not monotone along the shape", {"edge": (v, w)})
            new_obs.append((objs, tuple(maps)))

        def f_inv(i, v) -> Arrow:
            return units[v][i] if contracted[v] else DC.identity(obs[i][0][v])

        def f(i, v) -> Arrow:
            return DC.invert(units[v][i]) if contracted[v] else DC.identity(obs[i][0][v])

        new_isos, new_ms = [], []
        for i in range(1, self.length + 1):
            new_isos.append(tuple(DC.chain(f(i - 1, v), isos[i - 1][v], f_inv(i, v)) for v in range(nv)))
            new_ms.append(tuple(DM.pull(f(i - 1, v), DM.push(f_inv(i, v), ms[i - 1][v])) for v in range(nv)))
        return (tuple(new_obs), tuple(new_isos), tuple(new_ms))

    # Dualities

    def dual_diagram(self, X: Diagram, shape: Optional[DiagramShape] = None) -> Diagram:
        shape = shape or self.shape
        DD = self.Ddual
        objs = tuple(DD(X[0][shape.vindex[shape.dual[v]]]) for v in shape.vertices)
        maps = tuple(DD(X[1][shape.eindex[(shape.dual[w], shape.dual[v])]]) for v, w in shape.edges)
        return (objs, maps)

    def _dual_family(self, src: Diagram, tgt: Diagram, m: Sequence[Hashable], shape: DiagramShape) -> Tuple[Hashable, ...]:
        out = []
        for v in shape.vertices:
            u = shape.vindex[shape.dual[v]]
            out.append(self.DM.J(src[0][u], tgt[0][u], m[u]))
        return tuple(out)

    def dual_string(self, x: SwallowString, shape: Optional[DiagramShape] = None) -> SwallowString:
        shape = shape or self.shape
        obs, isos, ms = x
        n = self.length
        new_obs = tuple(self.dual_diagram(obs[n - i], shape) for i in range(n + 1))
        new_isos = tuple(
            tuple(self.Ddual(isos[n - i - 1][shape.vindex[shape.dual[v]]]) for v in shape.vertices)
            for i in range(n)
        )
        new_ms = tuple(self._dual_family(obs[n - i - 1], obs[n - i], ms[n - i - 1], shape) for i in range(n))
        return (new_obs, new_isos, new_ms)

    def dual_collapsed(self, c: Collapsed, shape: Optional[DiagramShape] = None) -> Collapsed:
        shape = shape or self.shape
        mid, rs = c
        return (self.dual_diagram(mid, shape), tuple(self._dual_family(mid, mid, m, shape) for m in reversed(rs)))

    # Simplicial structure of chain shapes

    def diagram_face(self, X: Diagram, j: int) -> Diagram:
        objs, maps = X
        q = len(objs) - 1
        if j == 0:
            return (objs[1:], maps[1:])
        if j == q:
            return (objs[:-1], maps[:-1])
        return (objs[:j] + objs[j + 1 :], maps[: j - 1] + (self.DC.compose(maps[j], maps[j - 1]),) + maps[j + 1 :])

    def diagram_degeneracy(self, X: Diagram, j: int) -> Diagram:
        objs, maps = X
        return (objs[: j + 1] + objs[j:], maps[:j] + (self.DC.identity(objs[j]),) + maps[j:])

    def face(self, x: SwallowString, j: int) -> SwallowString:
        obs, isos, ms = x
        drop = lambda t: t[:j] + t[j + 1 :]  # noqa: E731
        return (tuple(self.diagram_face(X, j) for X in obs), tuple(drop(g) for g in isos), tuple(drop(m) for m in ms))

    def degeneracy(self, x: SwallowString, j: int) -> SwallowString:
        obs, isos, ms = x
        repeat = lambda t: t[: j + 1] + t[j:]  # noqa: E731
        return (
            tuple(self.diagram_degeneracy(X, j) for X in obs),
            tuple(repeat(g) for g in isos),
            tuple(repeat(m) for m in ms),
        )

    # Enumeration

    def diagrams(self, q: int) -> List[Diagram]:
        """All diagrams over the chain [q] in DC."""
        DC = self.DC
        partial: List[Diagram] = [((X,), ()) for X in DC.objects]
        for _ in range(q):
            partial = [
                (objs + (Y,), maps + (f,))
                for objs, maps in partial
                for Y in DC.objects
                for f in DC.hom(objs[-1], Y)
            ]
            check_bound("ENUMERATION_LIMIT", settings.ENUMERATION_LIMIT, len(partial))
        return partial

    def _arrows_out(self, X: Diagram, shape: DiagramShape, objects: Sequence[Diagram]):
        key = (shape.name, X)
        if key in self._out:
            return self._out[key]
        DC, DM = self.DC, self.DM
        out = []
        for Y in objects:
            comps = [DC.isomorphisms(X[0][v], Y[0][v]) for v in range(len(shape.vertices))]
            for g in itertools.product(*comps):
                natural = all(
                    DC.compose(Y[1][e], g[shape.vindex[v]]) == DC.compose(g[shape.vindex[w]], X[1][e])
                    for e, (v, w) in enumerate(shape.edges)
                )
                if not natural:
                    continue
                families = itertools.product(*[DM.elements(X[0][v], Y[0][v]) for v in range(len(shape.vertices))])
                for m in families:
                    if self._compatible(X, Y, m, shape):
                        out.append((Y, g, m))
        self._out[key] = out
        return out

    def _compatible(self, X: Diagram, Y: Diagram, m: Sequence[Hashable], shape: DiagramShape) -> bool:
        DM = self.DM
        for e, (v, w) in enumerate(shape.edges):
            vi, wi = shape.vindex[v], shape.vindex[w]
            if DM.push(Y[1][e], m[vi]) != DM.pull(X[1][e], m[wi]):
                return False
        return True

    def strings(
        self,
        shape: Optional[DiagramShape] = None,
        objects: Optional[Sequence[Diagram]] = None,
        sample: Optional[int] = None,
        rng: Optional[random.Random] = None,
    ) -> Tuple[List[SwallowString], bool]:
        """Every string of the nerve level, or a random sample when there are too many."""
        shape = shape or self.shape
        if objects is None:
            if not shape.is_chain:
                raise ValidationError("diagram objects must be supplied for non-chain shapes")
            objects = self.diagrams(shape.top)
        n = self.length
        counts = {X: 1 for X in objects}
        for _ in range(n):
            counts = {X: sum(counts[Y] for Y, _, _ in self._arrows_out(X, shape, objects)) for X in objects}
        total = sum(counts.values())
        if total <= settings.ENUMERATION_LIMIT:
            out: List[SwallowString] = []

            def extend(obs, isos, ms):
                if len(isos) == n:
                    out.append((obs, isos, ms))
                    return
                for Y, g, m in self._arrows_out(obs[-1], shape, objects):
                    extend(obs + (Y,), isos + (g,), ms + (m,))

            for X in objects:
                extend((X,), (), ())
            return out, False
        if sample is None:
            raise BoundError("ENUMERATION_LIMIT", settings.ENUMERATION_LIMIT, total)
        rng = rng or random.Random(settings.SEED)
        out = []
        attempts = 0
        while len(out) < sample and attempts < 100 * sample:
            attempts += 1
            obs, isos, ms = (rng.choice(list(objects)),), (), ()
            while len(isos) < n:
                options = self._arrows_out(obs[-1], shape, objects)
                if not options:
                    break
                Y, g, m = rng.choice(options)
                obs, isos, ms = obs + (Y,), isos + (g,), ms + (m,)
            if len(isos) == n:
                out.append((obs, isos, ms))
        return out, True

    def is_string(self, x: SwallowString, shape: DiagramShape) -> bool:
        DC = self.DC
        obs, isos, ms = x
        for X in obs:
            for e, (v, w) in enumerate(shape.edges):
                f = X[1][e]
                if (f.src, f.tgt) != (X[0][shape.vindex[v]], X[0][shape.vindex[w]]) or not DC.contains(f):
                    return False
        for i in range(self.length):
            X, Y = obs[i], obs[i + 1]
            for v in range(len(shape.vertices)):
                g = isos[i][v]
                if (g.src, g.tgt) != (X[0][v], Y[0][v]) or not DC.contains(g):
                    return False
                if ms[i][v] not in self.DM.elements(X[0][v], Y[0][v]):
                    return False
            for e, (v, w) in enumerate(shape.edges):
                vi, wi = shape.vindex[v], shape.vindex[w]
                if DC.compose(Y[1][e], isos[i][vi]) != DC.compose(isos[i][wi], X[1][e]):
                    return False
            if not self._compatible(X, Y, ms[i], shape):
                return False
        return True

    # Verification

    def verify(
        self,
        shape: Optional[DiagramShape] = None,
        objects: Optional[Sequence[Diagram]] = None,
        sample: Optional[int] = None,
    ) -> CheckReport:
        shape = shape or self.shape
        name = f"swallow[k={self.k},{shape.name}]"
        strings, sampled = self.strings(shape, objects, sample)
        sigmas = [tuple([0] * (shape.top + 1 - t) + [1] * t) for t in range(shape.top + 2)]
        zero, one = sigmas[0], sigmas[-1]
        checked = 0
        for x in strings:
            checked += 1
            cx = self.contraction(x, shape)
            c = self.r(x, shape, cx)
            homotopy = {sigma: self.H(x, sigma, shape, cx) for sigma in sigmas}
            if self.r(self.embed(c), shape) != c:
                return CheckReport.failure(name, "r o N e is not the identity", checked, string=x)
            if homotopy[zero] != x:
                return CheckReport.failure(name, "H at sigma = 0 is not the identity", checked, string=x)
            if homotopy[one] != self.embed(c):
                return CheckReport.failure(name, "H at sigma = 1 is not N e o r", checked, string=x)
            for sigma, hx in homotopy.items():
                if not self.is_string(hx, shape):
                    return CheckReport.failure(name, "H(x, sigma) is not a string", checked, string=x, sigma=sigma)
            failure = self._check_duality(x, c, cx, homotopy, shape, (zero, one))
            if failure is not None:
                return CheckReport.failure(name, failure, checked, string=x)
            if shape.is_chain:
                failure = self._check_simplicial(x, c, homotopy, shape)
                if failure is not None:
                    return CheckReport.failure(name, failure[0], checked, string=x, index=failure[1])
        logger.info("swallow_verified", k=self.k, shape=shape.name, strings=checked, sampled=sampled)
        return CheckReport(name=name, checked=checked, details={"sampled": sampled, "k": self.k, "q": shape.top})

    def _check_duality(self, x, c, cx, homotopy, shape, constants) -> Optional[str]:
        dx = self.dual_string(x, shape)
        cdx = self.contraction(dx, shape)
        if self.r(dx, shape, cdx) != self.dual_collapsed(c, shape):
            return "r does not commute with the dualities"
        ux, udx = cx[1], cdx[1]
        n = self.length
        for v in shape.vertices:
            vi = shape.vindex[v]
            ui = shape.vindex[shape.dual[v]]
            for i in range(n + 1):
                comp = self.DC.compose(self.Ddual(ux[ui][n - i]), udx[vi][i])
                if comp != self.DC.identity(dx[0][i][0][vi]):
                    return "D(U_x) o U_Dx is not the identity"
        for sigma in constants:
            if self.H(dx, sigma, shape, cdx) != self.dual_string(homotopy[sigma], shape):
                return "H does not commute with the dualities"
        return None

    def _check_simplicial(self, x, c, homotopy, shape) -> Optional[Tuple[str, int]]:
        q = shape.top
        mid, rs = c
        up = DiagramShape.chain(q + 1)
        for j in range(q + 1):
            sx = self.degeneracy(x, j)
            csx = self.contraction(sx, up)
            expected = (self.diagram_degeneracy(mid, j), tuple(m[: j + 1] + m[j:] for m in rs))
            if self.r(sx, up, csx) != expected:
                return "r does not commute with degeneracies", j
            for sigma, hx in homotopy.items():
                s_sigma = tuple(sigma[: j + 1]) + tuple(sigma[j:])
                if self.H(sx, s_sigma, up, csx) != self.degeneracy(hx, j):
                    return "H does not commute with degeneracies", j
        if q == 0:
            return None
        down = DiagramShape.chain(q - 1)
        for j in range(q + 1):
            dx = self.face(x, j)
            cdx = self.contraction(dx, down)
            expected = (self.diagram_face(mid, j), tuple(m[:j] + m[j + 1 :] for m in rs))
            if self.r(dx, down, cdx) != expected:
                return "r does not commute with faces", j
            for sigma, hx in homotopy.items():
                d_sigma = tuple(sigma[:j]) + tuple(sigma[j + 1 :])
                if self.H(dx, d_sigma, down, cdx) != self.face(hx, j):
                    return "H does not commute with faces", j
        return None

    def coprod_elements(self, shape: Optional[DiagramShape] = None, objects: Optional[Sequence[Diagram]] = None) -> Iterable[Collapsed]:
        """Every (Z, r_1..r_{2k+1}) with r_i an endomorphism family of Z."""
        shape = shape or self.shape
        objects = objects if objects is not None else self.diagrams(shape.top)
        for Z in objects:
            families = itertools.product(*[self.DM.elements(z, z) for z in Z[0]])
            ends = [m for m in families if self._compatible(Z, Z, m, shape)]
            for rs in itertools.product(ends, repeat=self.length):
                yield (Z, rs)


def swallow(
    duality: DualityData,
    M: Bimodule,
    k: int,
    q: int = 0,
    shape: Optional[DiagramShape] = None,
    objects: Optional[Sequence[Diagram]] = None,
    sample: Optional[int] = None,
) -> Tuple[Swallowing, CheckReport]:
    """Build r and H at level 2k+1 and verify every identity on the enumerated strings."""
    shape = shape or DiagramShape.chain(q)
    sw = Swallowing(duality, M, k, shape)
    report = sw.verify(shape, objects, sample)
    if report.passed:
        checked = report.checked
        for c in sw.coprod_elements(shape, objects):
            checked += 1
            if sw.r(sw.embed(c), shape) != c:
                report = CheckReport.failure(report.name, "r o N e is not the identity", checked, element=c)
                break
        else:
            report = report.model_copy(update={"checked": checked})
    return sw, report
