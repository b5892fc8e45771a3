"""
The S^{2,1}-construction at small simplicial degree.

An object of S^{2,1}_p C is a functor X on the poset Cat([2],[p]) of
monotone triples theta = (t0 <= t1 <= t2) that vanishes off the injective
triples and turns every psi: [3] -> [p] into a 4-term exact sequence. Objects
are stored by their values on all triples and their arrows on the covering
relations of the poset; longer arrows are composites along a fixed path.

The duality conjugates by the order reversal of [p], so
(DX)_theta = D(X_{D theta}) with D(t0, t1, t2) = (p - t2, p - t1, p - t0).
"""

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import structlog

from .core.config import settings
from .core.exceptions import ValidationError, check_bound
from .doldthom import GAbelianGroup, dold_thom, moore_homology
from .dualcat import (
    Arrow,
    Bimodule,
    DualityData,
    FinCat,
    Functor,
    Swallowing,
    classify_split_extension,
    strictify,
    swallow,
)
from .equivariance import INF, ConnFn, FiniteGSet, _add, trace_bound, wedge_to_product_conn
from .homology import Conn, connectivity, equivariant_space_conn
from .models.reports import CheckReport, CheckStatus, conn_value
from .sset import SimplicialSet, edgewise_subdivide, indexed_wedge, monotone_tuples, quotient, smash, truncate
from .wall import (
    ModCatSkeleton,
    WallBimodule,
    WallRing,
    hm_bimodule,
    matrix_product,
    mod_cat_skeleton,
    semidirect_ring,
)

logger = structlog.get_logger()

Theta = Tuple[int, int, int]
Cover = Tuple[Theta, Theta]


def is_injective(theta: Sequence[int]) -> bool:
    return all(a < b for a, b in zip(theta, theta[1:]))


def retractions(p: int) -> List[Tuple[int, int]]:
    """rho = 0^i 1^j 2^(p-i-j+1) as (i, j)."""
    return [(i, j) for i in range(1, p + 1) for j in range(1, p + 1) if i + j <= p]


def admits(theta: Theta, rho: Tuple[int, int]) -> bool:
    """rho o theta = id."""
    i, j = rho
    t0, t1, t2 = theta
    return t0 < i <= t1 < i + j <= t2


class CatTwoP:
    """The poset Cat([2],[p]) with covering relations and the reversal duality."""

    def __init__(self, p: int):
        check_bound("MAX_S21_DEGREE", settings.MAX_S21_DEGREE, p)
        self.p = p
        self.thetas: List[Theta] = [tuple(t) for t in monotone_tuples(3, p)]
        self.index: Dict[Theta, int] = {t: i for i, t in enumerate(self.thetas)}
        self.covers: List[Cover] = []
        for t in self.thetas:
            for k in range(3):
                up = tuple(t[j] + (1 if j == k else 0) for j in range(3))
                if up in self.index:
                    self.covers.append((t, up))
        self.cover_index: Dict[Cover, int] = {c: i for i, c in enumerate(self.covers)}
        self.injective = [t for t in self.thetas if is_injective(t)]

    def dual(self, theta: Theta) -> Theta:
        p = self.p
        return (p - theta[2], p - theta[1], p - theta[0])

    @staticmethod
    def le(rho: Theta, theta: Theta) -> bool:
        return all(a <= b for a, b in zip(rho, theta))

    def path(self, rho: Theta, theta: Theta) -> List[Cover]:
        """Covers from rho to theta, raising t2 first, then t1, then t0."""
        if not self.le(rho, theta):
            raise ValidationError("no arrow between the triples", {"source": rho, "target": theta})
        steps = []
        cur = list(rho)
        for k in (2, 1, 0):
            while cur[k] < theta[k]:
                nxt = list(cur)
                nxt[k] += 1
                steps.append((tuple(cur), tuple(nxt)))
                cur = nxt
        return steps

    @cached_property
    def diamonds(self) -> List[Tuple[Theta, Theta, Theta, Theta]]:
        out = []
        up: Dict[Theta, List[Theta]] = {}
        for a, b in self.covers:
            up.setdefault(a, []).append(b)
        for rho, tops in up.items():
            for s1, s2 in itertools.combinations(tops, 2):
                theta = tuple(max(x, y) for x, y in zip(s1, s2))
                out.append((rho, s1, s2, theta))
        return out

    @cached_property
    def pairs(self) -> List[Cover]:
        return [(r, t) for r in self.thetas for t in self.thetas if self.le(r, t)]

    @cached_property
    def sequences(self) -> List[Tuple[Theta, Theta, Theta, Theta]]:
        """(d3 psi, d2 psi, d1 psi, d0 psi) for every monotone psi: [3] -> [p]."""
        out = []
        for psi in monotone_tuples(4, self.p):
            faces = [tuple(psi[:i] + psi[i + 1:]) for i in (3, 2, 1, 0)]
            out.append(tuple(faces))
        return out

    def check(self) -> CheckReport:
        name = f"cat_two_p[{self.p}]"
        checked = 0
        for t in self.thetas:
            checked += 1
            if self.dual(self.dual(t)) != t:
                return CheckReport.failure(name, "duality is not an involution", checked, theta=t)
        for a, b in self.covers:
            checked += 1
            if (self.dual(b), self.dual(a)) not in self.cover_index:
                return CheckReport.failure(name, "duality does not reverse covers", checked, cover=(a, b))
        return CheckReport(name=name, checked=checked, details={"triples": len(self.thetas)})


def _delta(i: int) -> Callable[[int], int]:
    return lambda j: j if j < i else j + 1


def _sigma(i: int) -> Callable[[int], int]:
    return lambda j: j if j <= i else j - 1


# Module categories


class ModuleCategory:
    """
    A skeleton of free modules, strictified when its duality is not strict.

    Exactness is tested on elements; objects of the strictification are
    read through their first component.
    """

    def __init__(self, skeleton: ModCatSkeleton, strictify_duality: bool = True):
        self.skeleton = skeleton
        self.ring = skeleton.ring
        if skeleton.duality.strict or not strictify_duality:
            self.category = skeleton.category
            self.duality = skeleton.duality
            self.strictified = False
        else:
            self.category, self.duality, _ = strictify(skeleton.duality)
            self.strictified = True
        self._vectors: Dict[int, List[Tuple[int, ...]]] = {}

    def rank(self, obj) -> int:
        return obj[0] if self.strictified else obj

    def matrix(self, f: Arrow):
        return f.data[0] if self.strictified else f.data

    @cached_property
    def zero_object(self):
        return next(c for c in self.category.objects if self.rank(c) == 0)

    def is_zero(self, obj) -> bool:
        return self.rank(obj) == 0

    def objects_up_to(self, bound: int) -> List:
        return [c for c in self.category.objects if self.rank(c) <= bound]

    def vectors(self, k: int) -> List[Tuple[int, ...]]:
        if k not in self._vectors:
            self._vectors[k] = list(itertools.product(self.ring.ring.elements, repeat=k))
        return self._vectors[k]

    def apply(self, f: Arrow, v: Sequence[int]) -> Tuple[int, ...]:
        rows, cols = self.rank(f.tgt), self.rank(f.src)
        column = tuple((x,) for x in v)
        image = matrix_product(self.ring, self.matrix(f), column, rows, cols, 1)
        return tuple(r[0] for r in image)

    def exact(self, objs: Sequence, arrows: Sequence[Arrow]) -> Optional[str]:
        """0 -> X0 -> X1 -> X2 -> X3 -> 0."""
        zero = self.ring.ring.zero
        images = []
        kernels = []
        for f in arrows:
            src = self.vectors(self.rank(f.src))
            values = [self.apply(f, v) for v in src]
            images.append(set(values))
            kernels.append({v for v, u in zip(src, values) if all(x == zero for x in u)})
        if len(kernels[0]) != 1:
            return "first map is not injective"
        if images[0] != kernels[1]:
            return "not exact at the second term"
        if images[1] != kernels[2]:
            return "not exact at the third term"
        if len(images[2]) != len(self.vectors(self.rank(objs[3]))):
            return "last map is not surjective"
        return None


@dataclass(frozen=True)
class S21Object:
    """Values on every triple and arrows on every cover, in CatTwoP order."""

    p: int
    objects: Tuple[Hashable, ...]
    maps: Tuple[Arrow, ...]

    def __repr__(self) -> str:
        return f"S21Object(p={self.p}, objects={self.objects})"


Family = Tuple[Hashable, ...]


class S21Level:
    """S^{2,1}_p over a module category, with its strict duality when C has one."""

    def __init__(self, mc: ModuleCategory, p: int):
        self.mc = mc
        self.p = p
        self.shape = CatTwoP(p)
        self.C = mc.category

    # Arrows of a diagram

    def at(self, X: S21Object, theta: Theta):
        return X.objects[self.shape.index[theta]]

    def map(self, X: S21Object, rho: Theta, theta: Theta) -> Arrow:
        if rho == theta:
            return self.C.identity(self.at(X, rho))
        arrows = [X.maps[self.shape.cover_index[c]] for c in self.shape.path(rho, theta)]
        return self.C.chain(*arrows)

    def check_object(self, X: S21Object) -> Optional[str]:
        S, C = self.shape, self.C
        for t in S.thetas:
            if not is_injective(t) and not self.mc.is_zero(self.at(X, t)):
                return f"value at non-injective {t} is not zero"
        for (a, b), f in zip(S.covers, X.maps):
            if (f.src, f.tgt) != (self.at(X, a), self.at(X, b)) or not C.contains(f):
                return f"arrow on cover {a} -> {b} is not an arrow between the values"
        for rho, s1, s2, theta in S.diamonds:
            left = C.compose(self.map(X, s1, theta), self.map(X, rho, s1))
            right = C.compose(self.map(X, s2, theta), self.map(X, rho, s2))
            if left != right:
                return f"square at {rho} -> {theta} does not commute"
        for seq in S.sequences:
            objs = [self.at(X, t) for t in seq]
            arrows = [self.map(X, seq[i], seq[i + 1]) for i in range(3)]
            problem = self.mc.exact(objs, arrows)
            if problem is not None:
                return f"sequence {seq}: {problem}"
        return None

    def build(self, values: Dict[Theta, Hashable], arrows: Dict[Cover, Arrow]) -> S21Object:
        objs = tuple(values.get(t, self.mc.zero_object) for t in self.shape.thetas)
        maps = []
        for a, b in self.shape.covers:
            if (a, b) in arrows:
                maps.append(arrows[(a, b)])
            else:
                maps.append(self.C.hom(objs[self.shape.index[a]], objs[self.shape.index[b]])[0])
        return S21Object(self.p, objs, tuple(maps))

    # Enumeration

    def objects(self, bound: int) -> List[S21Object]:
        """Every object with values of rank <= bound."""
        S, C = self.shape, self.C
        choices = self.mc.objects_up_to(bound)
        active = [(a, b) for a, b in S.covers if is_injective(a) and is_injective(b)]
        total = 0
        assignments = list(itertools.product(choices, repeat=len(S.injective)))
        for values in assignments:
            v = dict(zip(S.injective, values))
            count = 1
            for a, b in active:
                count *= len(C.hom(v[a], v[b]))
            total += count
        check_bound("ENUMERATION_LIMIT", settings.ENUMERATION_LIMIT, total)
        found = []
        for values in assignments:
            v = dict(zip(S.injective, values))
            for arrows in itertools.product(*[C.hom(v[a], v[b]) for a, b in active]):
                X = self.build(v, dict(zip(active, arrows)))
                if self.check_object(X) is None:
                    found.append(X)
        logger.info("s21_objects_enumerated", p=self.p, bound=bound, candidates=total, objects=len(found))
        return found

    def find_isomorphism(self, X: S21Object, Y: S21Object) -> Optional[Family]:
        S, C = self.shape, self.C
        if any(self.mc.rank(x) != self.mc.rank(y) for x, y in zip(X.objects, Y.objects)):
            return None
        chosen: Dict[Theta, Arrow] = {t: C.identity(self.at(X, t)) for t in S.thetas if not is_injective(t)}
        order = S.injective

        def natural(t: Theta) -> bool:
            for (a, b), f, g in zip(S.covers, X.maps, Y.maps):
                if t not in (a, b) or a not in chosen or b not in chosen:
                    continue
                if C.compose(chosen[b], f) != C.compose(g, chosen[a]):
                    return False
            return True

        def search(i: int) -> bool:
            if i == len(order):
                return True
            t = order[i]
            for g in C.isomorphisms(self.at(X, t), self.at(Y, t)):
                chosen[t] = g
                if natural(t) and search(i + 1):
                    return True
            chosen.pop(t, None)
            return False

        if not search(0):
            return None
        return tuple(chosen[t].data for t in S.thetas)

    def classes(self, objs: Iterable[S21Object]) -> List[S21Object]:
        reps: List[S21Object] = []
        for X in objs:
            if not any(self.find_isomorphism(X, R) is not None for R in reps):
                reps.append(X)
        return reps

    def oracle(self, bound: int, summands: Optional[Sequence] = None) -> List[S21Object]:
        """Y_theta = (+)_{rho in r(theta)} c_rho with inclusions and projections as arrows."""
        if self.mc.strictified:
            raise ValidationError("the splitting oracle works on a free module skeleton")
        A = self.mc.ring
        R = A.ring
        rhos = retractions(self.p)
        summands = list(summands) if summands is not None else self.mc.objects_up_to(bound)
        out = []
        for cs in itertools.product(summands, repeat=len(rhos)):
            c = dict(zip(rhos, cs))
            blocks = {t: [r for r in rhos if admits(t, r)] for t in self.shape.thetas}
            values = {t: sum(c[r] for r in blocks[t]) for t in self.shape.thetas}
            if any(v > bound for v in values.values()):
                continue

            def offsets(t):
                pos, out_ = {}, 0
                for r in blocks[t]:
                    pos[r] = out_
                    out_ += c[r]
                return pos

            arrows = {}
            for a, b in self.shape.covers:
                oa, ob = offsets(a), offsets(b)
                rows, cols = values[b], values[a]
                entries = [[R.zero] * cols for _ in range(rows)]
                for r in blocks[a]:
                    if r in ob:
                        for s in range(c[r]):
                            entries[ob[r] + s][oa[r] + s] = R.one
                arrows[(a, b)] = Arrow(values[a], values[b], tuple(tuple(row) for row in entries))
            out.append(self.build(values, arrows))
        return out

    # Duality and simplicial structure

    def dual(self, X: S21Object) -> S21Object:
        S, D = self.shape, self.mc.duality
        objs = tuple(D(self.at(X, S.dual(t))) for t in S.thetas)
        maps = tuple(D(X.maps[S.cover_index[(S.dual(b), S.dual(a))]]) for a, b in S.covers)
        return S21Object(self.p, objs, maps)

    def _reindex(self, X: S21Object, target: "S21Level", f: Callable[[int], int]) -> S21Object:
        def move(t):
            return tuple(f(x) for x in t)

        objs = tuple(self.at(X, move(t)) for t in target.shape.thetas)
        maps = tuple(self.map(X, move(a), move(b)) for a, b in target.shape.covers)
        return S21Object(target.p, objs, maps)

    def face(self, X: S21Object, i: int) -> S21Object:
        return self._reindex(X, S21Level(self.mc, self.p - 1), _delta(i))

    def degeneracy(self, X: S21Object, i: int) -> S21Object:
        return self._reindex(X, S21Level(self.mc, self.p + 1), _sigma(i))

    def transport(self, X: S21Object, on_objects: Callable, on_arrows: Callable[[Arrow], Arrow]) -> S21Object:
        return S21Object(self.p, tuple(on_objects(x) for x in X.objects), tuple(on_arrows(f) for f in X.maps))

    # The category S^{2,1}_p C

    def natural_families(self, X: S21Object, Y: S21Object) -> List[Family]:
        S, C = self.shape, self.C
        slots = S.thetas
        chosen: Dict[Theta, Arrow] = {}
        out: List[Family] = []

        def ok(t):
            for (a, b), f, g in zip(S.covers, X.maps, Y.maps):
                if t in (a, b) and a in chosen and b in chosen:
                    if C.compose(chosen[b], f) != C.compose(g, chosen[a]):
                        return False
            return True

        def search(i):
            if i == len(slots):
                out.append(tuple(chosen[t].data for t in slots))
                return
            t = slots[i]
            for g in C.hom(self.at(X, t), self.at(Y, t)):
                chosen[t] = g
                if ok(t):
                    search(i + 1)
            chosen.pop(t, None)

        search(0)
        return out

    def category(self, objs: Sequence[S21Object]) -> Tuple[FinCat, Optional[DualityData]]:
        S, C = self.shape, self.C
        thetas = S.thetas

        def arrows(f: Arrow) -> List[Arrow]:
            return [Arrow(self.at(f.src, t), self.at(f.tgt, t), d) for t, d in zip(thetas, f.data)]

        def compose(g: Arrow, f: Arrow) -> Family:
            return tuple(C.compose(b, a).data for a, b in zip(arrows(f), arrows(g)))

        additive = {}
        if C.additive:
            additive = dict(
                add=lambda f, g: tuple(C.add(a, b).data for a, b in zip(arrows(f), arrows(g))),
                neg=lambda f: tuple(C.neg(a).data for a in arrows(f)),
                zero=lambda X, Y: tuple(C.zero(self.at(X, t), self.at(Y, t)).data for t in thetas),
            )
        cat = FinCat(
            objs,
            self.natural_families,
            compose,
            lambda X: tuple(C.identity(self.at(X, t)).data for t in thetas),
            name=f"S21_{self.p}({C.name})",
            **additive,
        )
        if not self.mc.duality.strict:
            return cat, None
        D = self.mc.duality

        def dual_arrow(f: Arrow) -> Arrow:
            fam = arrows(f)
            data = tuple(D(fam[S.index[S.dual(t)]]).data for t in thetas)
            return Arrow(self.dual(f.tgt), self.dual(f.src), data)

        known = set(objs)
        if any(self.dual(X) not in known for X in objs):
            logger.warning("s21_duality_not_closed", p=self.p)
            return cat, None
        return cat, DualityData.strict_from(cat, self.dual, dual_arrow, name="D_S21")


def s21_enumerate(mc: ModuleCategory, p: int, bound: int) -> List[S21Object]:
    """Objects of S^{2,1}_p C up to isomorphism."""
    check_bound("MAX_RANK", settings.MAX_RANK, bound)
    level = S21Level(mc, p)
    reps = level.classes(level.objects(bound))
    logger.info("s21_classes", p=p, bound=bound, classes=len(reps))
    return reps


def s21_objects(mc: ModuleCategory, p: int, bound: int) -> List[S21Object]:
    return S21Level(mc, p).objects(bound)


def splitting_oracle(mc: ModuleCategory, p: int, bound: int) -> List[S21Object]:
    return S21Level(mc, p).oracle(bound)


def s21_duality(level: S21Level, X: S21Object) -> S21Object:
    if not level.mc.duality.strict:
        raise ValidationError("s21_duality needs a strict duality")
    return level.dual(X)


def check_oracle(mc: ModuleCategory, p: int, bound: int) -> CheckReport:
    """Oracle objects pass the object checks and every enumerated object is isomorphic to one."""
    level = S21Level(mc, p)
    name = f"splitting_oracle[p={p}]"
    oracle = level.oracle(bound)
    checked = 0
    for Y in oracle:
        checked += 1
        problem = level.check_object(Y)
        if problem is not None:
            return CheckReport.failure(name, problem, checked, object=repr(Y))
    objs = level.objects(bound)
    for X in objs:
        checked += 1
        if not any(level.find_isomorphism(X, Y) is not None for Y in oracle):
            return CheckReport.failure(name, "object is not isomorphic to a split diagram", checked, object=repr(X))
    classes = level.classes(objs)
    oracle_classes = level.classes(oracle)
    if len(classes) != len(oracle_classes):
        return CheckReport.failure(name, "class counts differ", checked, enumerated=len(classes), oracle=len(oracle_classes))
    return CheckReport(
        name=name,
        checked=checked,
        details={"objects": len(objs), "classes": len(classes), "oracle_objects": len(oracle)},
    )


def check_level_structure(mc: ModuleCategory, p: int, bound: int) -> CheckReport:
    """Duality squares to the identity and commutes with faces: D d_i = d_{p-i} D."""
    level = S21Level(mc, p)
    name = f"s21_structure[p={p}]"
    checked = 0
    for X in level.objects(bound):
        checked += 1
        DX = level.dual(X)
        if level.check_object(DX) is not None or level.dual(DX) != X:
            return CheckReport.failure(name, "duality is not an involution on objects", checked, object=repr(X))
        if p == 0:
            continue
        lower = S21Level(mc, p - 1)
        for i in range(p + 1):
            checked += 1
            face = level.face(X, i)
            if lower.check_object(face) is not None:
                return CheckReport.failure(name, "face is not an object", checked, object=repr(X), face=i)
            if lower.dual(face) != level.face(DX, p - i):
                return CheckReport.failure(name, "duality does not commute with faces", checked, object=repr(X), face=i)
        if p < settings.MAX_S21_DEGREE:
            upper = S21Level(mc, p + 1)
            for i in range(p + 1):
                checked += 1
                s = level.degeneracy(X, i)
                if upper.check_object(s) is not None or upper.face(s, i) != X:
                    return CheckReport.failure(name, "degeneracy is not a section of the face", checked, object=repr(X), degeneracy=i)
    return CheckReport(name=name, checked=checked)


# The extended bimodule M_p


def extend_bimodule(level: S21Level, M: Bimodule, X: S21Object, Y: S21Object) -> List[Family]:
    """
    M_p(X, Y): families {m_theta in M(X_theta, Y_theta)} with
    X(psi)^* m_theta = Y(psi)_* m_rho for every rho <= theta.
    """
    S = level.shape
    slots = [M.elements(level.at(X, t), level.at(Y, t)) for t in S.thetas]
    total = 1
    for s in slots:
        total *= len(s)
    check_bound("ENUMERATION_LIMIT", settings.ENUMERATION_LIMIT, total)
    out = []
    for fam in itertools.product(*slots):
        if all(_related(level, M, X, Y, fam, rho, theta) for rho, theta in S.pairs if rho != theta):
            out.append(fam)
    return out


def _related(level, M, X, Y, fam, rho, theta) -> bool:
    i, j = level.shape.index[rho], level.shape.index[theta]
    return M.pull(level.map(X, rho, theta), fam[j]) == M.push(level.map(Y, rho, theta), fam[i])


def extend_bimodule_by_covers(level: S21Level, M: Bimodule, X: S21Object, Y: S21Object) -> List[Family]:
    """The same group, built by extending partial families along the covers."""
    S = level.shape
    slots = S.thetas
    chosen: Dict[int, Hashable] = {}
    out = []

    def ok(k):
        t = slots[k]
        for a, b in S.covers:
            if t not in (a, b):
                continue
            i, j = S.index[a], S.index[b]
            if i in chosen and j in chosen:
                left = M.pull(X.maps[S.cover_index[(a, b)]], chosen[j])
                right = M.push(Y.maps[S.cover_index[(a, b)]], chosen[i])
                if left != right:
                    return False
        return True

    def search(k):
        if k == len(slots):
            out.append(tuple(chosen[i] for i in range(len(slots))))
            return
        for m in M.elements(level.at(X, slots[k]), level.at(Y, slots[k])):
            chosen[k] = m
            if ok(k):
                search(k + 1)
        chosen.pop(k, None)

    search(0)
    return out


def check_extension_routes(level: S21Level, M: Bimodule, X: S21Object, Y: S21Object) -> CheckReport:
    name = f"extended_bimodule[p={level.p}]"
    direct = extend_bimodule(level, M, X, Y)
    chased = extend_bimodule_by_covers(level, M, X, Y)
    if sorted(map(repr, direct)) != sorted(map(repr, chased)):
        return CheckReport.failure(name, "the two constructions differ", len(direct), direct=len(direct), chased=len(chased))
    report = CheckReport(name=name, checked=len(direct), details={"order": len(direct)})
    if M.duality is not None and level.mc.duality.strict:
        S = level.shape
        DX, DY = level.dual(X), level.dual(Y)
        target = set(extend_bimodule(level, M, DY, DX))
        for fam in direct:
            image = tuple(
                M.J(level.at(X, S.dual(t)), level.at(Y, S.dual(t)), fam[S.index[S.dual(t)]]) for t in S.thetas
            )
            if image not in target:
                return CheckReport.failure(name, "J does not preserve the compatible families", len(direct), family=repr(fam))
    return report


def level_bimodule(level: S21Level, M: Bimodule, cat: FinCat, duality: Optional[DualityData]) -> Bimodule:
    """M_p as a bimodule on the category of S^{2,1}_p-objects."""
    S = level.shape
    thetas = S.thetas

    def at_arrows(f: Arrow) -> List[Arrow]:
        return [Arrow(level.at(f.src, t), level.at(f.tgt, t), d) for t, d in zip(thetas, f.data)]

    def J(X, Y, fam):
        return tuple(M.J(level.at(X, S.dual(t)), level.at(Y, S.dual(t)), fam[S.index[S.dual(t)]]) for t in thetas)

    return Bimodule(
        cat,
        lambda X, Y: extend_bimodule(level, M, X, Y),
        lambda m, n: tuple(M.add(a, b) for a, b in zip(m, n)),
        lambda X, Y: tuple(M.zero(level.at(X, t), level.at(Y, t)) for t in thetas),
        lambda f, m: tuple(M.push(a, x) for a, x in zip(at_arrows(f), m)),
        lambda g, m: tuple(M.pull(a, x) for a, x in zip(at_arrows(g), m)),
        J if M.duality is not None else None,
        duality,
        name=f"{M.name}_{level.p}",
    )


def swallow_level(
    A: WallRing, M: WallBimodule, p: int, k: int, bound: int = 1, sample: Optional[int] = None
) -> Tuple[Swallowing, CheckReport]:
    """The swallowing retraction and homotopy with S^{2,1}_p P_A in place of C."""
    skeleton = mod_cat_skeleton(A, bound)
    mc = ModuleCategory(skeleton)
    level = S21Level(mc, p)
    cat, duality = level.category(level.objects(bound))
    if duality is None:
        raise ValidationError("the level category carries no strict duality", {"ring": A.name})
    H = level_bimodule(level, hm_bimodule(M, skeleton), cat, duality)
    return swallow(duality, H, k, sample=sample)


# Levelwise split extensions


def verify_splitPA(A: WallRing, M: WallBimodule, p: int, bound: int) -> CheckReport:
    """
    F: S^{2,1}_p P_A x| (H^M)_p -> S^{2,1}_p P_{A x| M} is an equivalence
    commuting with the dualities, and ker S^{2,1}_p(reduction) is (H^M)_p.
    """
    check_bound("MAX_RANK", settings.MAX_RANK, bound)
    AM = semidirect_ring(A, M)
    k = M.order
    base_skel = mod_cat_skeleton(A, bound)
    total_skel = mod_cat_skeleton(AM, bound)
    strict = base_skel.duality.strict and total_skel.duality.strict
    lvA = S21Level(ModuleCategory(base_skel, strictify_duality=False), p)
    lvB = S21Level(ModuleCategory(total_skel, strictify_duality=False), p)
    objsA, objsB = lvA.objects(bound), lvB.objects(bound)
    C, dual_c = lvA.category(objsA)
    B, dual_b = lvB.category(objsB)

    def lift_matrix(mat):
        return tuple(tuple(x * k + M.zero for x in row) for row in mat)

    def reduce_matrix(mat):
        return tuple(tuple(x // k for x in row) for row in mat)

    def lift_object(X: S21Object) -> S21Object:
        return lvA.transport(X, lambda c: c, lambda f: Arrow(f.src, f.tgt, lift_matrix(f.data)))

    def reduce_object(X: S21Object) -> S21Object:
        return lvB.transport(X, lambda c: c, lambda f: Arrow(f.src, f.tgt, reduce_matrix(f.data)))

    s = Functor(C, B, lift_object, lambda f: Arrow(lift_object(f.src), lift_object(f.tgt), tuple(lift_matrix(d) for d in f.data)), name="s")
    red = Functor(B, C, reduce_object, lambda f: Arrow(reduce_object(f.src), reduce_object(f.tgt), tuple(reduce_matrix(d) for d in f.data)), name="p")
    name = f"split_PA[{A.name}, {M.name}, p={p}]"
    known = set(objsA)
    for X in objsB:
        if reduce_object(X) not in known:
            return CheckReport.failure(name, "reduction leaves S21_p P_A", 0, object=repr(X))
    F, report = classify_split_extension(
        red, s, lambda c: C.identity(c), dual_b if strict else None, dual_c if strict else None
    )
    if not report.passed:
        return report.model_copy(update={"name": name})
    H = hm_bimodule(M, base_skel)

    def to_hm(X: S21Object, Y: S21Object, f: Arrow) -> Family:
        return tuple(
            ((lvA.at(Y, t), lvA.at(X, t)), tuple(tuple(x % k for x in row) for row in mat))
            for t, mat in zip(lvA.shape.thetas, f.data)
        )

    checked = report.checked
    for X in objsA:
        for Y in objsA:
            checked += 1
            kernel = [
                f for f in B.hom(lift_object(X), lift_object(Y))
                if all(x // k == A.ring.zero for mat in f.data for row in mat for x in row)
            ]
            as_hm = sorted(repr(to_hm(X, Y, f)) for f in kernel)
            extended = sorted(repr(fam) for fam in extend_bimodule(lvA, H, X, Y))
            if as_hm != extended:
                return CheckReport.failure(name, "kernel differs from the extended H^M", checked, source=repr(X), target=repr(Y))
    oracle = lvA.oracle(bound)
    details = {
        "objects": len(objsA),
        "total_objects": len(objsB),
        "oracle_objects": len(oracle),
        "duality_checked": strict,
    }
    logger.info("split_pa_verified", ring=A.name, bimodule=M.name, p=p, **details)
    return CheckReport(name=name, checked=checked, details=details)


# Coefficient systems and the trace


class SimplexCategory:
    """Simplices (p, x) of S with arrows sigma: (q, sigma^* x) -> (p, x) for monotone sigma: [q] -> [p]."""

    def __init__(self, S: SimplicialSet, dim: Optional[int] = None):
        self.S = S
        self.dim = S.dim if dim is None else min(dim, S.dim)
        objects = [(p, x) for p in range(self.dim + 1) for x in range(S.size(p))]

        def hom(a, b):
            q, z = a
            p, x = b
            return [s for s in monotone_tuples(q + 1, p) if self.pullback(p, x, s) == z]

        self.category = FinCat(
            objects,
            hom,
            lambda g, f: tuple(g.data[j] for j in f.data),
            lambda a: tuple(range(a[0] + 1)),
            name=f"Simp({S.name})",
        )

    def pullback(self, p: int, x: int, sigma: Sequence[int]) -> int:
        """sigma^* x: faces for the missed vertices, then degeneracies for the repeats."""
        S = self.S
        image = sorted(set(sigma))
        y, dim = x, p
        for i in reversed(range(p + 1)):
            if i not in image:
                y = S.face(dim, i, y)
                dim -= 1
        for j in range(len(sigma) - 1):
            if sigma[j] == sigma[j + 1]:
                y = S.degeneracy(dim, j, y)
                dim += 1
        return y

    def involution(self) -> Functor:
        if not self.S.is_real:
            raise ValidationError("simplex category involution needs a Real simplicial set", {"space": self.S.name})
        S = self.S

        def flip(sigma, p):
            q = len(sigma) - 1
            return tuple(p - sigma[q - j] for j in range(q + 1))

        return Functor(
            self.category,
            self.category,
            lambda a: (a[0], S.involution[a[0]][a[1]]),
            lambda f: Arrow((f.src[0], S.involution[f.src[0]][f.src[1]]), (f.tgt[0], S.involution[f.tgt[0]][f.tgt[1]]), flip(f.data, f.tgt[0])),
            name="Simp(w)",
        )

    def check(self) -> CheckReport:
        name = f"simplex_category[{self.S.name}]"
        report = self.category.check()
        if not report.passed or not self.S.is_real:
            return report.model_copy(update={"name": name})
        w = self.involution()
        functor = w.check()
        if not functor.passed:
            return functor.model_copy(update={"name": name})
        checked = report.checked + functor.checked
        for f in self.category.arrows():
            checked += 1
            if w(w(f)) != f:
                return CheckReport.failure(name, "involution does not square to the identity", checked, arrow=f)
        return CheckReport(name=name, checked=checked)


@dataclass
class CoeffSystemLevel:
    """
    A 1-reduced pointed Real simplicial set S with coefficients N_s = N on
    every non-base simplex and 0 at the base; the C2 action on N is w.
    """

    S: SimplicialSet
    N: GAbelianGroup

    def check(self) -> CheckReport:
        S = self.S
        name = f"coefficients[{S.name}, {self.N.name}]"
        if not S.pointed or not S.is_real:
            return CheckReport.failure(name, "S must be a pointed Real simplicial set", 0)
        for n in range(min(2, S.dim + 1)):
            if S.nonbase(n):
                return CheckReport.failure(name, "S is not 1-reduced", n, level=n)
        if self.N.group.order != 2:
            return CheckReport.failure(name, "N must carry an involution", 0, group=self.N.group.name)
        S.check_identities()
        return CheckReport(name=name, checked=S.dim + 1)

    def summands(self, q: int) -> FiniteGSet:
        """The C2-set of non-base simplices of (sd_e S)_q = S_{2q+1} under w."""
        S = self.S
        p = 2 * q + 1
        if p > S.dim:
            raise ValidationError("subdivided level above the truncation", {"level": q, "top": (S.dim - 1) // 2})
        points = S.nonbase(p)
        pos = {x: i for i, x in enumerate(points)}
        flip = [pos[S.involution[p][x]] for x in points]
        group = self.N.group
        return FiniteGSet(group, [list(range(len(points))) if g == group.identity else flip for g in group.elements], labels=points)


@dataclass
class TraceLevel:
    """Subdivided level q: summands indexed by S_{2q+1}, conn of the wedge -> sum map there."""

    q: int
    summands: int
    fixed: int
    free_orbits: int
    conn: ConnFn
    hr: Optional[object] = None


def _pair_conn(c: Conn, count: int) -> Conn:
    """Wedge -> sum of `count` copies of a c-connected summand, all fixed."""
    return INF if count < 2 else _add(_add(c, c), 1)


def _realized(levelwise: Iterable[Tuple[int, Conn]], shift: int) -> Conn:
    """min_q (conn_q + q) over the simplicial levels, less `shift`."""
    return _add(min((_add(c, q) for q, c in levelwise), default=INF), -shift)


def kr_hr_levels(system: CoeffSystemLevel, X: SimplicialSet, build_hr: bool = False) -> Tuple[List[TraceLevel], CheckReport]:
    """
    Levels of KR(S; N)(X) = v_s N(X) and HR(S; N)(X) = (+)_s N(X) with the
    trace v -> (+), at spectrum level 1.

    Each subdivided level q is measured as the wedge -> product map of the
    Dold-Thom summand N(X) indexed by S_{2q+1}. The level-1 connectivity
    realizes these: underlying over the levels of S, less 2; on fixed points
    the fixed summands realize over (sd_e S)^C2 and the free orbits form the
    linear part N(X ^ sd_e S / (sd_e S)^C2)^C2, measured directly; less 1.
    Checked against (2 conn X + 1, min{2 conn X^C2, conn X} + 1).
    """
    coeff = system.check()
    if not coeff.passed:
        raise ValidationError(coeff.counterexample.message, coeff.counterexample.location)
    S, N = system.S, system.N
    group = N.group
    whole = frozenset(group.elements)
    dt = dold_thom(N, X)
    summand = ConnFn(group, [connectivity(moore_homology(dt)), connectivity(moore_homology(dt, whole))])
    c_under, c_fixed = summand.values
    bound = trace_bound(equivariant_space_conn(X))
    name = f"trace_conn[{S.name}, {N.name}, {X.name}]"

    T = edgewise_subdivide(S)
    fixed_simplices = [
        [x for x in range(T.size(q)) if all(T.act[q][g][x] == x for g in T.group.elements)] for q in range(T.dim + 1)
    ]
    levels = []
    for q in range(T.dim + 1):
        J = system.summands(q)
        fixed = len(J.fixed(whole))
        level = TraceLevel(q, J.size, fixed, len(J.orbits(whole)) - fixed, wedge_to_product_conn(J, summand))
        if build_hr:
            level.hr = dold_thom(N, indexed_wedge(X, J))
        levels.append(level)

    top = min(X.dim, T.dim)
    free_part = smash(truncate(X, top), truncate(quotient(T, fixed_simplices, name=f"{T.name}/fix"), top))
    linear = connectivity(moore_homology(dold_thom(N, free_part), whole))
    under = _realized(((p, _pair_conn(c_under, len(S.nonbase(p)))) for p in range(S.dim + 1)), 2)
    wedge_part = _realized(((q, _pair_conn(c_fixed, len(fixed_simplices[q]) - 1)) for q in range(T.dim + 1)), 0)
    realized = ConnFn(group, [under, _add(min(wedge_part, linear), -1)])

    details = {
        "bound": bound.to_dict(),
        "realized": realized.to_dict(),
        "summand_conn": summand.to_dict(),
        "linear_conn": conn_value(linear),
        "levels": len(levels),
    }
    if not realized.dominates(bound):
        logger.warning("trace_below_bound", space=X.name, coefficients=N.name, **details)
        report = CheckReport.failure(name, "trace connectivity is below the bound", len(levels),
                                     realized=realized.to_dict(), bound=bound.to_dict())
        report.details = details
        return levels, report
    status = CheckStatus.WINDOW_LIMITED if INF in realized.values else CheckStatus.PASS
    logger.info("trace_levels_measured", space=X.name, coefficients=N.name, **details)
    return levels, CheckReport(name=name, status=status, checked=len(levels), details=details)
