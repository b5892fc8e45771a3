"""
Wall antistructures on finite rings.

Rings, bimodules and involutions are stored as lookup tables over element
indices 0..n-1, so every axiom is checked exhaustively. Modules are free
right modules A^k written as column vectors; an arrow A^k -> A^l is an l x k
matrix (a tuple of rows). The duality sends F to the transpose of w^-1(F)
with eta_{A^k} = eps^-1 I.
"""

import itertools
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import structlog

from .core.config import settings
from .core.exceptions import ValidationError, check_bound
from .dualcat import Arrow, Bimodule, DualityData, FinCat, Functor, classify_split_extension
from .models.reports import CheckReport
from .sset import SimplicialSet

logger = structlog.get_logger()

Table = List[List[int]]
Matrix = Tuple[Tuple[int, ...], ...]
HMElement = Tuple[Tuple[int, int], Matrix]


class FiniteRing:
    """A unital ring on 0..n-1 given by addition and multiplication tables."""

    def __init__(self, add: Table, mul: Table, zero: int = 0, one: int = 1, name: str = "A"):
        self.add_table = [list(row) for row in add]
        self.mul_table = [list(row) for row in mul]
        self.zero = zero
        self.one = one
        self.name = name
        n = len(self.add_table)
        if len(self.mul_table) != n or any(len(r) != n for r in self.add_table + self.mul_table):
            raise ValidationError("ring tables are not square of the same size", {"ring": name})
        check_bound("MAX_RING_ORDER", settings.MAX_RING_ORDER, n)
        self._neg = [next((b for b in range(n) if self.add_table[a][b] == zero), None) for a in range(n)]

    @property
    def order(self) -> int:
        return len(self.add_table)

    @property
    def elements(self) -> range:
        return range(self.order)

    def add(self, a: int, b: int) -> int:
        return self.add_table[a][b]

    def mul(self, a: int, b: int) -> int:
        return self.mul_table[a][b]

    def neg(self, a: int) -> int:
        return self._neg[a]

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def total(self, values: Sequence[int]) -> int:
        out = self.zero
        for v in values:
            out = self.add(out, v)
        return out

    def inverse(self, a: int) -> Optional[int]:
        for b in self.elements:
            if self.mul(a, b) == self.one and self.mul(b, a) == self.one:
                return b
        return None

    def units(self) -> List[int]:
        return [a for a in self.elements if self.inverse(a) is not None]

    def check(self) -> CheckReport:
        """Abelian group under add, associative unital mul, both distributive laws."""
        name = f"ring_axioms[{self.name}]"
        E = self.elements
        checked = 0
        for a in E:
            checked += 1
            if self.add(a, self.zero) != a or self.mul(a, self.one) != a or self.mul(self.one, a) != a:
                return CheckReport.failure(name, "zero or one is not neutral", checked, element=a)
            if self._neg[a] is None:
                return CheckReport.failure(name, "element has no additive inverse", checked, element=a)
        for a, b in itertools.product(E, repeat=2):
            checked += 1
            if self.add(a, b) != self.add(b, a):
                return CheckReport.failure(name, "addition is not commutative", checked, a=a, b=b)
        for a, b, c in itertools.product(E, repeat=3):
            checked += 1
            if self.add(self.add(a, b), c) != self.add(a, self.add(b, c)):
                return CheckReport.failure(name, "addition is not associative", checked, a=a, b=b, c=c)
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)):
                return CheckReport.failure(name, "multiplication is not associative", checked, a=a, b=b, c=c)
            if self.mul(a, self.add(b, c)) != self.add(self.mul(a, b), self.mul(a, c)):
                return CheckReport.failure(name, "left distributivity fails", checked, a=a, b=b, c=c)
            if self.mul(self.add(a, b), c) != self.add(self.mul(a, c), self.mul(b, c)):
                return CheckReport.failure(name, "right distributivity fails", checked, a=a, b=b, c=c)
        return CheckReport(name=name, checked=checked, details={"order": self.order})

    def __repr__(self) -> str:
        return f"FiniteRing({self.name}, order={self.order})"

    # Presets

    @classmethod
    def zmod(cls, n: int) -> "FiniteRing":
        E = range(n)
        return cls([[(a + b) % n for b in E] for a in E], [[(a * b) % n for b in E] for a in E], name=f"Z/{n}")

    @classmethod
    def dual_numbers(cls) -> "FiniteRing":
        """F2[x]/x^2 with a + bx stored at a + 2b."""
        E = range(4)

        def mul(u, v):
            a, b, c, d = u & 1, u >> 1, v & 1, v >> 1
            return (a * c) % 2 + 2 * ((a * d + b * c) % 2)

        return cls([[u ^ v for v in E] for u in E], [[mul(u, v) for v in E] for u in E], name="F2[x]/x^2")

    @classmethod
    def matrices_f2(cls) -> "FiniteRing":
        """M2(F2) with [[a, b], [c, d]] stored at a + 2b + 4c + 8d."""
        E = range(16)
        return cls(
            [[u ^ v for v in E] for u in E],
            [[_pack2(_mul2(_unpack2(u), _unpack2(v))) for v in E] for u in E],
            one=_pack2(((1, 0), (0, 1))),
            name="M2(F2)",
        )


def _unpack2(u: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    return ((u & 1, (u >> 1) & 1), ((u >> 2) & 1, (u >> 3) & 1))


def _pack2(m) -> int:
    return m[0][0] + 2 * m[0][1] + 4 * m[1][0] + 8 * m[1][1]


def _mul2(x, y):
    return tuple(tuple(sum(x[i][s] * y[s][j] for s in range(2)) % 2 for j in range(2)) for i in range(2))


def _transpose2(u: int) -> int:
    m = _unpack2(u)
    return _pack2(((m[0][0], m[1][0]), (m[0][1], m[1][1])))


class WallRing:
    """(A, w, eps): w an additive anti-automorphism with w^2 = eps (-) eps^-1."""

    def __init__(self, ring: FiniteRing, w: Sequence[int], eps: int, name: Optional[str] = None):
        self.ring = ring
        self.w = list(w)
        self.eps = eps
        self.name = name or ring.name
        self.parts: Optional[Tuple["WallRing", "WallBimodule"]] = None
        self._w_inv: Optional[List[int]] = None

    @property
    def order(self) -> int:
        return self.ring.order

    @property
    def eps_inv(self) -> int:
        inv = self.ring.inverse(self.eps)
        if inv is None:
            raise ValidationError("eps is not a unit", {"ring": self.name, "eps": self.eps})
        return inv

    def w_inv(self, a: int) -> int:
        if self._w_inv is None:
            inv = [0] * self.order
            for x, y in enumerate(self.w):
                inv[y] = x
            self._w_inv = inv
        return self._w_inv[a]

    @property
    def eps_fixed(self) -> bool:
        return self.w[self.eps] == self.eps

    def validate(self) -> "WallRing":
        report = validate_antistructure(self)
        if not report.passed:
            raise ValidationError(report.counterexample.message, report.counterexample.location)
        return self

    def __repr__(self) -> str:
        return f"WallRing({self.name}, eps={self.eps})"

    @classmethod
    def preset(cls, name: str) -> "WallRing":
        key = name.strip()
        if key in ("F2", "F3", "Z4"):
            ring = FiniteRing.zmod(int(key[1]))
            return cls(ring, list(ring.elements), ring.one, name=key)
        if key in ("F3neg", "Z4neg"):
            ring = FiniteRing.zmod(int(key[1]))
            return cls(ring, list(ring.elements), ring.neg(ring.one), name=key)
        if key == "F2x":
            ring = FiniteRing.dual_numbers()
            return cls(ring, list(ring.elements), ring.one, name=key)
        if key == "M2F2":
            ring = FiniteRing.matrices_f2()
            return cls(ring, [_transpose2(u) for u in ring.elements], ring.one, name=key)
        raise ValidationError(f"unknown ring preset {name!r}", {"presets": RING_PRESETS})


RING_PRESETS = ["F2", "F3", "F3neg", "Z4", "Z4neg", "F2x", "M2F2"]


def validate_antistructure(A: WallRing) -> CheckReport:
    R, w = A.ring, A.w
    name = f"antistructure[{A.name}]"
    report = R.check()
    if not report.passed:
        return report.model_copy(update={"name": name})
    checked = report.checked
    if sorted(w) != list(R.elements):
        return CheckReport.failure(name, "w is not a bijection", checked, w=w)
    if w[R.one] != R.one:
        return CheckReport.failure(name, "w(1) differs from 1", checked, w_one=w[R.one])
    eps_inv = R.inverse(A.eps)
    if eps_inv is None:
        return CheckReport.failure(name, "eps is not a unit", checked, eps=A.eps)
    for a in R.elements:
        checked += 1
        if w[w[a]] != R.mul(R.mul(A.eps, a), eps_inv):
            return CheckReport.failure(name, "w^2 is not conjugation by eps", checked, element=a)
    for a, b in itertools.product(R.elements, repeat=2):
        checked += 1
        if w[R.add(a, b)] != R.add(w[a], w[b]):
            return CheckReport.failure(name, "w is not additive", checked, a=a, b=b)
        if w[R.mul(a, b)] != R.mul(w[b], w[a]):
            return CheckReport.failure(name, "w(ab) differs from w(b)w(a)", checked, a=a, b=b)
    details = {
        "order": R.order,
        "eps_fixed": A.eps_fixed,
        "eps_inverse_fixed": w[A.eps] == eps_inv,
    }
    logger.info("antistructure_validated", ring=A.name, **details)
    return CheckReport(name=name, checked=checked, details=details)


class WallBimodule:
    """
    An A-bimodule M on 0..n-1 with involution h.

    left[a][m] is a.m, right[m][a] is m.a; h(a.m) = h(m).w(a),
    h(m.a) = w(a).h(m) and h(h(m)) = eps.m.eps^-1.
    """

    def __init__(
        self,
        ring: WallRing,
        add: Table,
        left: Table,
        right: Table,
        h: Sequence[int],
        zero: int = 0,
        name: str = "M",
    ):
        self.ring = ring
        self.add_table = add
        self.left = left
        self.right = right
        self.h = list(h)
        self.zero = zero
        self.name = name
        n = len(add)
        self._neg = [next((b for b in range(n) if add[a][b] == zero), None) for a in range(n)]
        self._h_inv: Optional[List[int]] = None

    @classmethod
    def from_functions(
        cls,
        ring: WallRing,
        size: int,
        add: Callable[[int, int], int],
        left: Callable[[int, int], int],
        right: Callable[[int, int], int],
        h: Callable[[int], int],
        zero: int = 0,
        name: str = "M",
    ) -> "WallBimodule":
        check_bound("ENUMERATION_LIMIT", settings.ENUMERATION_LIMIT, size * max(size, ring.order))
        E, R = range(size), ring.ring.elements
        return cls(
            ring,
            [[add(m, n) for n in E] for m in E],
            [[left(a, m) for m in E] for a in R],
            [[right(m, a) for a in R] for m in E],
            [h(m) for m in E],
            zero,
            name,
        )

    @property
    def order(self) -> int:
        return len(self.add_table)

    @property
    def elements(self) -> range:
        return range(self.order)

    def add(self, m: int, n: int) -> int:
        return self.add_table[m][n]

    def neg(self, m: int) -> int:
        return self._neg[m]

    def act_left(self, a: int, m: int) -> int:
        return self.left[a][m]

    def act_right(self, m: int, a: int) -> int:
        return self.right[m][a]

    def h_inv(self, m: int) -> int:
        if self._h_inv is None:
            inv = [0] * self.order
            for x, y in enumerate(self.h):
                inv[y] = x
            self._h_inv = inv
        return self._h_inv[m]

    def validate(self) -> "WallBimodule":
        report = validate_bimodule(self)
        if not report.passed:
            raise ValidationError(report.counterexample.message, report.counterexample.location)
        return self

    def __repr__(self) -> str:
        return f"WallBimodule({self.name} over {self.ring.name}, order={self.order})"

    # Presets

    @classmethod
    def regular(cls, A: WallRing) -> "WallBimodule":
        R = A.ring
        return cls(
            A, R.add_table, R.mul_table, R.mul_table, A.w, R.zero, name=A.name
        )

    @classmethod
    def negated(cls, A: WallRing) -> "WallBimodule":
        """A over itself with h = -w."""
        R = A.ring
        return cls(
            A, R.add_table, R.mul_table, R.mul_table, [R.neg(A.w[a]) for a in R.elements], R.zero, name=f"-{A.name}"
        )

    @classmethod
    def zero_module(cls, A: WallRing) -> "WallBimodule":
        return cls(A, [[0]], [[0] for _ in A.ring.elements], [[0] * A.order], [0], 0, name="0")

    @classmethod
    def preset(cls, A: WallRing, name: str) -> "WallBimodule":
        if name == "regular":
            return cls.regular(A)
        if name == "neg":
            return cls.negated(A)
        if name == "zero":
            return cls.zero_module(A)
        raise ValidationError(f"unknown bimodule preset {name!r}", {"presets": BIMODULE_PRESETS})


BIMODULE_PRESETS = ["regular", "neg", "zero"]


def validate_bimodule(M: WallBimodule) -> CheckReport:
    A = M.ring
    R, w = A.ring, A.w
    name = f"bimodule[{M.name}]"
    eps_inv = A.eps_inv
    checked = 0
    E = M.elements
    if sorted(M.h) != list(E):
        return CheckReport.failure(name, "h is not a bijection", checked, h=M.h)
    for m in E:
        checked += 1
        if M.add(m, M.zero) != m or M.neg(m) is None:
            return CheckReport.failure(name, "M is not a group under add", checked, element=m)
        if M.act_left(R.one, m) != m or M.act_right(m, R.one) != m:
            return CheckReport.failure(name, "1 does not act trivially", checked, element=m)
        twice = M.act_right(M.act_left(A.eps, m), eps_inv)
        if M.h[M.h[m]] != twice:
            return CheckReport.failure(name, "h^2 is not conjugation by eps", checked, element=m)
    for m, n in itertools.product(E, repeat=2):
        checked += 1
        if M.add(m, n) != M.add(n, m):
            return CheckReport.failure(name, "addition is not commutative", checked, m=m, n=n)
        if M.h[M.add(m, n)] != M.add(M.h[m], M.h[n]):
            return CheckReport.failure(name, "h is not additive", checked, m=m, n=n)
        for a in R.elements:
            if M.act_left(a, M.add(m, n)) != M.add(M.act_left(a, m), M.act_left(a, n)):
                return CheckReport.failure(name, "left action is not additive", checked, a=a, m=m, n=n)
            if M.act_right(M.add(m, n), a) != M.add(M.act_right(m, a), M.act_right(n, a)):
                return CheckReport.failure(name, "right action is not additive", checked, a=a, m=m, n=n)
        for k in E:
            if M.add(M.add(m, n), k) != M.add(m, M.add(n, k)):
                return CheckReport.failure(name, "addition is not associative", checked, m=m, n=n, k=k)
    for a, b in itertools.product(R.elements, repeat=2):
        for m in E:
            checked += 1
            if M.act_left(R.add(a, b), m) != M.add(M.act_left(a, m), M.act_left(b, m)):
                return CheckReport.failure(name, "left action does not distribute", checked, a=a, b=b, m=m)
            if M.act_right(m, R.add(a, b)) != M.add(M.act_right(m, a), M.act_right(m, b)):
                return CheckReport.failure(name, "right action does not distribute", checked, a=a, b=b, m=m)
            if M.act_left(R.mul(a, b), m) != M.act_left(a, M.act_left(b, m)):
                return CheckReport.failure(name, "left action is not associative", checked, a=a, b=b, m=m)
            if M.act_right(m, R.mul(a, b)) != M.act_right(M.act_right(m, a), b):
                return CheckReport.failure(name, "right action is not associative", checked, a=a, b=b, m=m)
            if M.act_right(M.act_left(a, m), b) != M.act_left(a, M.act_right(m, b)):
                return CheckReport.failure(name, "left and right actions do not commute", checked, a=a, b=b, m=m)
    for a in R.elements:
        for m in E:
            checked += 1
            if M.h[M.act_left(a, m)] != M.act_right(M.h[m], w[a]):
                return CheckReport.failure(name, "h(a.m) differs from h(m).w(a)", checked, a=a, m=m)
            if M.h[M.act_right(m, a)] != M.act_left(w[a], M.h[m]):
                return CheckReport.failure(name, "h(m.a) differs from w(a).h(m)", checked, a=a, m=m)
    return CheckReport(name=name, checked=checked, details={"order": M.order})


# Square-zero extensions


def semidirect_ring(A: WallRing, M: WallBimodule) -> WallRing:
    """A x| M with (a, m)(b, n) = (ab, a.n + m.b), involution (w, h) and unit (eps, 0)."""
    R = A.ring
    k = M.order
    n = R.order * k
    check_bound("MAX_RING_ORDER", settings.MAX_RING_ORDER, n)

    def split(x):
        return divmod(x, k)

    def add(x, y):
        (a, m), (b, p) = split(x), split(y)
        return R.add(a, b) * k + M.add(m, p)

    def mul(x, y):
        (a, m), (b, p) = split(x), split(y)
        return R.mul(a, b) * k + M.add(M.act_left(a, p), M.act_right(m, b))

    E = range(n)
    ring = FiniteRing(
        [[add(x, y) for y in E] for x in E],
        [[mul(x, y) for y in E] for x in E],
        zero=R.zero * k + M.zero,
        one=R.one * k + M.zero,
        name=f"{A.name}x|{M.name}",
    )
    w = [A.w[x // k] * k + M.h[x % k] for x in E]
    AM = WallRing(ring, w, A.eps * k + M.zero, name=ring.name)
    AM.parts = (A, M)
    report = validate_antistructure(AM)
    if not report.passed:
        raise ValidationError(report.counterexample.message, report.counterexample.location)
    for m, p in itertools.product(M.elements, repeat=2):
        if ring.mul(R.zero * k + m, R.zero * k + p) != ring.zero:
            raise ValidationError("M.M is not zero in the semidirect product", {"m": m, "n": p})
    logger.info("semidirect_ring_built", ring=AM.name, order=n)
    return AM


def ring_isomorphism(R: FiniteRing, S: FiniteRing) -> Optional[List[int]]:
    """A bijection phi with phi(a + b) = phi(a) + phi(b) and phi(ab) = phi(a)phi(b), or None."""
    n = R.order
    if n != S.order:
        return None
    producers: Dict[int, List[Tuple[str, int, int]]] = {x: [] for x in R.elements}
    for a, b in itertools.product(R.elements, repeat=2):
        producers[R.add(a, b)].append(("add", a, b))
        producers[R.mul(a, b)].append(("mul", a, b))
    image: List[Optional[int]] = [None] * n
    used = set()

    def op(ring, kind, a, b):
        return ring.add(a, b) if kind == "add" else ring.mul(a, b)

    def consistent(x) -> bool:
        for u in R.elements:
            if image[u] is None:
                continue
            for kind in ("add", "mul"):
                for a, b in ((x, u), (u, x)):
                    c = op(R, kind, a, b)
                    if image[c] is not None and image[c] != op(S, kind, image[a], image[b]):
                        return False
        for kind, a, b in producers[x]:
            if image[a] is not None and image[b] is not None and image[x] != op(S, kind, image[a], image[b]):
                return False
        return True

    order = [R.zero, R.one] + [x for x in R.elements if x not in (R.zero, R.one)]
    fixed = {R.zero: S.zero, R.one: S.one}

    def search(i: int) -> bool:
        if i == n:
            return True
        x = order[i]
        candidates = [fixed[x]] if x in fixed else [y for y in S.elements if y not in used]
        for y in candidates:
            if y in used:
                continue
            image[x] = y
            used.add(y)
            if consistent(x) and search(i + 1):
                return True
            image[x] = None
            used.discard(y)
        return False

    if not search(0):
        return None
    return [int(y) for y in image]


# Free module categories


def zero_matrix(A: WallRing, rows: int, cols: int) -> Matrix:
    return tuple(tuple(A.ring.zero for _ in range(cols)) for _ in range(rows))


def scalar_matrix(A: WallRing, k: int, a: int) -> Matrix:
    R = A.ring
    return tuple(tuple(a if i == j else R.zero for j in range(k)) for i in range(k))


def matrix_product(A: WallRing, G: Matrix, F: Matrix, rows: int, inner: int, cols: int) -> Matrix:
    """G F for G rows x inner and F inner x cols."""
    R = A.ring
    return tuple(
        tuple(R.total(R.mul(G[i][s], F[s][j]) for s in range(inner)) for j in range(cols))
        for i in range(rows)
    )


def all_matrices(elements: Sequence[int], rows: int, cols: int) -> List[Matrix]:
    check_bound("ENUMERATION_LIMIT", settings.ENUMERATION_LIMIT, len(elements) ** (rows * cols))
    return [
        tuple(tuple(flat[i * cols:(i + 1) * cols]) for i in range(rows))
        for flat in itertools.product(elements, repeat=rows * cols)
    ]


class ModCatSkeleton:
    """
    Free right modules A^0..A^r with matrix arrows and the duality
    D(F) = w^-1(F)^T, eta_{A^k} = eps^-1 I.

    The standard basis of hom_A(A^k, A_s) identifies D(A^k) with A^k.
    """

    def __init__(self, A: WallRing, rank: int):
        check_bound("MAX_RANK", settings.MAX_RANK, rank)
        self.ring = A
        self.rank = rank
        R = A.ring
        self.category = FinCat(
            range(rank + 1),
            lambda k, l: all_matrices(list(R.elements), l, k),
            lambda g, f: matrix_product(A, g.data, f.data, g.tgt, f.tgt, f.src),
            lambda k: scalar_matrix(A, k, R.one),
            name=f"P({A.name})",
            add=lambda f, g: tuple(tuple(R.add(x, y) for x, y in zip(r, s)) for r, s in zip(f.data, g.data)),
            neg=lambda f: tuple(tuple(R.neg(x) for x in r) for r in f.data),
            zero=lambda k, l: zero_matrix(A, l, k),
        )
        D = Functor(
            self.category,
            self.category,
            lambda k: k,
            lambda f: Arrow(f.tgt, f.src, self.dual_matrix(f.data, f.tgt, f.src)),
            contravariant=True,
            name="D",
        )
        eta = None
        if A.eps != R.one:
            eta = lambda k: Arrow(k, k, scalar_matrix(A, k, A.eps_inv))  # noqa: E731
        self.duality = DualityData(D, eta)

    def dual_matrix(self, F: Matrix, rows: int, cols: int) -> Matrix:
        return tuple(tuple(self.ring.w_inv(F[i][j]) for i in range(rows)) for j in range(cols))

    def eta_evaluation(self, p: Sequence[int], lam: Sequence[int]) -> int:
        """eta(p)(lambda) = w(lambda(p)) eps for p in A^k and lambda given on the standard basis."""
        A = self.ring
        R = A.ring
        return R.mul(A.w[R.total(R.mul(lam[j], p[j]) for j in range(len(p)))], A.eps)

    def check(self) -> CheckReport:
        name = f"module_category[{self.category.name}]"
        report = self.category.check()
        if not report.passed:
            return report
        duality = self.duality.check()
        if not duality.passed:
            return duality
        return CheckReport(
            name=name,
            checked=report.checked + duality.checked,
            details={"rank": self.rank, "strict": self.duality.strict, "eps_fixed": self.ring.eps_fixed},
        )


def mod_cat_skeleton(A: WallRing, rank: int) -> ModCatSkeleton:
    skeleton = ModCatSkeleton(A, rank)
    logger.info("module_category_built", ring=A.name, rank=rank, strict=skeleton.duality.strict)
    return skeleton


def dual_tensor_map(M: WallBimodule, lam: Sequence[int], m: int) -> Tuple[int, ...]:
    """hom_A(A^k, A_s) (x) M -> hom_A(A^k, M_w) on a generator, in standard coordinates."""
    return tuple(M.act_left(a, m) for a in lam)


def check_dual_tensor_iso(M: WallBimodule, k: int) -> CheckReport:
    """The generator map is balanced, biadditive and its image spans M^k."""
    A = M.ring
    R = A.ring
    name = f"dual_tensor_iso[{M.name}, {k}]"
    checked = 0
    rows = list(itertools.product(R.elements, repeat=k))
    check_bound("ENUMERATION_LIMIT", settings.ENUMERATION_LIMIT, len(rows) * R.order * M.order)
    for lam in rows:
        for m in M.elements:
            image = dual_tensor_map(M, lam, m)
            for a in R.elements:
                checked += 1
                moved = tuple(R.mul(x, a) for x in lam)
                if dual_tensor_map(M, moved, m) != dual_tensor_map(M, lam, M.act_left(a, m)):
                    return CheckReport.failure(name, "map is not balanced", checked, lam=lam, a=a, m=m)
            for n in M.elements:
                summed = tuple(M.add(x, y) for x, y in zip(image, dual_tensor_map(M, lam, n)))
                if dual_tensor_map(M, lam, M.add(m, n)) != summed:
                    return CheckReport.failure(name, "map is not additive in M", checked, lam=lam, m=m, n=n)
    span = {tuple(M.zero for _ in range(k))}
    generators = [dual_tensor_map(M, tuple(R.one if i == j else R.zero for i in range(k)), m) for j in range(k) for m in M.elements]
    frontier = list(span)
    while frontier:
        v = frontier.pop()
        for g in generators:
            u = tuple(M.add(x, y) for x, y in zip(v, g))
            if u not in span:
                span.add(u)
                frontier.append(u)
    if len(span) != M.order ** k:
        return CheckReport.failure(name, "image does not span M^k", checked, spanned=len(span))
    return CheckReport(name=name, checked=checked, details={"spanned": len(span)})


# The bimodule H^M


def hm_bimodule(M: WallBimodule, skeleton: ModCatSkeleton) -> Bimodule:
    """
    H^M(A^c, A^d) = hom_A(A^c, A^d (x) M): d x c matrices over M, with
    push by left multiplication, pull by right multiplication and
    J(m) = h^-1(m)^T. Elements carry their shape: ((d, c), matrix).
    """
    A = skeleton.ring
    if A.order != M.ring.order:
        raise ValidationError("bimodule and skeleton are over different rings", {"ring": A.name, "bimodule": M.name})

    def push(f: Arrow, m: HMElement) -> HMElement:
        (_, c), mat = m
        F = f.data
        return (f.tgt, c), tuple(
            tuple(_m_total(M, (M.act_left(F[i][s], mat[s][j]) for s in range(f.src))) for j in range(c))
            for i in range(f.tgt)
        )

    def pull(g: Arrow, m: HMElement) -> HMElement:
        (d, _), mat = m
        G = g.data
        return (d, g.src), tuple(
            tuple(_m_total(M, (M.act_right(mat[i][s], G[s][j]) for s in range(g.tgt))) for j in range(g.src))
            for i in range(d)
        )

    def J(c, d, m: HMElement) -> HMElement:
        mat = m[1]
        return (c, d), tuple(tuple(M.h_inv(mat[i][j]) for i in range(d)) for j in range(c))

    return Bimodule(
        skeleton.category,
        lambda c, d: [((d, c), mat) for mat in all_matrices(list(M.elements), d, c)],
        lambda m, n: (m[0], tuple(tuple(M.add(x, y) for x, y in zip(r, s)) for r, s in zip(m[1], n[1]))),
        lambda c, d: ((d, c), tuple(tuple(M.zero for _ in range(c)) for _ in range(d))),
        push,
        pull,
        J,
        skeleton.duality,
        name=f"H^{M.name}",
    )


def _m_total(M: WallBimodule, values) -> int:
    out = M.zero
    for v in values:
        out = M.add(out, v)
    return out


def module_split_extension(A: WallRing, M: WallBimodule, rank: int) -> Tuple[Optional[Functor], CheckReport]:
    """
    Classify P(A x| M) over P(A) through reduction p and extension of
    scalars s; the dualities enter when both are strict.
    """
    AM = semidirect_ring(A, M)
    k = M.order
    base = mod_cat_skeleton(A, rank)
    total = mod_cat_skeleton(AM, rank)
    B, C = total.category, base.category
    p = Functor(
        B, C, lambda c: c,
        lambda f: Arrow(f.src, f.tgt, tuple(tuple(x // k for x in row) for row in f.data)),
        name="p",
    )
    s = Functor(
        C, B, lambda c: c,
        lambda f: Arrow(f.src, f.tgt, tuple(tuple(x * k + M.zero for x in row) for row in f.data)),
        name="s",
    )
    strict = base.duality.strict and total.duality.strict
    F, report = classify_split_extension(
        p, s, lambda c: C.identity(c),
        total.duality if strict else None,
        base.duality if strict else None,
    )
    if not report.passed:
        return F, report
    kernel = check_kernel_is_hm(M, base, total)
    if not kernel.passed:
        return F, kernel
    details = dict(report.details, duality_checked=strict, kernel_is_hm=True)
    return F, report.model_copy(update={"details": details, "checked": report.checked + kernel.checked})


def check_kernel_is_hm(M: WallBimodule, base: ModCatSkeleton, total: ModCatSkeleton) -> CheckReport:
    """ker p(c, d) corresponds entrywise to H^M(c, d), compatibly with push, pull and the dualities."""
    k = M.order
    R = base.ring.ring
    H = hm_bimodule(M, base)
    B, C = total.category, base.category
    name = "kernel_is_hm"
    checked = 0

    def to_hm(f: Arrow) -> HMElement:
        return (f.tgt, f.src), tuple(tuple(x % k for x in row) for row in f.data)

    def lift(f: Arrow) -> Arrow:
        return Arrow(f.src, f.tgt, tuple(tuple(x * k + M.zero for x in row) for row in f.data))

    for c in C.objects:
        for d in C.objects:
            kernel = [f for f in B.hom(c, d) if all(x // k == R.zero for row in f.data for x in row)]
            if sorted(to_hm(f) for f in kernel) != sorted(H.elements(c, d)):
                return CheckReport.failure(name, "kernel and H^M differ", checked, source=c, target=d)
            for f in kernel:
                m = to_hm(f)
                for e in C.objects:
                    for g in C.hom(d, e):
                        checked += 1
                        if to_hm(B.compose(lift(g), f)) != H.push(g, m):
                            return CheckReport.failure(name, "push differs", checked, arrow=g, element=m)
                    for g in C.hom(e, c):
                        checked += 1
                        if to_hm(B.compose(f, lift(g))) != H.pull(g, m):
                            return CheckReport.failure(name, "pull differs", checked, arrow=g, element=m)
                checked += 1
                if to_hm(total.duality(f)) != H.J(c, d, m):
                    return CheckReport.failure(name, "duality differs from J", checked, element=m)
    return CheckReport(name=name, checked=checked)


# Dold-Thom bimodules


class SumBimodule(WallBimodule):
    """A finite direct sum of copies of M, one per coordinate, stored in mixed radix."""

    coordinates: List[int] = []
    summand: Optional[WallBimodule] = None

    def decode(self, v: int) -> List[int]:
        return _decode(v, len(self.coordinates), self.summand.order)

    def encode(self, parts: Sequence[int]) -> int:
        return _encode(parts, self.summand.order)


def _decode(v: int, width: int, base: int) -> List[int]:
    out = []
    for _ in range(width):
        v, r = divmod(v, base)
        out.append(r)
    return out


def _encode(parts: Sequence[int], base: int) -> int:
    v = 0
    for r in reversed(parts):
        v = v * base + r
    return v


def bimodule_of_X(
    M: WallBimodule,
    X: Union[int, SimplicialSet],
    level: int = 0,
    involution: Optional[Sequence[int]] = None,
) -> SumBimodule:
    """
    M(X) = (+)_{x != *} M.x with the diagonal actions and h(m)_x = h(m_{wx}).

    X is a pointed set {0 = *, 1..n-1} with an optional involution, or a
    pointed Real simplicial set read at the given level; coordinates follow
    the non-base simplices in index order.
    """
    if isinstance(X, SimplicialSet):
        if not X.pointed:
            raise ValidationError("M(X) needs a pointed space", {"space": X.name})
        points = X.nonbase(level)
        flip = X.involution[level] if X.is_real else tuple(range(X.size(level)))
        name = f"{M.name}({X.name})_{level}"
    else:
        points = list(range(1, X))
        flip = tuple(involution) if involution is not None else tuple(range(X))
        name = f"{M.name}({X})"
    position = {x: i for i, x in enumerate(points)}
    width = len(points)
    size = M.order ** width

    def dec(v: int) -> List[int]:
        return _decode(v, width, M.order)

    def enc(parts: Sequence[int]) -> int:
        return _encode(parts, M.order)

    out = SumBimodule.from_functions(
        M.ring,
        size,
        lambda u, v: enc([M.add(x, y) for x, y in zip(dec(u), dec(v))]),
        lambda a, u: enc([M.act_left(a, x) for x in dec(u)]),
        lambda u, a: enc([M.act_right(x, a) for x in dec(u)]),
        lambda u: enc([M.h[dec(u)[position[flip[x]]]] for x in points]),
        zero=enc([M.zero] * width),
        name=name,
    )
    out.coordinates = points
    out.summand = M
    logger.debug("sum_bimodule_built", name=name, width=width, order=size)
    return out
