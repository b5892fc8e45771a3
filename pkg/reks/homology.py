"""
Exact integral homology of finite simplicial sets.

Chain complexes are stored as sparse integer matrices (sympy DomainMatrix
over ZZ). Ranks and torsion come from a unit-pivot elimination pass followed
by Smith normal form on whatever is left, so the arithmetic stays exact at
any entry size. Connectivity is measured homologically through mapping cones;
a complex built from a simplicial set truncated at D reports degrees < D.
"""

import sys
from typing import Dict, List, Optional, Sequence, Tuple, Union

import structlog
from sympy import factorint
from sympy.polys.domains import GF, QQ, ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import invariant_factors, smith_normal_decomp

from .core.exceptions import ValidationError
from .equivariance import INF, ConnFn
from .models.reports import HomologyGroup, HomologyReport
from .sset import SimplicialMap, SimplicialSet, fixed_points


logger = structlog.get_logger()

Conn = Union[int, float]


def zeros(rows: int, cols: int, domain=ZZ) -> DomainMatrix:
    return DomainMatrix.zeros((rows, cols), domain)


def from_dod(dod: Dict[int, Dict[int, int]], shape: Tuple[int, int]) -> DomainMatrix:
    """Sparse integer matrix from {row: {col: value}}, dropping zeros."""
    clean = {}
    for i, row in dod.items():
        kept = {j: ZZ(v) for j, v in row.items() if v}
        if kept:
            clean[i] = kept
    return DomainMatrix.from_dod(clean, shape, ZZ)


def _field_domain(field: Optional[int]):
    if field is None:
        return ZZ
    if field == 0:
        return QQ
    if field < 2 or len(factorint(field)) != 1 or factorint(field).get(field) != 1:
        raise ValidationError(f"GF({field}) is not a prime field")
    return GF(field)


def coefficient_label(field: Optional[int]) -> str:
    if field is None:
        return "Z"
    return "Q" if field == 0 else f"GF({field})"


class ChainComplex:
    """
    Free chain complex C_0..C_top over ZZ.

    boundaries[n] is the matrix of d_n: C_n -> C_{n-1}, of shape
    (ranks[n-1], ranks[n]); boundaries[0] has no rows. Homology is reported
    in degrees below top, where the truncation does not interfere.
    """

    def __init__(
        self,
        ranks: Sequence[int],
        boundaries: Sequence[DomainMatrix],
        name: str = "C",
        basis: Optional[List[List[int]]] = None,
    ):
        self.ranks = list(ranks)
        self.boundaries = list(boundaries)
        self.name = name
        self.basis = basis
        if len(self.boundaries) != len(self.ranks):
            raise ValidationError("one boundary matrix per degree is required")
        for n, d in enumerate(self.boundaries):
            expected = (self.ranks[n - 1] if n else 0, self.ranks[n])
            if d.shape != expected:
                raise ValidationError(
                    "boundary has the wrong shape",
                    {"degree": n, "shape": d.shape, "expected": expected},
                )

    @property
    def top(self) -> int:
        return len(self.ranks) - 1

    @property
    def window(self) -> int:
        return self.top

    def boundary(self, n: int) -> DomainMatrix:
        if 0 <= n <= self.top:
            return self.boundaries[n]
        rows = self.ranks[n - 1] if 0 < n <= self.top + 1 else 0
        cols = self.ranks[n] if 0 <= n <= self.top else 0
        return zeros(rows, cols)

    def check(self) -> "ChainComplex":
        for n in range(2, self.top + 1):
            d1, d2 = self.boundaries[n - 1], self.boundaries[n]
            if 0 in d1.shape or 0 in d2.shape:
                continue
            if not (d1 * d2).is_zero_matrix:
                raise ValidationError(
                    "boundary does not square to zero", {"complex": self.name, "degree": n}
                )
        return self

    def __repr__(self) -> str:
        return f"ChainComplex({self.name}, ranks={self.ranks})"


def reduced_chains(X: SimplicialSet) -> ChainComplex:
    """Normalized chains on nondegenerate simplices, basepoint collapsed."""
    basis = [
        [x for x in X.nondegenerate(n) if not X.is_base(n, x)] for n in range(X.dim + 1)
    ]
    position = [{x: k for k, x in enumerate(b)} for b in basis]
    boundaries = [zeros(0, len(basis[0]))]
    for n in range(1, X.dim + 1):
        dod: Dict[int, Dict[int, int]] = {}
        for k, x in enumerate(basis[n]):
            for i in range(n + 1):
                row = position[n - 1].get(X.face(n, i, x))
                if row is None:
                    continue
                entries = dod.setdefault(row, {})
                entries[k] = entries.get(k, 0) + (-1 if i % 2 else 1)
        boundaries.append(from_dod(dod, (len(basis[n - 1]), len(basis[n]))))
    return ChainComplex([len(b) for b in basis], boundaries, name=X.name, basis=basis)


# Ranks and torsion


def _invariant_chain(values: Sequence[int]) -> List[int]:
    """Invariant factors d_1 | d_2 | ... of the sum of Z/v over values."""
    powers: Dict[int, List[int]] = {}
    for v in values:
        for p, e in factorint(abs(int(v))).items():
            powers.setdefault(p, []).append(p**e)
    if not powers:
        return []
    length = max(len(ps) for ps in powers.values())
    chain = []
    for k in range(length):
        d = 1
        for ps in powers.values():
            ps_sorted = sorted(ps, reverse=True)
            if k < len(ps_sorted):
                d *= ps_sorted[k]
        chain.append(d)
    return sorted(chain)


def _eliminate_units(
    matrix: DomainMatrix,
) -> Tuple[int, Dict[int, Dict[int, int]], List[int]]:
    """Pivot on +-1 entries until none remain; returns (rank so far, residual rows, residual cols)."""
    rows = {i: {j: int(v) for j, v in r.items()} for i, r in matrix.to_dod().items()}
    cols: Dict[int, set] = {}
    for i, r in rows.items():
        for j in r:
            cols.setdefault(j, set()).add(i)
    rank = 0
    while True:
        best = None
        for i, r in rows.items():
            for j, v in r.items():
                if v in (1, -1):
                    cost = (len(r) - 1) * (len(cols[j]) - 1)
                    if best is None or cost < best[0]:
                        best = (cost, i, j)
                        if cost == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        _, p, q = best
        pivot_row = rows.pop(p)
        u = pivot_row[q]
        for i in list(cols[q]):
            if i == p:
                continue
            target = rows[i]
            factor = target[q] * u
            for j, v in pivot_row.items():
                new = target.get(j, 0) - factor * v
                if new:
                    if j not in target:
                        cols.setdefault(j, set()).add(i)
                    target[j] = new
                else:
                    target.pop(j, None)
                    cols[j].discard(i)
            if not target:
                del rows[i]
        for j in pivot_row:
            cols[j].discard(p)
        cols.pop(q, None)
        rank += 1
    live_cols = sorted(j for j, members in cols.items() if members)
    return rank, rows, live_cols


def integer_invariants(matrix: DomainMatrix) -> Tuple[int, List[int]]:
    """Rank of an integer matrix and its torsion coefficients (> 1)."""
    if 0 in matrix.shape:
        return 0, []
    rank, rows, live_cols = _eliminate_units(matrix)
    if not rows:
        return rank, []
    row_ids = sorted(rows)
    col_pos = {j: k for k, j in enumerate(live_cols)}
    dense = {
        a: {col_pos[j]: ZZ(v) for j, v in rows[i].items()} for a, i in enumerate(row_ids)
    }
    residual = DomainMatrix.from_dod(dense, (len(row_ids), len(live_cols)), ZZ)
    needed = 4 * min(residual.shape) + 200
    if sys.getrecursionlimit() < needed:
        sys.setrecursionlimit(needed)
    factors = [abs(int(d)) for d in invariant_factors(residual) if d]
    return rank + len(factors), _invariant_chain([d for d in factors if d > 1])


def field_rank(matrix: DomainMatrix, field: int) -> int:
    if 0 in matrix.shape:
        return 0
    return matrix.convert_to(_field_domain(field)).rank()


def smith_normal_form(A) -> Tuple[DomainMatrix, DomainMatrix, DomainMatrix]:
    """
    Smith normal form of an integer matrix.

    Args:
        A: nested lists of integers or a DomainMatrix over ZZ

    Returns:
        (D, U, V) with U * A * V == D, D diagonal with nonnegative entries
        each dividing the next, U and V unimodular.
    """
    if isinstance(A, DomainMatrix):
        M = A.convert_to(ZZ).to_dense()
    else:
        M = DomainMatrix.from_list([[ZZ(int(v)) for v in row] for row in A], ZZ)
    m, n = M.shape
    if m == 0 or n == 0:
        return M, DomainMatrix.eye(m, ZZ), DomainMatrix.eye(n, ZZ)
    D, U, V = smith_normal_decomp(M)
    d_rows, u_rows = D.to_list(), U.to_list()
    for i in range(min(m, n)):
        if d_rows[i][i] < 0:
            d_rows[i] = [-v for v in d_rows[i]]
            u_rows[i] = [-v for v in u_rows[i]]
    D = DomainMatrix.from_list(d_rows, ZZ)
    U = DomainMatrix.from_list(u_rows, ZZ)

    diagonal = [int(d_rows[i][i]) for i in range(min(m, n))]
    if (U * M * V).to_list() != D.to_list():
        raise ValidationError("Smith decomposition does not reproduce D", {"shape": (m, n)})
    for a, b in zip(diagonal, diagonal[1:]):
        if (a == 0 and b != 0) or (a and b % a):
            raise ValidationError("Smith diagonal is not a divisibility chain", {"diagonal": diagonal})
    return D, U, V


# Homology


def homology(C: ChainComplex, field: Optional[int] = None, check: bool = True) -> HomologyReport:
    """
    Homology of C in degrees 0..window-1.

    Args:
        C: chain complex with d^2 = 0
        field: None for integral homology, a prime p for GF(p), 0 for Q

    Returns:
        HomologyReport with betti ranks and torsion chains
    """
    if check:
        C.check()
    _field_domain(field)
    ranks = [0] * (C.top + 2)
    torsion: List[List[int]] = [[] for _ in range(C.top + 2)]
    for n in range(1, C.top + 1):
        if field is None:
            ranks[n], torsion[n] = integer_invariants(C.boundaries[n])
        else:
            ranks[n] = field_rank(C.boundaries[n], field)
    groups = []
    for n in range(C.window):
        groups.append(
            HomologyGroup(
                degree=n,
                betti=C.ranks[n] - ranks[n] - ranks[n + 1],
                torsion=torsion[n + 1],
            )
        )
    report = HomologyReport(groups=groups, window=C.window, coefficients=coefficient_label(field))
    logger.debug("homology_computed", complex=C.name, window=C.window, lowest=report.lowest_nonzero())
    return report


class ChainMap:
    """matrices[n] is f_n: A_n -> B_n of shape (B.ranks[n], A.ranks[n])."""

    def __init__(self, source: ChainComplex, target: ChainComplex, matrices: Sequence[DomainMatrix], name: str = "f"):
        self.source = source
        self.target = target
        self.matrices = list(matrices)
        self.name = name

    @property
    def top(self) -> int:
        return min(self.source.top, self.target.top, len(self.matrices) - 1)

    @classmethod
    def of_simplicial_map(
        cls,
        f: SimplicialMap,
        source: Optional[ChainComplex] = None,
        target: Optional[ChainComplex] = None,
    ) -> "ChainMap":
        A = source or reduced_chains(f.source)
        B = target or reduced_chains(f.target)
        position = [{y: k for k, y in enumerate(level)} for level in B.basis]
        matrices = []
        for n in range(A.top + 1):
            dod: Dict[int, Dict[int, int]] = {}
            for k, x in enumerate(A.basis[n]):
                row = position[n].get(f(n, x))
                if row is not None:
                    dod.setdefault(row, {})[k] = 1
            matrices.append(from_dod(dod, (B.ranks[n], A.ranks[n])))
        return cls(A, B, matrices, f.name)

    def check(self) -> "ChainMap":
        for n in range(1, self.top + 1):
            lhs_parts = (self.target.boundaries[n], self.matrices[n])
            rhs_parts = (self.matrices[n - 1], self.source.boundaries[n])
            if any(0 in m.shape for m in lhs_parts + rhs_parts):
                continue
            if not (lhs_parts[0] * lhs_parts[1] - rhs_parts[0] * rhs_parts[1]).is_zero_matrix:
                raise ValidationError("chain map does not commute with d", {"map": self.name, "degree": n})
        return self


def _place(dod: Dict[int, Dict[int, int]], block: DomainMatrix, row_off: int, col_off: int, sign: int = 1):
    for i, row in block.to_dod().items():
        target = dod.setdefault(row_off + i, {})
        for j, v in row.items():
            target[col_off + j] = target.get(col_off + j, 0) + sign * int(v)


def mapping_cone(f: ChainMap) -> ChainComplex:
    """Cone_n = B_n + A_{n-1}, d(b, a) = (d b + f a, -d a)."""
    A, B = f.source, f.target
    top = f.top
    ranks = [B.ranks[n] + (A.ranks[n - 1] if n else 0) for n in range(top + 1)]
    boundaries = [zeros(0, ranks[0])]
    for n in range(1, top + 1):
        dod: Dict[int, Dict[int, int]] = {}
        _place(dod, B.boundaries[n], 0, 0)
        _place(dod, f.matrices[n - 1], 0, B.ranks[n])
        if n >= 2:
            _place(dod, A.boundaries[n - 1], B.ranks[n - 1], B.ranks[n], sign=-1)
        boundaries.append(from_dod(dod, (ranks[n - 1], ranks[n])))
    return ChainComplex(ranks, boundaries, name=f"cone({f.name})")


def connectivity(report: HomologyReport) -> Conn:
    """Largest k with the report zero in degrees <= k; inf when zero throughout."""
    lowest = report.lowest_nonzero()
    if lowest is None:
        return INF
    return lowest - 1


def conn_map(f: Union[SimplicialMap, ChainMap], field: Optional[int] = None) -> Conn:
    """
    Homological connectivity of a pointed map: the largest nu with the reduced
    homology of its mapping cone zero in degrees <= nu. inf means zero
    through the whole window.
    """
    chain = f if isinstance(f, ChainMap) else ChainMap.of_simplicial_map(f)
    nu = connectivity(homology(mapping_cone(chain), field))
    if nu == INF:
        logger.debug("conn_window_limited", map=chain.name, window=chain.top)
    return nu


def space_conn(X: SimplicialSet, field: Optional[int] = None) -> Conn:
    """Largest k with reduced homology of X zero in degrees <= k."""
    if not X.pointed:
        raise ValidationError(f"{X.name} is not pointed")
    return connectivity(homology(reduced_chains(X), field))


def equivariant_conn(f: SimplicialMap) -> ConnFn:
    """conn_map of f^H for one representative H per conjugacy class."""
    group = f.source.group
    lattice = group.lattice
    values = [
        conn_map(f.fixed_points(lattice.representative(c))) for c in range(lattice.num_classes)
    ]
    logger.info("equivariant_conn_measured", map=f.name, group=group.name, values=values)
    return ConnFn(group, values)


def equivariant_space_conn(X: SimplicialSet) -> ConnFn:
    group = X.group
    lattice = group.lattice
    values = [
        space_conn(fixed_points(X, lattice.representative(c))) for c in range(lattice.num_classes)
    ]
    logger.info("equivariant_space_conn_measured", space=X.name, group=group.name, values=values)
    return ConnFn(group, values)


# Complexes of finitely generated groups


class PresentedComplex:
    """
    Levelwise quotient L/R of free complexes along an injective chain map
    R -> L. Its homology is that of the mapping cone of the inclusion.
    """

    def __init__(self, lattice: ChainComplex, relations: ChainComplex, inclusion: ChainMap, name: str = "L/R"):
        self.lattice = lattice
        self.relations = relations
        self.inclusion = inclusion
        self.name = name

    @property
    def window(self) -> int:
        return self.inclusion.top

    def check(self) -> "PresentedComplex":
        self.lattice.check()
        self.relations.check()
        self.inclusion.check()
        for n, m in enumerate(self.inclusion.matrices[: self.window + 1]):
            if 0 in m.shape:
                continue
            if m.convert_to(QQ).rank() != m.shape[1]:
                raise ValidationError("relations do not embed", {"complex": self.name, "degree": n})
        return self

    def homology(self, field: Optional[int] = None) -> HomologyReport:
        return homology(mapping_cone(self.inclusion), field)


def quotient_homology(lattice: ChainComplex, relations: ChainComplex, inclusion: ChainMap) -> HomologyReport:
    return PresentedComplex(lattice, relations, inclusion).check().homology()


def moore_homology(A, subgroup=None, field: Optional[int] = None) -> HomologyReport:
    """
    Homology of the normalized (Moore) complex of the H-fixed points of a
    simplicial abelian group. A supplies moore_complex(subgroup) returning a
    PresentedComplex.
    """
    return A.moore_complex(subgroup).homology(field)


def _kernel_columns(M: DomainMatrix, ncols: int, K) -> DomainMatrix:
    if ncols == 0:
        return zeros(0, 0, K)
    if M.shape[0] == 0 or M.is_zero_matrix:
        return DomainMatrix.eye(ncols, K).to_dense()
    return M.to_dense().nullspace().transpose().to_dense()


def induced_rank(
    f_n: DomainMatrix,
    d_source: DomainMatrix,
    d_target_next: DomainMatrix,
    field: int,
) -> int:
    """
    Rank of H_n(A; F) -> H_n(B; F) given f_n, d_n of A and d_{n+1} of B.

    Computed as dim(f(Z_n A) + B_n B) - dim(B_n B).
    """
    K = _field_domain(field)
    cycles = _kernel_columns(d_source.convert_to(K), f_n.shape[1], K)
    if 0 in cycles.shape or f_n.shape[0] == 0:
        return 0
    image = f_n.convert_to(K).to_dense() * cycles
    bounds = d_target_next.convert_to(K).to_dense()
    if bounds.shape[1] == 0:
        return image.rank()
    return image.hstack(bounds).rank() - bounds.rank()
