"""
Acceptance suites: every property is checked exactly on small inputs.

The randomized parts draw from seeded generators so a failing case can be
replayed from its parameter id. Run with ``pytest -m slow`` to include them.
"""
import itertools
import random

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from reks.doldthom import GAbelianGroup, verify_cofiber_sequence, verify_conn_preservation, verify_wedge_linearity
from reks.dualcat import (
    Bimodule,
    FinCat,
    canonical_inclusion,
    lemma_equivalence,
    strictify,
    swallow,
    swap_duality,
    trivial_duality,
)
from reks.equivariance import (
    AnalyticityCertificate,
    ConnFn,
    FiniteGroup,
    FiniteGSet,
    certificate_shift,
    excision_bound,
    named_gain,
    trace_bound,
    wedge_product_bound,
    wedge_to_product_conn,
)
from reks.homology import equivariant_conn, equivariant_space_conn, homology, reduced_chains
from reks.s21 import CoeffSystemLevel, kr_hr_levels, verify_splitPA
from reks.sset import (
    BASE,
    SimplicialMap,
    boundary,
    comparison_map,
    cone,
    discrete,
    edgewise_subdivide,
    fixed_points,
    indexed_wedge,
    random_real_simplicial_set,
    real_circle,
    real_sphere,
    rep_sphere,
    simplex,
    smash,
    sphere,
    suspension,
    wedge,
)
from reks.wall import WallBimodule, WallRing, mod_cat_skeleton


C2 = FiniteGroup.cyclic(2)
C1 = FiniteGroup.cyclic(1)

FINITE_COEFFICIENTS = ["Z2", "Z3", "Z4", "Z4neg", "Z2xZ2swap"]


def sign_circle(dim):
    """sd_e of the Real circle, truncated at `dim`."""
    return edgewise_subdivide(real_circle(2 * dim + 1))


SUSPENSION_LEAVES = {
    # leaf: (factory, underlying conn of its double suspension)
    "S0": (lambda dim: discrete(FiniteGSet.trivial(C2, 1), dim), 1),
    "C2+": (lambda dim: discrete(FiniteGSet.free(C2, 1), dim), 1),
    "S1": (lambda dim: sphere(1, dim, C2), 2),
    "S11": (sign_circle, 2),
}


def double_suspension(rng, dim=None):
    """S^2 ^ L for a random leaf L, truncated at `dim` or at 2 conn + 3."""
    leaf = rng.choice(sorted(SUSPENSION_LEAVES))
    factory, conn = SUSPENSION_LEAVES[leaf]
    top = dim if dim is not None else 2 * conn + 3
    X = smash(sphere(2, top, C2), factory(top))
    X.name = f"S2^{leaf}"
    return X


def c2_gsets():
    return {
        "1": FiniteGSet.trivial(C2, 1),
        "2": FiniteGSet.trivial(C2, 2),
        "C2": FiniteGSet.free(C2, 1),
        "C2+1": FiniteGSet.free(C2, 1).disjoint_union(FiniteGSet.trivial(C2, 1)),
    }


def first_summand(X, Y):
    W = wedge(X, Y)

    def fn(n, lab):
        x = X.index[n][lab]
        return BASE if X.is_base(n, x) else (0, x)

    return SimplicialMap.from_function(X, W, fn, "in_0")


@pytest.mark.slow
class TestDoldThomLinearity:
    @pytest.mark.parametrize("seed", range(25))
    def test_wedge_to_product_is_an_isomorphism(self, seed):
        rng = random.Random(seed)
        X = double_suspension(rng, 6)
        J = rng.choice(list(c2_gsets().values()))
        M = GAbelianGroup.preset(rng.choice(FINITE_COEFFICIENTS), C2)
        assert M.order <= 16
        report = verify_wedge_linearity(M, X, J, levels=5)
        assert report.passed, report.counterexample
        assert report.details["levels"] == 5
        assert report.checked > 0

    @pytest.mark.parametrize("seed", range(4))
    @pytest.mark.parametrize("coefficients", ["Z", "Z2", "Z4neg", "Zneg", "Z2xZ2swap"])
    def test_connectivity_is_preserved(self, seed, coefficients):
        X = double_suspension(random.Random(seed), 6)
        report = verify_conn_preservation(GAbelianGroup.preset(coefficients, C2), X)
        assert report.passed, report.counterexample
        assert report.details["measured"]["1"] != "inf"


def cofibrations():
    S1, S2 = sphere(1, 4, C2), sphere(2, 4, C2)
    return {
        "dD1": lambda: SimplicialMap.from_function(boundary(1, 4, True), simplex(1, 4, True), lambda n, x: x),
        "dD2": lambda: SimplicialMap.from_function(boundary(2, 4, True), simplex(2, 4, True), lambda n, x: x),
        "dD3": lambda: SimplicialMap.from_function(boundary(3, 4, True), simplex(3, 4, True), lambda n, x: x),
        "base_S1": lambda: SimplicialMap.from_point(S1),
        "base_S11": lambda: SimplicialMap.from_point(sign_circle(3)),
        "base_Srho": lambda: SimplicialMap.from_point(rep_sphere(FiniteGSet.free(C2, 1), 4)),
        "S1_in_S1vS2": lambda: first_summand(S1, S2),
        "S2_in_S2vS1": lambda: first_summand(S2, S1),
        "identity_S2": lambda: SimplicialMap.identity(S2),
        "cone_S1": lambda: cone(S1)[1],
    }


@pytest.mark.slow
@pytest.mark.parametrize("name", list(cofibrations()))
def test_cofiber_long_exact_sequence(name):
    f = cofibrations()[name]()
    M = GAbelianGroup.preset("Z", f.target.group)
    report = verify_cofiber_sequence(M, f, degrees=min(4, f.target.dim - 1))
    assert report.passed, report.counterexample


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_wedge_to_product_bound(seed):
    rng = random.Random(seed)
    X = double_suspension(rng)
    J = c2_gsets()[rng.choice(["2", "C2", "C2+1"] if X.dim == 5 else ["2", "C2"])]
    f = comparison_map(X, J).check()
    measured = equivariant_conn(f)
    conn_x = equivariant_space_conn(X)
    bound = wedge_product_bound(conn_x)
    assert measured.to_dict()["1"] != "inf"
    assert measured == wedge_to_product_conn(J, conn_x), (X.name, measured.to_dict())
    assert measured.dominates(bound), (measured.to_dict(), bound.to_dict())


@pytest.mark.slow
class TestCategories:
    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_swallowing_identities(self, k):
        C = FinCat.indiscrete(2)
        duality = swap_duality(C)
        _, report = swallow(duality, Bimodule.character(C, 2, duality=duality), k)
        assert report.passed, report.counterexample
        assert report.details["k"] == k

    @pytest.mark.parametrize("which", ["groupoid2", "bz3", "pf2"])
    def test_strict_replacement(self, which):
        if which == "groupoid2":
            duality = swap_duality(FinCat.indiscrete(2))
        elif which == "bz3":
            duality = trivial_duality(FinCat.from_group(FiniteGroup.cyclic(3)))
        else:
            duality = mod_cat_skeleton(WallRing.preset("F2"), 1).duality
        assert duality.strict
        DC, Ddual, _ = strictify(duality)
        replacement = lemma_equivalence(canonical_inclusion(duality, DC), duality, Ddual)
        report = replacement.check()
        assert report.passed, report.counterexample

    @pytest.mark.parametrize("p,bound", [(2, 1), (2, 2), (3, 1), (3, 2)])
    def test_split_extension_levelwise(self, p, bound):
        A = WallRing.preset("F2")
        report = verify_splitPA(A, WallBimodule.regular(A), p, bound)
        assert report.passed, report.counterexample
        assert report.details["duality_checked"] is True


class TestCertificates:
    def test_sign_sphere_shift(self):
        zero = ConnFn.constant(C2, 0)
        cert = certificate_shift(AnalyticityCertificate(zero, zero, zero), named_gain(C2, "S11"))
        assert cert.rho.values == (-1, 0)

    @hsettings(max_examples=100)
    @given(
        st.integers(min_value=1, max_value=4).flatmap(
            lambda n: st.tuples(
                st.just(n),
                st.lists(st.integers(min_value=-3, max_value=8), min_size=n + 1, max_size=n + 1),
                st.integers(min_value=-3, max_value=5),
            )
        )
    )
    def test_trivial_group_excision_is_classical(self, case):
        n, conns, c = case
        nu = excision_bound([ConnFn(C1, [e]) for e in conns], ConnFn(C1, [c]))
        # a strongly cocartesian (n+1)-cube is sum(conn) - (n+1)c cartesian
        assert nu.values == (sum(conns) - (n + 1) * c,)


def curated_trace_inputs():
    return {
        "S11": lambda: sign_circle(5),
        "S1": lambda: sphere(1, 5, C2),
        "S2": lambda: sphere(2, 5, C2),
        "Srho": lambda: rep_sphere(FiniteGSet.free(C2, 1), 5),
        "S1vS1_swapped": lambda: indexed_wedge(sphere(1, 5, C2), FiniteGSet.free(C2, 1)),
        "S1vS2": lambda: wedge(sphere(1, 5, C2), sphere(2, 5, C2)),
        "sd_S2": lambda: edgewise_subdivide(real_sphere(2, 11)),
    }


def trace_system():
    return CoeffSystemLevel(sphere(2, 9), GAbelianGroup.preset("Z", C2))


@pytest.mark.slow
@pytest.mark.parametrize("name", list(curated_trace_inputs()))
def test_trace_connectivity(name):
    X = curated_trace_inputs()[name]()
    levels, report = kr_hr_levels(trace_system(), X)
    assert report.passed, report.counterexample
    assert report.details["levels"] == len(levels) == 5
    assert report.details["realized"]["1"] != "inf"
    assert report.details["bound"] == trace_bound(equivariant_space_conn(X)).to_dict()


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(8))
def test_trace_connectivity_of_random_real_sets(seed):
    X = edgewise_subdivide(random_real_simplicial_set(random.Random(seed), 9))
    assert X.dim == 4
    _, report = kr_hr_levels(trace_system(), X)
    assert report.passed, report.counterexample
    assert report.details["levels"] == 5


class TestSubdivision:
    def test_fixed_points_of_sign_circle(self):
        F = fixed_points(sign_circle(2), C2.elements)
        h = homology(reduced_chains(F))
        assert h.degree(0).betti == 1
        assert h.degree(0).torsion == []
        assert h.degree(1).is_zero()

    def test_suspended_sign_circle_keeps_its_homology(self):
        X = sign_circle(3)
        assert homology(reduced_chains(suspension(X))).summary()["2"] == "Z"

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(15))
    def test_random_real_sets(self, seed):
        Z = random_real_simplicial_set(random.Random(seed), 11)
        sd = edgewise_subdivide(Z)
        assert reduced_chains(sd).window >= 5
        assert homology(reduced_chains(sd)).groups[:5] == homology(reduced_chains(Z)).groups[:5]
