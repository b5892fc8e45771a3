import random
from math import comb

import pytest
from hypothesis import given, strategies as st

from reks.core.exceptions import GroupMismatchError, ValidationError
from reks.equivariance import INF, FiniteGroup, FiniteGSet, wedge_product_bound, wedge_to_product_conn
from reks.homology import equivariant_conn, equivariant_space_conn, space_conn
from reks.sset import (
    SimplicialMap,
    boundary,
    cofiber,
    comparison_map,
    edgewise_subdivide,
    fixed_points,
    indexed_wedge,
    monotone_tuples,
    point,
    random_real_simplicial_set,
    real_circle,
    rep_sphere,
    simplex,
    smash,
    sphere,
    surjections,
    wedge,
)


class TestCombinatorics:
    def test_monotone_tuples(self):
        assert monotone_tuples(2, 1) == [(0, 0), (0, 1), (1, 1)]

    def test_surjections_count(self):
        assert len(surjections(4, 2)) == comb(4, 2)
        assert surjections(1, 1) == [(0, 1)]


class TestSpheres:
    def test_level_sizes(self):
        S = sphere(2, 4)
        assert [S.size(n) for n in range(5)] == [1 + comb(n, 2) for n in range(5)]

    def test_simplicial_identities(self):
        assert sphere(2, 4).check_identities().is_real

    def test_sign_circle_fixes_its_edge(self):
        S = real_circle(3)
        edge = S.nonbase(1)[0]
        assert S.involution[1][edge] == edge
        assert S.label(1, edge) == (0, 1)

    def test_connectivity(self):
        assert space_conn(sphere(2, 4)) == 1
        assert space_conn(point(3)) == INF

    def test_smash_adds_connectivity(self):
        assert space_conn(smash(sphere(1, 4), sphere(1, 4))) == 1

    def test_wedge_of_circles(self):
        from reks.homology import homology, reduced_chains

        report = homology(reduced_chains(wedge(sphere(1, 3), sphere(1, 3))))
        assert report.degree(1).betti == 2

    def test_cofiber_of_boundary_is_a_sphere(self):
        inclusion = SimplicialMap.from_function(
            boundary(2, 4, pointed=True), simplex(2, 4, pointed=True), lambda n, lab: lab, "i"
        )
        S, _ = cofiber(inclusion)
        assert space_conn(S) == 1


class TestEquivariant:
    def test_representation_sphere(self, c2):
        S = rep_sphere(FiniteGSet.free(c2, 1), 4)
        assert equivariant_space_conn(S).values == (1, 0)

    def test_edgewise_subdivided_sign_circle(self):
        X = edgewise_subdivide(real_circle(5))
        assert X.group == FiniteGroup.cyclic(2)
        assert X.check_identities().dim == 2
        assert equivariant_space_conn(X).values == (0, -1)

    def test_fixed_points_of_trivial_action(self, c2):
        X = sphere(1, 3, c2)
        assert space_conn(fixed_points(X, c2.elements)) == 0

    def test_subdivision_needs_involution(self):
        with pytest.raises(ValidationError):
            edgewise_subdivide(sphere(1, 3).without_involution())

    def test_indexing_group_must_match(self, c2):
        with pytest.raises(GroupMismatchError):
            indexed_wedge(sphere(1, 3, c2), FiniteGSet.free(FiniteGroup.cyclic(3), 1))

    def test_wedge_to_product_meets_bound(self, c2):
        X = sphere(1, 3, c2)
        f = comparison_map(X, FiniteGSet.free(c2, 1)).check()
        assert equivariant_conn(f).dominates(wedge_product_bound(equivariant_space_conn(X)))

    @pytest.mark.parametrize("indexing", ["C2", "C2+1", "2"])
    @pytest.mark.parametrize("space", ["trivial S2", "sign circle"])
    def test_wedge_to_product_is_measured_exactly(self, c2, space, indexing):
        Y = sphere(2, 5, c2) if space == "trivial S2" else edgewise_subdivide(real_circle(13))
        J = {
            "C2": FiniteGSet.free(c2, 1),
            "C2+1": FiniteGSet.trivial(c2, 1).disjoint_union(FiniteGSet.free(c2, 1)),
            "2": FiniteGSet.trivial(c2, 2),
        }[indexing]
        measured = equivariant_conn(comparison_map(Y, J))
        assert measured == wedge_to_product_conn(J, equivariant_space_conn(Y))


@given(st.integers(min_value=0, max_value=10_000))
def test_random_real_sets_satisfy_identities(seed):
    Z = random_real_simplicial_set(random.Random(seed), 3)
    assert Z.check_identities().is_real
