import pytest
from hypothesis import given, strategies as st
from pydantic import ValidationError as SchemaViolation

from reks.core.exceptions import ValidationError
from reks.equivariance import INF
from reks.homology import (
    ChainComplex,
    ChainMap,
    conn_map,
    connectivity,
    from_dod,
    homology,
    integer_invariants,
    mapping_cone,
    reduced_chains,
    smith_normal_form,
    zeros,
)
from reks.models.reports import HomologyGroup
from reks.sset import SimplicialMap, real_circle, sphere


def multiplication_complex(m: int) -> ChainComplex:
    """Z --m--> Z in degrees 1 -> 0, padded so H_1 is inside the window."""
    return ChainComplex(
        [1, 1, 0],
        [zeros(0, 1), from_dod({0: {0: m}}, (1, 1)), zeros(1, 0)],
        name=f"x{m}",
    )


class TestChainComplexes:
    def test_cokernel_is_torsion(self):
        report = homology(multiplication_complex(2))
        assert report.degree(0).torsion == [2]
        assert report.degree(0).label() == "Z/2"
        assert report.degree(1).is_zero()

    def test_field_coefficients(self):
        report = homology(multiplication_complex(2), field=2)
        assert report.coefficients == "GF(2)"
        assert report.degree(0).betti == 1
        assert report.degree(1).betti == 1
        assert homology(multiplication_complex(2), field=3).is_zero()

    def test_non_prime_field_is_rejected(self):
        with pytest.raises(ValidationError):
            homology(multiplication_complex(2), field=4)

    def test_wrong_boundary_shape(self):
        with pytest.raises(ValidationError):
            ChainComplex([1, 1], [zeros(0, 1), zeros(2, 1)])

    def test_d_squared_nonzero(self):
        C = ChainComplex(
            [1, 1, 1],
            [zeros(0, 1), from_dod({0: {0: 1}}, (1, 1)), from_dod({0: {0: 1}}, (1, 1))],
        )
        with pytest.raises(ValidationError):
            C.check()

    def test_torsion_chain_is_validated(self):
        with pytest.raises(SchemaViolation):
            HomologyGroup(degree=0, torsion=[3, 2])


class TestSmith:
    def test_invariant_factors_combine_coprime_parts(self):
        rank, torsion = integer_invariants(from_dod({0: {0: 2}, 1: {1: 3}}, (2, 2)))
        assert rank == 2
        assert torsion == [6]

    @given(st.lists(st.lists(st.integers(min_value=-9, max_value=9), min_size=3, max_size=3), min_size=2, max_size=3))
    def test_smith_diagonal_is_a_chain(self, rows):
        D, U, V = smith_normal_form(rows)
        diagonal = [int(D.to_list()[i][i]) for i in range(min(D.shape))]
        assert all(d >= 0 for d in diagonal)
        for a, b in zip(diagonal, diagonal[1:]):
            assert (a == 0 and b == 0) or (a != 0 and b % a == 0)


class TestSpaces:
    def test_sphere_homology(self):
        report = homology(reduced_chains(sphere(2, 4)))
        assert report.summary() == {"0": "0", "1": "0", "2": "Z", "3": "0"}

    def test_connectivity_of_zero_report(self):
        assert connectivity(homology(reduced_chains(sphere(3, 3)))) == INF

    def test_identity_map_is_infinitely_connected(self):
        S = real_circle(3)
        assert conn_map(SimplicialMap.identity(S)) == INF

    def test_collapse_map(self):
        S = sphere(2, 4)
        assert conn_map(SimplicialMap.to_point(S)) == 2

    def test_cone_of_chain_map(self):
        S = sphere(1, 3)
        f = ChainMap.of_simplicial_map(SimplicialMap.identity(S)).check()
        assert homology(mapping_cone(f)).is_zero()
