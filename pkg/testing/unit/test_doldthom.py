import pytest

from reks.core.exceptions import GroupMismatchError, ValidationError
from reks.doldthom import (
    GAbelianGroup,
    bredon,
    dold_thom,
    dt_fixed,
    moore_homology,
    transfer,
    verify_bredon_routes,
    verify_cofiber_sequence,
    verify_conn_preservation,
    verify_wedge_linearity,
)
from reks.equivariance import FiniteGroup, FiniteGSet
from reks.sset import (
    BASE,
    SimplicialMap,
    boundary,
    discrete,
    edgewise_subdivide,
    indexed_wedge,
    point,
    real_circle,
    rep_sphere,
    simplex,
    sphere,
    wedge,
)


@pytest.fixture
def sign_circle():
    return edgewise_subdivide(real_circle(5))


class TestCoefficients:
    def test_presets_validate(self, c2):
        for name in ("Z", "Z2", "Z4neg", "Zneg", "Z2xZ2swap"):
            assert GAbelianGroup.preset(name, c2).group == c2

    def test_unknown_preset(self, c2):
        with pytest.raises(ValidationError):
            GAbelianGroup.preset("Q", c2)

    def test_non_involutive_action_is_rejected(self, c2):
        with pytest.raises(ValidationError):
            GAbelianGroup(c2, [5], [[[1]], [[2]]])

    def test_unit_order_is_rejected(self, c2):
        with pytest.raises(ValidationError):
            GAbelianGroup(c2, [1])

    def test_fixed_subgroup_of_negation(self, c2):
        M = GAbelianGroup.preset("Z4neg", c2)
        assert M.fixed_subgroup(c2.elements) == [(0,), (2,)]


class TestConstruction:
    def test_group_mismatch(self, c2):
        with pytest.raises(GroupMismatchError):
            dold_thom(GAbelianGroup.preset("Z", FiniteGroup.cyclic(3)), sphere(1, 3, c2))

    def test_zero_sphere_gives_constant_group(self):
        C1 = FiniteGroup.cyclic(1)
        dt = dold_thom(GAbelianGroup.preset("Z3", C1), discrete(FiniteGSet.trivial(C1, 1), 3))
        assert [len(dt.generators(n)) for n in range(4)] == [1, 1, 1, 1]

    def test_fold_map_adds_labels(self):
        C1 = FiniteGroup.cyclic(1)
        S = sphere(1, 2)
        fold = SimplicialMap.from_function(
            wedge(S, S), S, lambda n, lab: lab if lab == BASE else S.labels[n][lab[1]], "fold"
        ).check()
        a, b = fold.source.nonbase(1)
        pushed = transfer(fold, GAbelianGroup.preset("Z", C1), 1, {a: (1,), b: (2,)})
        assert pushed == {S.nonbase(1)[0]: (3,)}

    def test_fixed_levels_of_free_orbit(self, c2):
        X = indexed_wedge(sphere(1, 3, c2), FiniteGSet.free(c2, 1))
        fixed = dt_fixed(GAbelianGroup.preset("Z4neg", c2), X, c2.elements)
        assert len(fixed.levels[1]) == 1
        assert fixed.levels[1][0].stabilizer == frozenset({c2.identity})
        assert fixed.verify().passed


class TestBredon:
    def test_sphere_with_integer_coefficients(self, c2):
        report = bredon(GAbelianGroup.preset("Z", c2), sphere(2, 4, c2))
        assert [s.subgroup for s in report.subgroups] == ["1", "C2"]
        assert all(s.report.degree(2).betti == 1 for s in report.subgroups)

    def test_point_is_zero(self, c2):
        report = bredon(GAbelianGroup.preset("Z", c2), point(3, c2))
        assert all(s.report.is_zero() for s in report.subgroups)

    def test_sign_circle_routes_agree(self, c2, sign_circle):
        M = GAbelianGroup.preset("Z", c2)
        assert verify_bredon_routes(M, sign_circle).passed
        # the swapped pair of edges bounds twice the fixed vertex
        fixed = moore_homology(dold_thom(M, sign_circle), "C2")
        assert fixed.degree(0).torsion == [2]
        assert fixed.degree(1).is_zero()


class TestVerifications:
    def test_wedge_linearity(self, c2, sign_circle):
        report = verify_wedge_linearity(
            GAbelianGroup.preset("Z4neg", c2), sign_circle, FiniteGSet.free(c2, 1)
        )
        assert report.passed
        assert report.details["J"] == 2

    def test_conn_preservation(self, c2):
        S = rep_sphere(FiniteGSet.free(c2, 1), 4)
        assert verify_conn_preservation(GAbelianGroup.preset("Z", c2), S).passed

    def test_cofiber_sequence_of_boundary_inclusion(self):
        inclusion = SimplicialMap.from_function(
            boundary(2, 4, pointed=True), simplex(2, 4, pointed=True), lambda n, lab: lab, "i"
        )
        M = GAbelianGroup.preset("Z", FiniteGroup.cyclic(1))
        assert verify_cofiber_sequence(M, inclusion, degrees=3).passed
