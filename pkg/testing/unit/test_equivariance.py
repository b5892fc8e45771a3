from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from reks.core.exceptions import BoundError, GroupMismatchError, ValidationError
from reks.equivariance import (
    INF,
    AnalyticityCertificate,
    ConnFn,
    FiniteGroup,
    FiniteGSet,
    certificate_shift,
    excision_bound,
    gset_analysis,
    named_gain,
    preserves_connectivity,
    sphere_gain,
    trace_bound,
    wedge_bound,
    wedge_product_bound,
    wedge_to_product_conn,
)


finite = st.integers(min_value=-6, max_value=6)
extended = st.one_of(finite, st.just(INF))


class TestGroups:
    def test_s3_lattice_has_four_classes(self, s3):
        lattice = s3.lattice
        assert len(lattice.subgroups) == 6
        assert lattice.labels == ["1", "C2", "C3", "S3"]
        assert len(lattice.classes[1]) == 3

    def test_klein_labels_are_distinct(self):
        labels = FiniteGroup.preset("K4").lattice.labels
        assert labels == ["1", "C2a", "C2b", "C2c", "K4"]

    def test_cyclic_preset(self):
        C4 = FiniteGroup.preset("C4")
        assert C4.order == 4
        assert C4.lattice.labels == ["1", "C2", "C4"]

    def test_table_without_identity_is_rejected(self):
        with pytest.raises(ValidationError):
            FiniteGroup([[0, 1], [0, 1]])

    def test_unknown_preset(self):
        with pytest.raises(ValidationError):
            FiniteGroup.preset("Q8")

    def test_order_cap(self, monkeypatch):
        from reks.core.config import settings

        monkeypatch.setattr(settings, "MAX_GROUP_ORDER", 3)
        with pytest.raises(BoundError) as exc:
            FiniteGroup.cyclic(4)
        assert exc.value.setting == "MAX_GROUP_ORDER"


class TestGSets:
    def test_free_orbit(self, c2):
        J = FiniteGSet.free(c2, 1)
        assert J.size == 2
        assert J.orbits(frozenset(c2.elements)) == [[0, 1]]
        assert J.fixed(frozenset(c2.elements)) == []

    def test_cosets_of_a_transposition(self, s3):
        J = FiniteGSet.cosets(s3, {0, 1})
        assert J.size == 3
        info = gset_analysis(J, {0, 1})
        assert len(info.orbits) == 2
        assert len(info.fixed) == 1

    def test_bad_action_is_rejected(self, c2):
        with pytest.raises(ValidationError):
            FiniteGSet(c2, [[0, 1], [0, 0]])


class TestConnFn:
    def test_min_over_subgroups(self, c2):
        f = ConnFn(c2, [1, 0])
        assert f.subgroup_min().values == (1, 0)
        assert f.proper_min().values == (INF, 1)

    def test_value_checks(self, c2):
        with pytest.raises(ValidationError):
            ConnFn(c2, [1])
        with pytest.raises(ValidationError):
            ConnFn(c2, [0.5, 1])

    def test_group_mismatch(self, c2):
        with pytest.raises(GroupMismatchError):
            ConnFn(c2, [0, 0]) + ConnFn(FiniteGroup.cyclic(3), [0, 0])

    def test_labels_in_dict(self, c2):
        assert ConnFn(c2, [2, INF]).to_dict() == {"1": 2, "C2": "inf"}

    @given(st.lists(extended, min_size=2, max_size=2), st.lists(extended, min_size=2, max_size=2))
    def test_addition_commutes(self, a, b):
        C2 = FiniteGroup.cyclic(2)
        f, g = ConnFn(C2, a), ConnFn(C2, b)
        assert f + g == g + f
        assert f.minimum(f) == f

    @given(st.lists(extended, min_size=4, max_size=4))
    def test_subgroup_min_is_below(self, values):
        S3 = FiniteGroup.preset("S3")
        f = ConnFn(S3, values)
        assert f.dominates(f.subgroup_min())
        assert f.subgroup_min().subgroup_min() == f.subgroup_min()


class TestBounds:
    def test_wedge_product_bound(self, c2):
        assert wedge_product_bound(ConnFn(c2, [2, 3])).values == (3, 2)

    def test_wedge_to_product_by_orbit(self, c2):
        point = FiniteGSet.trivial(c2, 1)
        orbit = FiniteGSet.free(c2, 1)
        summand = ConnFn(c2, [1, 1])
        assert wedge_to_product_conn(point.disjoint_union(orbit), summand).values == (3, 1)
        assert wedge_to_product_conn(orbit, summand).values == (3, 1)
        assert wedge_to_product_conn(point, summand).values == (INF, INF)
        assert wedge_to_product_conn(FiniteGSet.trivial(c2, 2), ConnFn(c2, [2, 0])).values == (5, 1)

    def test_wedge_to_product_needs_one_group(self, c2):
        with pytest.raises(GroupMismatchError):
            wedge_to_product_conn(FiniteGSet.free(FiniteGroup.cyclic(3), 1), ConnFn(c2, [1, 1]))

    def test_wedge_bound_with_infinite_offset(self, c2):
        out = wedge_bound(ConnFn(c2, [1, 1]), ConnFn(c2, [0, INF]))
        assert out.values == (2, -INF)

    def test_trace_bound(self, c2):
        assert trace_bound(ConnFn(c2, [1, 0])).values == (3, 1)

    def test_trace_bound_needs_c2(self):
        with pytest.raises(ValidationError):
            trace_bound(ConnFn(FiniteGroup.cyclic(3), [1, 1]))

    def test_sphere_gains(self, c2):
        assert sphere_gain(FiniteGSet.free(c2, 1)).values == (2, 1)
        assert named_gain(c2, "S11").values == (1, 0)
        assert named_gain(c2, "rho") == sphere_gain(FiniteGSet.free(c2, 1))

    def test_certificate_shift_by_sign_circle(self, c2):
        zero = ConnFn.constant(c2, 0)
        cert = certificate_shift(AnalyticityCertificate(zero, zero, zero), named_gain(c2, "S11"))
        assert cert.rho.values == (-1, 0)

    def test_excision_condition_is_rational(self, c2):
        cert = AnalyticityCertificate(ConnFn.constant(c2, 0), ConnFn.constant(c2, 1), ConnFn.constant(c2, 0))
        c, kappa = cert.excision_condition(1)
        assert c.values == (Fraction(-1, 2), Fraction(-1, 2))
        assert kappa.values == (1, 1)

    @given(st.lists(finite, min_size=1, max_size=4), finite)
    def test_excision_matches_classical_formula(self, es, c):
        C1 = FiniteGroup.cyclic(1)
        out = excision_bound([ConnFn(C1, [e]) for e in es], ConnFn(C1, [c]))
        assert out.values == (sum(e - c for e in es),)

    @given(st.lists(finite, min_size=2, max_size=2), st.integers(min_value=0, max_value=3), finite)
    def test_excision_is_monotone(self, e, bump, c):
        C2 = FiniteGroup.cyclic(2)
        low = excision_bound([ConnFn(C2, e)], ConnFn.constant(C2, c))
        high = excision_bound([ConnFn(C2, [v + bump for v in e])], ConnFn.constant(C2, c))
        assert high.dominates(low)

    def test_preserves_connectivity(self, c2):
        assert preserves_connectivity(ConnFn(c2, [1, 1]), ConnFn(c2, [1, 2]))
        assert not preserves_connectivity(ConnFn(c2, [0, 0]), ConnFn(c2, [1, 2]))
