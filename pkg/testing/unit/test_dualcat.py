import pytest

from reks.core.exceptions import ValidationError
from reks.dualcat import (
    Arrow,
    Bimodule,
    DualityData,
    FinCat,
    Functor,
    canonical_inclusion,
    check_nerve_fixed_points,
    lemma_equivalence,
    strictify,
    swallow,
    swap_duality,
    sym,
    sym_equivalences,
    trivial_duality,
)
from reks.equivariance import FiniteGroup
from reks.wall import WallRing, mod_cat_skeleton


@pytest.fixture
def groupoid():
    C = FinCat.indiscrete(2)
    return C, swap_duality(C)


class TestCategories:
    def test_presets_satisfy_category_laws(self):
        assert FinCat.indiscrete(3).check().passed
        assert FinCat.from_group(FiniteGroup.preset("S3")).check().passed

    def test_inverse_in_a_group(self):
        C = FinCat.from_group(FiniteGroup.cyclic(3))
        f = C.hom("*", "*")[1]
        assert C.compose(C.invert(f), f) == C.identity("*")

    def test_core_of_a_module_category(self):
        skeleton = mod_cat_skeleton(WallRing.preset("F2"), 1)
        core = skeleton.category.core()
        assert len(core.hom(1, 1)) == 1
        assert len(core.hom(0, 1)) == 0

    def test_covariant_functor_is_not_a_duality(self, groupoid):
        C, _ = groupoid
        with pytest.raises(ValidationError):
            DualityData(Functor.identity(C))


class TestDualities:
    def test_swap_is_strict(self, groupoid):
        _, duality = groupoid
        report = duality.check()
        assert report.passed
        assert report.details["strict"] is True

    def test_trivial_duality_on_abelian_group(self):
        C = FinCat.from_group(FiniteGroup.cyclic(3))
        assert trivial_duality(C).check().passed

    def test_strictification_is_strict(self):
        skeleton = mod_cat_skeleton(WallRing.preset("F3neg"), 1)
        DC, Ddual, proj = strictify(skeleton.duality)
        assert Ddual.strict
        assert Ddual.check().passed
        assert proj.check().passed

    def test_sym_of_swap(self, groupoid):
        _, duality = groupoid
        assert len(sym(duality).objects) == 2

    def test_sym_needs_strict_duality(self):
        skeleton = mod_cat_skeleton(WallRing.preset("F3neg"), 1)
        with pytest.raises(ValidationError):
            sym(skeleton.duality)

    def test_sym_equivalences(self, groupoid):
        _, duality = groupoid
        assert sym_equivalences(duality).check().passed

    def test_strict_replacement(self):
        duality = mod_cat_skeleton(WallRing.preset("F2"), 1).duality
        DC, Ddual, _ = strictify(duality)
        F = canonical_inclusion(duality, DC)
        assert lemma_equivalence(F, duality, Ddual).check().passed

    def test_strict_replacement_after_strictifying(self):
        # a sign twist only becomes strict after one strictification
        duality = strictify(mod_cat_skeleton(WallRing.preset("F3neg"), 1).duality)[1]
        DC, Ddual, _ = strictify(duality)
        F = canonical_inclusion(duality, DC)
        assert lemma_equivalence(F, duality, Ddual).check().passed

    def test_nerve_fixed_points(self, groupoid):
        _, duality = groupoid
        report = check_nerve_fixed_points(duality, 2)
        assert report.passed
        assert report.details["fixed"] == report.details["sym"]


class TestBimodules:
    def test_character_bimodule(self, groupoid):
        C, duality = groupoid
        assert Bimodule.character(C, 2, duality=duality).check().passed

    def test_swallow_at_low_levels(self, groupoid):
        C, duality = groupoid
        M = Bimodule.character(C, 2, duality=duality)
        for k in (0, 1):
            _, report = swallow(duality, M, k)
            assert report.passed, report.counterexample
            assert report.details["k"] == k
            assert report.checked > 0

    def test_swallow_needs_strict_duality(self):
        skeleton = mod_cat_skeleton(WallRing.preset("F3neg"), 1)
        M = Bimodule.zero_module(skeleton.category, skeleton.duality)
        with pytest.raises(ValidationError):
            swallow(skeleton.duality, M, 0)

    def test_arrow_repr(self):
        assert repr(Arrow(0, 1, (0, 1))) == "(0, 1): 0 -> 1"
