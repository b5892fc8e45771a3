import pytest

from reks.core.exceptions import BoundError, ValidationError
from reks.wall import (
    RING_PRESETS,
    FiniteRing,
    WallBimodule,
    WallRing,
    bimodule_of_X,
    check_dual_tensor_iso,
    hm_bimodule,
    mod_cat_skeleton,
    module_split_extension,
    ring_isomorphism,
    semidirect_ring,
    validate_antistructure,
    validate_bimodule,
)


class TestRings:
    @pytest.mark.parametrize("name", RING_PRESETS)
    def test_presets_are_antistructures(self, name):
        report = validate_antistructure(WallRing.preset(name))
        assert report.passed, report.counterexample

    def test_sign_twist_is_fixed_by_w(self):
        A = WallRing.preset("F3neg")
        assert A.eps == 2
        assert A.eps_fixed
        assert A.eps_inv == 2

    def test_w_must_fix_one(self):
        R = FiniteRing.zmod(3)
        with pytest.raises(ValidationError):
            WallRing(R, [0, 2, 1], R.one).validate()

    def test_identity_is_not_anti_on_matrices(self):
        R = FiniteRing.matrices_f2()
        report = validate_antistructure(WallRing(R, list(R.elements), R.one))
        assert not report.passed
        assert "w(ab)" in report.counterexample.message

    def test_unknown_preset(self):
        with pytest.raises(ValidationError):
            WallRing.preset("F5")

    def test_ring_order_cap(self, monkeypatch):
        from reks.core.config import settings

        monkeypatch.setattr(settings, "MAX_RING_ORDER", 3)
        with pytest.raises(BoundError):
            FiniteRing.zmod(4)


class TestBimodules:
    @pytest.mark.parametrize("ring", ["F2", "F3neg", "M2F2"])
    @pytest.mark.parametrize("kind", ["regular", "neg", "zero"])
    def test_presets_validate(self, ring, kind):
        M = WallBimodule.preset(WallRing.preset(ring), kind)
        assert validate_bimodule(M).passed

    def test_sum_over_a_pointed_set_with_involution(self):
        A = WallRing.preset("F3")
        M = bimodule_of_X(WallBimodule.regular(A), 3, involution=[0, 2, 1])
        assert M.order == 9
        assert M.validate() is M

    def test_dual_tensor_iso(self):
        assert check_dual_tensor_iso(WallBimodule.regular(WallRing.preset("F2")), 2).passed


class TestSemidirect:
    def test_f2_over_itself_is_dual_numbers(self):
        A = WallRing.preset("F2")
        AM = semidirect_ring(A, WallBimodule.regular(A))
        assert AM.order == 4
        assert AM.parts[0] is A
        assert ring_isomorphism(AM.ring, FiniteRing.dual_numbers()) is not None

    def test_too_large(self):
        A = WallRing.preset("M2F2")
        with pytest.raises(BoundError):
            semidirect_ring(A, WallBimodule.regular(A))


class TestModuleCategories:
    def test_skeleton_is_strict_for_unit_eps(self):
        skeleton = mod_cat_skeleton(WallRing.preset("F2"), 1)
        report = skeleton.check()
        assert report.passed
        assert report.details["strict"] is True

    def test_sign_twist_gives_eta(self):
        skeleton = mod_cat_skeleton(WallRing.preset("F3neg"), 1)
        assert not skeleton.duality.strict
        assert skeleton.check().passed

    def test_rank_cap(self):
        with pytest.raises(BoundError):
            mod_cat_skeleton(WallRing.preset("F2"), 3)

    def test_hm_bimodule_laws(self):
        A = WallRing.preset("F2")
        skeleton = mod_cat_skeleton(A, 1)
        H = hm_bimodule(WallBimodule.regular(A), skeleton)
        assert len(H.elements(1, 1)) == 2
        assert H.check().passed

    def test_split_extension(self):
        A = WallRing.preset("F2")
        F, report = module_split_extension(A, WallBimodule.regular(A), 1)
        assert report.passed, report.counterexample
        assert report.details["duality_checked"] is True
        assert report.details["kernel_is_hm"] is True
        assert F is not None

    def test_split_extension_with_sign_twist(self):
        A = WallRing.preset("F3neg")
        _, report = module_split_extension(A, WallBimodule.regular(A), 1)
        assert report.passed, report.counterexample
        assert report.details["duality_checked"] is False
