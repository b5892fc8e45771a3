import pytest

from reks.core.exceptions import BoundError, ValidationError
from reks.doldthom import GAbelianGroup
from reks.equivariance import INF, ConnFn, FiniteGroup
from reks.s21 import (
    CatTwoP,
    CoeffSystemLevel,
    ModuleCategory,
    S21Level,
    SimplexCategory,
    admits,
    check_extension_routes,
    check_level_structure,
    check_oracle,
    kr_hr_levels,
    retractions,
    s21_enumerate,
    s21_objects,
    swallow_level,
    verify_splitPA,
)
from reks.sset import edgewise_subdivide, real_circle, sphere
from reks.wall import WallBimodule, WallRing, hm_bimodule, mod_cat_skeleton


@pytest.fixture
def f2():
    return WallRing.preset("F2")


@pytest.fixture
def mc(f2):
    return ModuleCategory(mod_cat_skeleton(f2, 1))


class TestPoset:
    def test_sizes(self):
        shape = CatTwoP(3)
        assert len(shape.thetas) == 20
        assert shape.injective == [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
        assert shape.check().passed

    def test_dual_reverses(self):
        assert CatTwoP(3).dual((0, 1, 3)) == (0, 2, 3)

    def test_path_raises_last_coordinate_first(self):
        path = CatTwoP(2).path((0, 0, 0), (1, 1, 1))
        assert path == [((0, 0, 0), (0, 0, 1)), ((0, 0, 1), (0, 1, 1)), ((0, 1, 1), (1, 1, 1))]

    def test_no_path_downwards(self):
        with pytest.raises(ValidationError):
            CatTwoP(2).path((1, 1, 1), (0, 0, 0))

    def test_degree_cap(self):
        with pytest.raises(BoundError):
            CatTwoP(5)

    def test_retractions(self):
        assert retractions(3) == [(1, 1), (1, 2), (2, 1)]
        assert admits((0, 1, 3), (1, 1))
        assert not admits((0, 2, 3), (1, 1))


class TestObjects:
    @pytest.mark.parametrize("p", [0, 1])
    def test_low_levels_are_zero(self, mc, p):
        objs = s21_objects(mc, p, 1)
        assert len(objs) == 1
        assert all(mc.is_zero(x) for x in objs[0].objects)

    def test_level_two_is_the_category(self, mc):
        assert len(s21_enumerate(mc, 2, 1)) == 2

    def test_level_three_matches_oracle(self, mc):
        assert len(s21_enumerate(mc, 3, 1)) == 5
        report = check_oracle(mc, 3, 1)
        assert report.passed, report.counterexample
        assert report.details["classes"] == 5

    def test_rank_cap(self, mc):
        with pytest.raises(BoundError):
            s21_enumerate(mc, 2, 3)

    def test_dual_and_faces(self, mc):
        assert check_level_structure(mc, 2, 1).passed

    def test_oracle_needs_free_skeleton(self):
        strictified = ModuleCategory(mod_cat_skeleton(WallRing.preset("F3neg"), 1))
        assert strictified.strictified
        with pytest.raises(ValidationError):
            S21Level(strictified, 2).oracle(1)


class TestExtensions:
    def test_extension_routes_agree(self, f2, mc):
        level = S21Level(mc, 2)
        H = hm_bimodule(WallBimodule.regular(f2), mc.skeleton)
        objs = level.objects(1)
        for X in objs:
            for Y in objs:
                assert check_extension_routes(level, H, X, Y).passed

    def test_split_levelwise(self, f2):
        report = verify_splitPA(f2, WallBimodule.regular(f2), 2, 1)
        assert report.passed, report.counterexample
        assert report.details["objects"] == 2
        assert report.details["duality_checked"] is True

    def test_swallow_on_a_level(self, f2):
        _, report = swallow_level(f2, WallBimodule.regular(f2), 2, 0)
        assert report.passed, report.counterexample


class TestTrace:
    def test_simplex_category(self):
        assert SimplexCategory(sphere(1, 2)).check().passed

    def test_coefficients_must_be_reduced(self, c2):
        system = CoeffSystemLevel(real_circle(3), GAbelianGroup.preset("Z", c2))
        assert not system.check().passed

    def test_summands_of_real_two_sphere(self, c2):
        system = CoeffSystemLevel(sphere(2, 5), GAbelianGroup.preset("Z", c2))
        whole = frozenset(c2.elements)
        assert system.summands(1).size == 3
        assert len(system.summands(1).fixed(whole)) == 1
        assert system.summands(2).size == 10
        assert len(system.summands(2).fixed(whole)) == 2

    def test_summands_stop_at_the_subdivided_top(self, c2):
        system = CoeffSystemLevel(sphere(2, 4), GAbelianGroup.preset("Z", c2))
        with pytest.raises(ValidationError):
            system.summands(2)

    def test_trace_levels(self, c2):
        system = CoeffSystemLevel(sphere(2, 5), GAbelianGroup.preset("Z", c2))
        X = edgewise_subdivide(real_circle(5))
        levels, report = kr_hr_levels(system, X)
        assert report.passed, report.counterexample
        assert [lv.summands for lv in levels] == [0, 3, 10]
        assert [(lv.fixed, lv.free_orbits) for lv in levels] == [(0, 0), (1, 1), (2, 4)]
        assert report.details["summand_conn"] == {"1": 0, "C2": -1}
        assert report.details["bound"] == {"1": 1, "C2": -1}
        assert levels[0].conn == ConnFn.constant(c2, INF)
        assert levels[1].conn == ConnFn(c2, [1, 0])
        assert levels[2].conn == ConnFn(c2, [1, -1])
        assert report.details["realized"] == {"1": 2, "C2": 0}

    def test_free_orbit_adds_the_underlying_connectivity(self, c2):
        # one fixed summand and one free orbit: nothing pairs up on fixed points
        system = CoeffSystemLevel(sphere(2, 3), GAbelianGroup.preset("Z", c2))
        levels, report = kr_hr_levels(system, sphere(2, 5, c2))
        assert report.passed, report.counterexample
        assert report.details["summand_conn"] == {"1": 1, "C2": 1}
        assert levels[1].conn == ConnFn(c2, [3, 1])

    def test_trace_builds_hr_levels(self, c2):
        system = CoeffSystemLevel(sphere(2, 3), GAbelianGroup.preset("Z", c2))
        levels, _ = kr_hr_levels(system, edgewise_subdivide(real_circle(3)), build_hr=True)
        assert levels[0].hr is not None

    def test_trace_rejects_plain_circle(self, c2):
        system = CoeffSystemLevel(real_circle(3), GAbelianGroup.preset("Z", c2))
        with pytest.raises(ValidationError):
            kr_hr_levels(system, sphere(2, 3, FiniteGroup.cyclic(2)))
