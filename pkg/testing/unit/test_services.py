import pytest

from reks.core.exceptions import SchemaError
from reks.models.inputs import GSetKind, RingSpec, RunInput, SpaceRecipe
from reks.services.preset_service import CATEGORY_PRESETS, SCENARIOS, PresetService
from reks.services.verification_service import VerificationService


@pytest.fixture
def presets():
    return PresetService(dim=3)


class TestPresets:
    @pytest.mark.parametrize("name", sorted(SCENARIOS))
    def test_scenarios_parse(self, presets, name):
        assert isinstance(presets.scenario(name), RunInput)

    def test_explicit_fields_win(self, presets):
        run = presets.resolve(RunInput(preset="s11", coefficients={"preset": "Z4neg"}))
        assert run.coefficients.preset == "Z4neg"
        assert run.space.op.value == "sd_e"
        assert run.group.preset == "C2"

    def test_free_gset(self, presets):
        run = presets.scenario("z4neg-s11-freeorbit")
        assert run.gset.kind == GSetKind.FREE
        J = presets.gset(run.gset, presets.group(run.group))
        assert J.size == 2

    def test_subdivision_needs_c2(self, presets):
        recipe = SpaceRecipe(op="sd_e", args=[{"op": "sphere", "k": 1}])
        with pytest.raises(SchemaError):
            presets.space(recipe, presets.group(RunInput(preset="c3-cosets").group))

    def test_subdivision_keeps_the_window(self, presets):
        run = presets.scenario("s11")
        X = presets.space(run.space, presets.group(run.group))
        assert X.dim == 3

    def test_wedge_needs_two_operands(self, presets):
        recipe = SpaceRecipe(op="wedge", args=[{"op": "sphere", "k": 1}])
        with pytest.raises(SchemaError):
            presets.space(recipe, presets.group(RunInput(preset="s11").group))

    @pytest.mark.parametrize("name", CATEGORY_PRESETS)
    def test_category_presets(self, presets, name):
        duality, M = presets.category(name)
        assert duality.check().passed
        assert M.check().passed
        assert duality.strict == (name != "pf3neg")

    def test_ring_from_tables(self, presets):
        spec = RingSpec(add=[[0, 1], [1, 0]], mul=[[0, 0], [0, 1]], w=[0, 1], eps=1, name="F2t")
        A = presets.ring(spec)
        assert A.name == "F2t"
        assert A.order == 2

    def test_ring_spec_is_exclusive(self):
        with pytest.raises(ValueError):
            RingSpec(preset="F2", w=[0, 1])


class TestVerificationService:
    def test_sym_on_a_sign_twist(self):
        report = VerificationService(dim=3).verify_sym(RunInput(parameters={"category": "pf3neg"}))
        assert report.passed, report.first_failure()
        assert report.results["strict"] is False

    def test_swallow_on_a_sign_twist(self):
        report = VerificationService(dim=3).verify_swallow(RunInput(parameters={"category": "pf3neg", "k": 0}))
        assert report.passed, report.first_failure()

    def test_bounds_from_parameters(self):
        run = RunInput(group={"preset": "C2"}, parameters={"p_conn": [1, 0], "v": [0, 0]})
        report = VerificationService(dim=3).bounds(run=run)
        assert report.results["wedge_product"] == {"1": 1, "C2": -1}
        assert report.results["wedge"] == {"1": 2, "C2": 0}

    def test_bounds_need_something(self):
        with pytest.raises(SchemaError):
            VerificationService(dim=3).bounds()
