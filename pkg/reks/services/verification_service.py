from typing import Any, Dict, List, Optional, Sequence

import structlog

from ..core.config import settings
from ..core.exceptions import SchemaError
from ..core.version import get_app_version
from ..doldthom import bredon, verify_bredon_routes, verify_conn_preservation, verify_wedge_linearity
from ..dualcat import (
    canonical_inclusion,
    check_nerve_fixed_points,
    lemma_equivalence,
    strictify,
    strictify_bimodule,
    swallow,
    sym_equivalences,
)
from ..equivariance import (
    AnalyticityCertificate,
    ConnFn,
    FiniteGroup,
    certificate_shift,
    excision_bound,
    named_gain,
    wedge_bound,
    wedge_product_bound,
)
from ..homology import equivariant_conn, equivariant_space_conn
from ..models.inputs import MapKind, RunInput, WallSpec
from ..models.reports import CheckReport, RunReport
from ..s21 import (
    CoeffSystemLevel,
    ModuleCategory,
    S21Level,
    check_level_structure,
    check_oracle,
    kr_hr_levels,
    s21_enumerate,
    verify_splitPA,
)
from ..sset import SimplicialMap, comparison_map, sphere
from ..wall import (
    check_dual_tensor_iso,
    mod_cat_skeleton,
    module_split_extension,
    validate_antistructure,
    validate_bimodule,
)
from .preset_service import PresetService


logger = structlog.get_logger()


# Named analyticity certificates over C2: (rho, q, v)
CERTIFICATES: Dict[str, Dict[str, List[int]]] = {
    "rho0": {"rho": [0, 0], "q": [0, 0], "v": [0, 0]},
}


class VerificationService:
    """One method per CLI command; every method returns a RunReport."""

    def __init__(self, dim: Optional[int] = None, seed: Optional[int] = None):
        self.dim = dim if dim is not None else settings.MAX_DIM
        self.seed = seed if seed is not None else settings.SEED
        self.presets = PresetService(self.dim)

    def _report(self, command: str, checks: Sequence[CheckReport] = (), **results: Any) -> RunReport:
        report = RunReport(
            command=command,
            version=get_app_version(),
            seed=self.seed,
            dim=self.dim,
            checks=list(checks),
            results=results,
        )
        logger.info("run_completed", command=command, passed=report.passed, checks=len(report.checks))
        return report

    # Inputs

    def _space_inputs(self, run: RunInput):
        run = self.presets.resolve(run)
        if run.space is None:
            raise SchemaError("this command needs a space")
        group = self.presets.group(run.group)
        X = self.presets.space(run.space, group)
        return run, group, X

    def _gset(self, run: RunInput, group: FiniteGroup):
        if run.gset is None:
            raise SchemaError("this command needs an indexing gset")
        return self.presets.gset(run.gset, group)

    def _wall(self, run: RunInput):
        run = self.presets.resolve(run)
        spec = run.wall or WallSpec()
        A = self.presets.ring(spec.ring)
        M = self.presets.bimodule(A, spec.bimodule)
        return spec, A, M

    # Connectivity

    def conn(self, run: RunInput) -> RunReport:
        run, group, X = self._space_inputs(run)
        if run.map == MapKind.COLLAPSE:
            f = SimplicialMap.to_point(X)
        elif run.map == MapKind.BASEPOINT:
            f = SimplicialMap.from_point(X)
        else:
            f = comparison_map(X, self._gset(run, group))
        measured = equivariant_conn(f)
        results: Dict[str, Any] = {"space": X.name, "map": f.name, "conn": measured.to_dict()}
        checks = []
        if run.map == MapKind.WEDGE_TO_PRODUCT:
            bound = wedge_product_bound(equivariant_space_conn(X))
            results["bound"] = bound.to_dict()
            if measured.dominates(bound):
                checks.append(CheckReport(name="wedge_product_conn", checked=len(measured.values), details=results))
            else:
                checks.append(
                    CheckReport.failure(
                        "wedge_product_conn", "measured connectivity below the bound", len(measured.values),
                        measured=measured.to_dict(), bound=bound.to_dict(),
                    )
                )
        return self._report("conn", checks, **results)

    def bredon(self, run: RunInput) -> RunReport:
        run, group, X = self._space_inputs(run)
        M = self.presets.coefficients(run.coefficients, group)
        table = bredon(M, X)
        return self._report("bredon", [verify_bredon_routes(M, X)], bredon=table.model_dump())

    def bounds(
        self,
        cert: Optional[str] = None,
        smash: Sequence[str] = (),
        run: Optional[RunInput] = None,
    ) -> RunReport:
        """Certificate shifts and the excision and wedge calculators."""
        results: Dict[str, Any] = {}
        parameters = run.parameters if run is not None else {}
        group = self.presets.group(run.group) if run is not None else FiniteGroup.cyclic(2)
        if cert is not None:
            if cert not in CERTIFICATES:
                raise SchemaError(f"unknown certificate {cert!r}; known: {', '.join(CERTIFICATES)}")
            data = CERTIFICATES[cert]
            C2 = FiniteGroup.cyclic(2)
            certificate = AnalyticityCertificate(*(ConnFn(C2, data[k]) for k in ("rho", "q", "v")))
            for name in smash:
                certificate = certificate_shift(certificate, named_gain(C2, name))
            c, kappa = certificate.excision_condition(1)
            results["certificate"] = {
                "rho": certificate.rho.to_dict(),
                "excision": {"c": c.to_dict(), "kappa": kappa.to_dict()},
                "wedge": {"v": certificate.v.to_dict(), "kappa": certificate.wedge_condition()[1].to_dict()},
            }
        if "e_conns" in parameters and "c" in parameters:
            e_conns = [ConnFn(group, e) for e in parameters["e_conns"]]
            results["excision"] = excision_bound(e_conns, ConnFn(group, parameters["c"])).to_dict()
        if "p_conn" in parameters:
            p_conn = ConnFn(group, parameters["p_conn"])
            results["wedge_product"] = wedge_product_bound(p_conn).to_dict()
            if "v" in parameters:
                results["wedge"] = wedge_bound(p_conn, ConnFn(group, parameters["v"])).to_dict()
        if not results:
            raise SchemaError("bounds needs --cert or bound parameters in the input")
        return self._report("bounds", **results)

    # Dold-Thom

    def verify_dt_linearity(self, run: RunInput) -> RunReport:
        run, group, X = self._space_inputs(run)
        M = self.presets.coefficients(run.coefficients, group)
        J = self._gset(run, group)
        levels = min(self.dim, X.dim)
        return self._report("verify dt-linearity", [verify_wedge_linearity(M, X, J, levels)], space=X.name)

    def verify_dt_conn(self, run: RunInput) -> RunReport:
        run, group, X = self._space_inputs(run)
        M = self.presets.coefficients(run.coefficients, group)
        return self._report("verify dt-conn", [verify_conn_preservation(M, X)], space=X.name)

    # Categories with duality

    def _category(self, run: RunInput):
        run = self.presets.resolve(run)
        name = run.parameters.get("category")
        if name is None:
            raise SchemaError("this command needs parameters.category")
        duality, M = self.presets.category(name)
        return run, duality, M

    def verify_swallow(self, run: RunInput) -> RunReport:
        run, duality, M = self._category(run)
        k = int(run.parameters.get("k", 1))
        q = int(run.parameters.get("q", 0))
        sample = run.parameters.get("sample")
        if not duality.strict:
            DC, Ddual, _ = strictify(duality)
            M = strictify_bimodule(M, duality, DC, Ddual)
            duality = Ddual
        _, report = swallow(duality, M, k, q=q, sample=sample)
        return self._report("verify swallow", [report], category=duality.category.name, k=k, q=q)

    def verify_sym(self, run: RunInput) -> RunReport:
        run, duality, _ = self._category(run)
        # sym and the canonical inclusion need a strict duality
        strict = duality if duality.strict else strictify(duality)[1]
        DC, Ddual, _ = strictify(strict)
        replacement = lemma_equivalence(canonical_inclusion(strict, DC), strict, Ddual)
        checks = [sym_equivalences(strict).check(), replacement.check()]
        degrees = run.parameters.get("nerve_degrees")
        if degrees is not None:
            checks.append(check_nerve_fixed_points(strict, int(degrees)))
        return self._report("verify sym", checks, category=duality.category.name, strict=duality.strict)

    # Wall antistructures and S^{2,1}

    def verify_split_ext(self, run: RunInput) -> RunReport:
        spec, A, M = self._wall(run)
        _, split = module_split_extension(A, M, spec.rank)
        checks = [validate_antistructure(A), validate_bimodule(M), check_dual_tensor_iso(M, spec.rank), split]
        return self._report("verify split-ext", checks, ring=A.name, bimodule=M.name, rank=spec.rank)

    def verify_split_pa(self, run: RunInput, command: str = "verify split-pa") -> RunReport:
        spec, A, M = self._wall(run)
        report = verify_splitPA(A, M, spec.p, spec.rank)
        return self._report(command, [report], ring=A.name, bimodule=M.name, p=spec.p, rank=spec.rank)

    def s21_enumerate(self, run: RunInput) -> RunReport:
        spec, A, _ = self._wall(run)
        mc = ModuleCategory(mod_cat_skeleton(A, spec.rank))
        classes = s21_enumerate(mc, spec.p, spec.rank)
        checks = [check_level_structure(mc, spec.p, spec.rank)]
        if not mc.strictified:
            checks.append(check_oracle(mc, spec.p, spec.rank))
        level = S21Level(mc, spec.p)
        results = {
            "ring": A.name,
            "p": spec.p,
            "rank": spec.rank,
            "classes": len(classes),
            "values": [[mc.rank(level.at(X, t)) for t in level.shape.injective] for X in classes],
            "triples": [list(t) for t in level.shape.injective],
        }
        return self._report("s21 enumerate", checks, **results)

    def trace_conn(self, run: RunInput, command: str = "trace-conn") -> RunReport:
        run, group, X = self._space_inputs(run)
        N = self.presets.coefficients(run.coefficients, group)
        s_dim = int(run.parameters.get("s_dim", 9))
        S = sphere(2, s_dim)
        S.name = "S^2"
        levels, report = kr_hr_levels(CoeffSystemLevel(S, N), X)
        results = {
            "space": X.name,
            "realized": report.details.get("realized"),
            "levels": [
                {"q": lv.q, "summands": lv.summands, "fixed": lv.fixed, "free_orbits": lv.free_orbits, "conn": lv.conn.to_dict()}
                for lv in levels
            ],
        }
        return self._report(command, [report], **results)
