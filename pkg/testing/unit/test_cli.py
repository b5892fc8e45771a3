import pytest
import ujson

from reks import cli
from reks.core.version import DEFAULT_VERSION, get_app_version, load_version_info
from reks.models.reports import CheckReport, RunReport


def run(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = cli.main([*argv, "--out", str(out)])
    report = ujson.loads(out.read_text()) if out.exists() else None
    return code, report


class TestBounds:
    def test_sign_circle_shift(self, tmp_path):
        code, report = run(tmp_path, "bounds", "--cert", "rho0", "--smash", "S11")
        assert code == 0
        assert report["results"]["certificate"]["rho"] == {"1": -1, "C2": 0}
        assert report["command"] == "bounds"

    def test_unknown_certificate(self, tmp_path):
        code, report = run(tmp_path, "bounds", "--cert", "nope")
        assert code == 2
        assert report is None

    def test_csv_rows(self, capsys):
        assert cli.main(["bounds", "--cert", "rho0", "--format", "csv"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "section,key,value"
        assert "result,certificate.rho.1,0" in lines


class TestInputs:
    def test_empty_input_is_rejected(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text("{}")
        code, _ = run(tmp_path, "conn", "--input", str(path))
        assert code == 2

    def test_schema_violation(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(ujson.dumps({"space": {"op": "sphere", "k": -1}}))
        code, _ = run(tmp_path, "conn", "--input", str(path))
        assert code == 2

    def test_unknown_preset(self, tmp_path):
        code, _ = run(tmp_path, "conn", "--preset", "nowhere")
        assert code == 2

    def test_missing_input(self, tmp_path):
        code, _ = run(tmp_path, "bredon")
        assert code == 2


class TestCommands:
    def test_dt_linearity_on_sign_circle(self, tmp_path):
        code, report = run(tmp_path, "verify", "dt-linearity", "--preset", "z4neg-s11-freeorbit")
        assert code == 0
        assert report["checks"][0]["status"] == "pass"

    def test_wedge_to_product_conn(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(ujson.dumps({"preset": "s2rho", "map": "wedge_to_product"}))
        code, report = run(tmp_path, "conn", "--input", str(path), "--dim", "4")
        assert code == 0
        assert report["checks"][0]["name"] == "wedge_product_conn"
        assert report["dim"] == 4

    def test_bredon_of_sign_circle(self, tmp_path):
        code, report = run(tmp_path, "bredon", "--preset", "s11")
        assert code == 0
        labels = [s["subgroup"] for s in report["results"]["bredon"]["subgroups"]]
        assert labels == ["1", "C2"]

    def test_s21_enumerate(self, tmp_path):
        code, report = run(tmp_path, "s21", "enumerate", "--preset", "f2-regular")
        assert code == 0
        assert report["results"]["classes"] == 2
        assert report["results"]["triples"] == [[0, 1, 2]]

    def test_sym_on_groupoid(self, tmp_path):
        code, report = run(tmp_path, "verify", "sym", "--preset", "groupoid2")
        assert code == 0
        assert [c["status"] for c in report["checks"]] == ["pass", "pass"]

    def test_trace_conn_reports_subdivided_levels(self, tmp_path):
        code, report = run(tmp_path, "s21", "trace-conn", "--preset", "s11")
        assert code == 0
        levels = report["results"]["levels"]
        assert [lv["q"] for lv in levels] == [0, 1, 2, 3, 4]
        assert levels[1]["conn"] == {"1": 1, "C2": 0}
        assert report["results"]["realized"] == {"1": 2, "C2": 0}

    def test_split_ext(self, tmp_path):
        code, report = run(tmp_path, "verify", "split-ext", "--preset", "f2-regular")
        assert code == 0
        assert report["results"]["ring"] == "F2"


def test_failed_check_exits_one(tmp_path, monkeypatch):
    def failing(self, cert=None, smash=(), run=None):
        return RunReport(
            command="bounds",
            version="test",
            dim=self.dim,
            checks=[CheckReport.failure("forced", "made to fail", 1, where="here")],
        )

    monkeypatch.setattr(cli.VerificationService, "bounds", failing)
    code, report = run(tmp_path, "bounds", "--cert", "rho0")
    assert code == 1
    assert report["checks"][0]["counterexample"]["message"] == "made to fail"


@pytest.mark.parametrize("argv", [["--help"], ["verify", "--help"]])
def test_help_exits_cleanly(argv):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 0


def test_version_banner(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.startswith(f"reks {get_app_version()} (reports v")


class TestVersionFile:
    def test_reads_fields(self, tmp_path):
        path = tmp_path / "version.json"
        path.write_text(ujson.dumps({"app_version": "9.9.9", "report_version": "3"}))
        info = load_version_info(path)
        assert (info.app_version, info.report_version) == ("9.9.9", "3")

    def test_missing_or_broken_file_falls_back(self, tmp_path):
        broken = tmp_path / "version.json"
        broken.write_text("{not json")
        assert load_version_info(tmp_path / "absent.json").app_version == DEFAULT_VERSION
        assert load_version_info(broken).app_version == DEFAULT_VERSION
