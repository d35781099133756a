import io
import subprocess
import sys

import pytest

from sal.cli import run
from sal.currents import TABLE_ROWS
from sal.grammar import parse_document, parse_expr

CH = "name: Camassa-Holm\nepsilon: -1\nb: 1\ngamma: 3\nbeta: 1\n"
DP = "epsilon: -1\nf: 4*u\ng: -3\nh: -u\n"
FORMAL = "epsilon: eps\nf: f\ng: g\nh: h\n"


@pytest.fixture
def spec_file(tmp_path):
    def write(text, name="eq.spec"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


def invoke(*argv):
    out, err = io.BytesIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue().decode(), err.getvalue()


def machine(*argv):
    code, out, _ = invoke("--format", "machine", *argv)
    return code, {k: e.value for k, e in parse_document(out).items()}, out


class TestClassify:
    def test_camassa_holm(self, spec_file):
        code, doc, _ = machine("classify", "--spec", spec_file(CH))
        assert code == 0
        assert doc["command"] == "classify"
        assert doc["is_ssa"] == "true"
        assert doc["lambda"] == "-1"
        assert doc["c"] == "0"
        assert doc["conditions"] == ""
        assert doc["scaling_b"] == "1"
        assert doc["scaling_lambda"] == "2"
        assert doc["exit_status"] == "0"

    def test_inputs_reparse(self, spec_file):
        _, doc, _ = machine("classify", "--spec", spec_file(CH))
        assert parse_expr(doc["input.f"]) == parse_expr("3*u")
        assert parse_expr(doc["input.h"]) == parse_expr("-u")

    def test_degasperis_procesi(self, spec_file):
        code, doc, _ = machine("classify", "--spec", spec_file(DP))
        assert code == 0 and doc["is_ssa"] == "false"

    def test_formal(self, spec_file):
        code, doc, _ = machine("classify", "--spec", spec_file(FORMAL))
        assert code == 0
        assert parse_expr(doc["required_g"]) == parse_expr("c*u^-1 + u^-1*h + h'")
        assert doc["scaling_symmetry"] == "none"


class TestAdjoint:
    def test_camassa_holm(self, spec_file):
        code, doc, _ = machine("adjoint", "--spec", spec_file(CH))
        assert code == 0 and doc["lambda"] == "-1"
        on_u = parse_expr(doc["adjoint_at_v_eq_u"])
        assert on_u == -parse_expr("u_t - u_txx + 3*u*u_x - 2*u_x*u_xx - u*u_xxx")


class TestConserve:
    def test_reduced(self, spec_file):
        code, doc, _ = machine("conserve", "--spec", spec_file(CH))
        assert code == 0
        assert parse_expr(doc["density"]) == parse_expr("u^2 + u_x^2")
        assert parse_expr(doc["flux"]) == parse_expr("2*u^3 - 2*u^2*u_xx - 2*u*u_tx")
        assert parse_expr(doc["characteristic"]) == parse_expr("2*u")

    def test_raw_differs(self, spec_file):
        _, raw, _ = machine("conserve", "--spec", spec_file(CH), "--raw")
        assert "t" in raw["density"]

    def test_not_ssa(self, spec_file):
        code, doc, _ = machine("conserve", "--spec", spec_file(DP))
        assert code == 1
        assert doc["local"] == "false" and "v" in doc["density"]
        assert doc["exit_status"] == "1"

    def test_translation(self, spec_file):
        code, doc, _ = machine("conserve", "--spec", spec_file(CH), "--generator", "x")
        assert code == 0 and doc["local"] == "true"


class TestTable:
    def test_rows_reparse(self):
        code, doc, _ = machine("table")
        assert code == 0
        for i, row in enumerate(TABLE_ROWS, 1):
            assert doc[f"row{i}.equation"] == row.label
            assert parse_expr(doc[f"row{i}.density"]) == parse_expr(row.density)
            assert parse_expr(doc[f"row{i}.flux"]) == parse_expr(row.flux)
        assert doc["row1.density"] == "u^2 + u_x^2"

    def test_text_format(self):
        code, out, _ = invoke("table")
        assert code == 0 and out.startswith("sal table\n")
        assert "Camassa-Holm" in out


class TestSimulate:
    def test_constant_data(self, spec_file, tmp_path):
        log = tmp_path / "log.csv"
        code, doc, _ = machine(
            "simulate", "--spec", spec_file(CH), "--init", "constant", "--param", "k=0.5",
            "--L", "40", "--n", "32", "--dt", "0.1", "--t-end", "1", "--out", str(log),
        )
        assert code == 0
        assert doc["relative_drift"] == "0"
        assert float(doc["q_final"]) == 10.0
        assert log.read_text().splitlines()[0] == "t,Q,relative_drift,mass,max_abs_u"

    def test_bad_grid_is_usage_error(self, spec_file):
        code, _, err = invoke(
            "simulate", "--spec", spec_file(CH), "--init", "gaussian",
            "--L", "40", "--n", "100", "--dt", "0.1", "--t-end", "1",
        )
        assert code == 2 and "power of two" in err

    def test_bad_param(self, spec_file):
        code, _, _ = invoke(
            "simulate", "--spec", spec_file(CH), "--init", "gaussian", "--param", "a",
            "--L", "40", "--n", "64", "--dt", "0.1", "--t-end", "1",
        )
        assert code == 2

    def test_symbolic_spec_is_domain_error(self, spec_file):
        code, doc, _ = machine(
            "simulate", "--spec", spec_file(FORMAL), "--init", "gaussian",
            "--L", "40", "--n", "64", "--dt", "0.1", "--t-end", "1",
        )
        assert code == 1 and "error" in doc


class TestOracle:
    def test_default(self):
        code, doc, _ = machine("oracle", "--n", "128")
        assert code == 0
        assert float(doc["breaking_time"]) == pytest.approx(1.0)
        assert float(doc["max_abs_error"]) < 1e-6

    def test_past_breaking(self):
        code, doc, _ = machine("oracle", "--t", "1.5", "--n", "64")
        assert code == 1 and "breaking" in doc["error"]


class TestUsage:
    @pytest.mark.parametrize(
        "argv",
        [[], ["bogus"], ["classify"], ["table", "--nope"], ["classify", "--spec", "/nonexistent/x.spec"]],
    )
    def test_exit_two(self, argv):
        code, _, _ = invoke(*argv)
        assert code == 2

    def test_parse_error(self, spec_file):
        code, _, err = invoke("classify", "--spec", spec_file("epsilon: -1\nf: 3*u +\ng: 0\nh: 0\n"))
        assert code == 2 and "line 2" in err

    def test_spec_error(self, spec_file):
        code, _, err = invoke("classify", "--spec", spec_file("epsilon: -1\nb: 1\ngamma: 3\nbeta: 1\nf: 5*u\n"))
        assert code == 2 and "inconsistent" in err


def test_deterministic(spec_file):
    path = spec_file(CH)
    first = machine("classify", "--spec", path)[2]
    assert machine("classify", "--spec", path)[2] == first
    assert machine("table")[2] == machine("table")[2]


def test_console_entry_point(spec_file):
    proc = subprocess.run(
        [sys.executable, "-m", "sal.cli", "--format", "machine", "classify", "--spec", spec_file(CH)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "is_ssa: true" in proc.stdout
