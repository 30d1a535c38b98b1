import json
import subprocess
import sys

import pytest

from virasoro_engine.cli import EXIT_COMPUTE, EXIT_INPUT, EXIT_OK, main, run
from virasoro_engine import quantization_checks as qc


def ok(*argv):
    code, text = run(list(argv))
    assert code == EXIT_OK, text
    return json.loads(text)


class TestExamples:
    def test_bracket(self):
        doc = ok("bracket", "--n", "2", "--m", "-2")
        assert doc["result"] == {"L0": "4", "C": "1/2"}
        assert doc["convention"] == "residue"
        assert doc["input"] == {"n": 2, "m": -2, "convention": "residue"}

    def test_bracket_printed_convention(self):
        doc = ok("bracket", "--n", "2", "--m", "-2", "--convention", "paper-printed")
        assert doc["result"] == {"L0": "4", "C": "-1/2"}
        assert doc["convention"] == "paper-printed"

    def test_correlator_three_point(self):
        doc = ok("correlator", "--n", "3")
        assert doc["result"]["equals_closed_form"] is True
        assert doc["convention"] == "ward"

    def test_correlator_printed(self):
        doc = ok("correlator", "--n", "3", "--convention", "paper-printed")
        assert doc["result"]["equals_closed_form"] is False

    def test_anomaly(self):
        doc = ok("anomaly", "--eps", "1/10", "--L", "10")
        assert doc["result"]["value"] == "343233/4121204"
        assert doc["result"]["defect_bound_ok"] is True
        assert doc["input"] == {"eps": "1/10", "L": "10", "numeric": False}

    def test_anomaly_numeric_has_error(self):
        doc = ok("anomaly", "--eps", "1", "--L", "2", "--numeric")
        num = doc["result"]["numeric"]
        assert set(num) == {"value", "error", "evaluations"}
        assert num["value"] == pytest.approx(13 / 324, abs=1e-12)


class TestSubcommands:
    def test_straighten(self):
        doc = ok("straighten", "--word=2,-2")
        assert {"word": [], "coefficient": "1/2*c"} in doc["result"]
        assert {"word": [-2, 2], "coefficient": "1"} in doc["result"]

    def test_act(self):
        assert ok("act", "--n", "2", "--ket", "2")["result"] == [{"ket": [], "coefficient": "1/2*c"}]
        assert ok("act", "--n", "2", "--ket", "2", "--c", "3")["result"] == [{"ket": [], "coefficient": "3/2"}]

    def test_character(self):
        res = ok("character", "--order", "7")["result"]
        assert res["coefficients"] == ["1", "0", "1", "1", "2", "2", "4"]

    def test_ope(self):
        res = ok("ope")["result"]
        assert [t["pole"] for t in res] == [4, 2, 1]

    def test_locality(self):
        assert ok("locality", "--N", "4", "--level-cap", "3", "--mode-cap", "3")["result"]["local"] is True
        res = ok("locality", "--N", "3", "--level-cap", "3", "--mode-cap", "3")["result"]
        assert res["local"] is False and res["witness_count"] > 0

    def test_translation(self):
        assert ok("translation", "--level-cap", "3")["result"]["holds"] is True

    def test_ward(self):
        assert ok("ward", "--n", "3")["result"] == {"translation": True, "dilation": True, "special_conformal": True}

    def test_ce_betti_builtin(self):
        assert ok("ce-betti", "--algebra", "sl2")["result"]["betti"] == [1, 0, 0, 1]

    def test_ce_betti_file(self, tmp_path):
        f = tmp_path / "h.json"
        f.write_text(json.dumps({"dim": 3, "brackets": [{"i": 0, "j": 1, "coeffs": [0, 0, 1]}]}))
        res = ok("ce-betti", "--file", str(f))["result"]
        assert res["betti"] == [1, 2, 2, 1]
        assert res["boundary_squared_zero"] is True

    def test_genus_table(self):
        assert ok("genus-table", "--g", "0")["result"]["ring"] == "C[y,C]"

    def test_gf_cocycle(self):
        assert ok("gf-cocycle", "--n", "3", "--m", "-3")["result"] == {"value": "2", "central_coefficient": "2"}

    def test_schwarzian(self):
        assert ok("schwarzian", "--mobius", "1,0,1,1", "--order", "8")["result"]["coefficients"] == {}
        assert ok("schwarzian", "--coeffs", "0,1,1/2,1/6,1/24,1/120", "--order", "6")["result"]["coefficients"]["0"] == "-1/2"

    def test_annulus(self):
        res = ok("annulus", "--k", "0")["result"]["moment"]
        assert res["value"] == pytest.approx(1.0, abs=1e-8)
        assert "error" in res

    def test_central_term(self):
        res = ok("central-term", "--m", "2", "--n", "-2")["result"]
        assert res["value"] == pytest.approx(0.5, rel=1e-4)
        assert res["target"] == "1/2"
        assert "error" in res and "factors" in res

    def test_charge(self):
        res = ok("charge", "--n", "4")["result"]
        assert res["charge"] == 4
        assert res["cocycle_coefficient"] == "1/3"


class TestErrors:
    @pytest.mark.parametrize(
        "argv",
        [
            ["nope"],
            [],
            ["anomaly", "--eps", "1/x", "--L", "2"],
            ["anomaly", "--eps", "1/0", "--L", "2"],
            ["anomaly", "--eps", "3", "--L", "2"],
            ["genus-table", "--g", "-1"],
            ["act", "--n", "1", "--ket", "1"],
            ["schwarzian", "--order", "5"],
            ["schwarzian", "--mobius", "1,2,2,4"],
            ["correlator", "--n", "40"],
            ["ce-betti", "--algebra", "e8"],
            ["bracket", "--n", "1", "--m", "2", "--convention", "other"],
            ["annulus", "--tol", "-1"],
        ],
    )
    def test_validation_exit_code(self, argv, capsys):
        code, text = run(argv)
        assert code == EXIT_INPUT
        assert text == ""

    def test_missing_file(self, tmp_path):
        code, text = run(["ce-betti", "--file", str(tmp_path / "missing.json")])
        assert code == EXIT_INPUT and text == ""

    def test_jacobi_failure_in_file(self, tmp_path):
        f = tmp_path / "bad.json"
        f.write_text(json.dumps({"dim": 3, "brackets": [
            {"i": 0, "j": 1, "coeffs": [0, 0, 1]},
            {"i": 1, "j": 2, "coeffs": [1, 0, 0]},
            {"i": 0, "j": 2, "coeffs": [1, 0, 0]},
        ]}))
        assert run(["ce-betti", "--file", str(f)]) == (EXIT_INPUT, "")

    def test_quadrature_failure_exit_code(self, monkeypatch):
        def boom(*a, **k):
            raise qc.QuadratureError("no convergence")

        monkeypatch.setattr(qc, "annulus_moment", boom)
        assert run(["annulus"]) == (EXIT_COMPUTE, "")


class TestDeterminism:
    CASES = [
        ["bracket", "--n", "3", "--m", "-3"],
        ["straighten", "--word=3,-1,-2"],
        ["correlator", "--n", "4"],
        ["anomaly", "--eps", "2/7", "--L", "3/2"],
        ["charge", "--n", "2"],
        ["central-term", "--m", "1", "--n", "2"],
    ]

    @pytest.mark.parametrize("argv", CASES, ids=lambda a: a[0])
    def test_round_trip(self, argv):
        code, first = run(argv)
        assert code == EXIT_OK
        doc = json.loads(first)
        assert json.dumps(doc, sort_keys=True, ensure_ascii=False) + "\n" == first
        assert run(argv) == (code, first)

    def test_env_tolerance(self, monkeypatch):
        monkeypatch.setenv(qc.TOL_ENV, "1e-7")
        assert ok("annulus")["input"]["tol"] == 1e-7
        monkeypatch.setenv(qc.TOL_ENV, "zero")
        assert run(["annulus"]) == (EXIT_INPUT, "")


def test_main_writes_stdout(capsys):
    assert main(["genus-table", "--g", "2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert json.loads(out)["result"]["ring"] == "C[y1,y2,y3,C]"


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "virasoro_engine", "bracket", "--n", "2", "--m", "-2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"] == {"L0": "4", "C": "1/2"}
    bad = subprocess.run([sys.executable, "-m", "virasoro_engine", "bogus"], capture_output=True, text=True, check=False)
    assert bad.returncode == 2 and bad.stdout == ""
