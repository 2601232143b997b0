import io
import json

import pytest

from invariant_curves.cli import read_job, run

SYSTEM = """\
# quartic family, xi = -2
params alpha e sigma delta
f = 3*x^2 + alpha
g = -3*x^4 - 2*x^3 + e*x^2 + sigma*x + delta
"""

ROW_POINT = """\
let alpha = 21/4
let e = -9/2
let delta = 93/16
let sigma = -17/2
"""

ROW_CURVE = """\
F = y^2 + (x^3 + 1/2*x^2 + 11/4*x + 51/8)*y - x^5 - 3/2*x^4 - 5/2*x^3 - 35/4*x^2 - 69/16*x + 153/32
lambda = -3*x^2 + x - 31/4
"""


def invoke(tmp_path, text, *args):
    path = tmp_path / "job.txt"
    path.write_text(text)
    out = io.StringIO()
    status = run(["--input", str(path), *args], stdout=out)
    return status, out.getvalue()


def test_verify_accepts_known_curve(tmp_path):
    status, out = invoke(tmp_path, SYSTEM + ROW_POINT + ROW_CURVE, "--mode", "verify")
    assert status == 0
    assert out.startswith("verified")


def test_verify_rejects_with_residue(tmp_path):
    status, out = invoke(tmp_path, SYSTEM + "F = y\nlambda = 0\n", "--mode", "verify", "--format", "structured")
    assert status == 2
    report = json.loads(out)["report"]
    assert report["verified"] is False
    assert report["residue"] == "3*x^4 - x^2*e - 3*x^2*y + 2*x^3 - x*sigma - y*alpha - delta"


def test_verify_without_cofactor_uses_division(tmp_path):
    status, out = invoke(tmp_path, SYSTEM + ROW_POINT + ROW_CURVE.splitlines()[0] + "\n", "--mode", "verify")
    assert status == 0 and "lambda = -3*x^2 + x - 31/4" in out


def test_parse_error_is_reported_with_position(tmp_path, capsys):
    status, _ = invoke(tmp_path, "P = y\nQ = x +* y\n", "--mode", "series")
    assert status == 1
    err = capsys.readouterr().err
    assert "line 2" in err and "position" in err


def test_window_violation(tmp_path, capsys):
    status, _ = invoke(tmp_path, "f = x^2\ng = x^5\n", "--mode", "classify-lienard")
    assert status == 1
    assert "deg f < deg g" in capsys.readouterr().err


def test_series_report(tmp_path):
    status, out = invoke(tmp_path, SYSTEM, "--mode", "series", "--depth", "4")
    assert status == 0
    assert "Fuchs indices [3], free ['c3']" in out
    assert "compatibility: e + 3*alpha - 45/4 = 0" in out
    assert "mu(x) is constant" in out


def test_structured_output_is_deterministic(tmp_path):
    first = invoke(tmp_path, SYSTEM, "--mode", "series", "--format", "structured")[1]
    second = invoke(tmp_path, SYSTEM, "--mode", "series", "--format", "structured")[1]
    assert first == second
    data = json.loads(first)
    assert data["mode"] == "series" and data["status"] == 0
    assert {b["exponent"] for b in data["report"]["balances"]} == {"2", "3"}


def test_construct_finds_and_reverifies(tmp_path):
    status, out = invoke(tmp_path, SYSTEM + ROW_POINT, "--mode", "construct", "--max-n", "2",
                         "--format", "structured")
    assert status == 0
    (curve,) = json.loads(out)["report"]["curves"]
    again = SYSTEM + ROW_POINT + f"F = {curve['F']}\nlambda = {curve['cofactor']}\n"
    assert invoke(tmp_path, again, "--mode", "verify")[0] == 0


def test_classify_concrete_point_reverifies(tmp_path):
    point = "let alpha = 9/4\nlet e = 9/2\nlet delta = 145/16\nlet sigma = -39/2\n"
    status, out = invoke(tmp_path, SYSTEM + point, "--mode", "classify-lienard", "--format", "structured")
    assert status == 0
    (curve,) = json.loads(out)["report"]["curves"]
    assert curve["provenance"]["N"] == 3
    again = SYSTEM + point + f"F = {curve['F_canonical']}\nlambda = {curve['cofactor']}\n"
    assert invoke(tmp_path, again, "--mode", "verify")[0] == 0


@pytest.mark.slow
def test_classify_full_family(tmp_path):
    status, out = invoke(tmp_path, SYSTEM + "unknowns alpha e sigma delta\n", "--mode", "classify-lienard")
    assert status == 0
    assert out.count("verified") == 7
    assert "alpha^2 - 4975/486*alpha + 4225/144 = 0" in out
    assert "lambda = -3*x^2 + 4*x - 29/4" in out


def test_obstruction_mode(tmp_path):
    status, out = invoke(tmp_path, "cofactor = 2*x\ncofactor = -3*x\n", "--mode", "obstruction")
    assert status == 0 and "(3, 2)" in out
    status, out = invoke(tmp_path, "params alpha\ncofactor = -3*x^2 - 2*x - alpha\ncofactor = 3*x - 5/2\n",
                         "--mode", "obstruction")
    assert "no null combination" in out


def test_reader_rejects_unknown_lines():
    with pytest.raises(ValueError):
        read_job("R = x\n")
    with pytest.raises(ValueError):
        read_job("let a = pi\n")
    job = read_job("vars s z\nparams a b\nP = z\nQ = a*s  # comment\n")
    assert job.variables == ["s", "z"] and job.params == ["a", "b"]


def test_option_ranges(tmp_path):
    assert invoke(tmp_path, SYSTEM, "--mode", "series", "--depth", "0")[0] == 1
    assert invoke(tmp_path, SYSTEM, "--mode", "classify-lienard", "--max-n", "0")[0] == 1


def test_worker_pool_gives_identical_report(tmp_path, monkeypatch):
    args = ("--mode", "construct", "--max-n", "2", "--format", "structured")
    serial = invoke(tmp_path, SYSTEM + ROW_POINT, *args)[1]
    monkeypatch.setenv("INVARIANT_CURVES_WORKERS", "2")
    assert invoke(tmp_path, SYSTEM + ROW_POINT, *args)[1] == serial
