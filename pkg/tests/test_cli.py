import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from gtlab import bialgebra as bi
from gtlab.algebra import CyclicSeries
from gtlab.cli import run
from gtlab.surface import LoopSum, parse_loop_sum


def call(*argv, env=None):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), environ=env or {}, out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_disjoint_bracket():
    assert call("bracket", "{x1;0}", "{x2;0}")[:2] == (0, "0\n")


def test_embedded_power_cobracket():
    assert call("cobracket", "{x1^5; taut}")[:2] == (0, "0\n")


def test_bracket_text_reparses():
    code, out, _ = call("bracket", "{x1 x2; taut}", "{x2 x3; taut}", "--surface", "holes=3")
    assert code == 0
    assert parse_loop_sum(out.strip(), 3) == LoopSum.from_json([[[1, 2, 2, 3], 2, "1"], [[1, 2, 3, 2], 2, "-1"]])


@pytest.mark.parametrize(
    "argv, key, decode",
    [
        (["bracket", "{x1 x2; 1}", "{x2 x3; 1}", "--surface", "holes=3"], "bracket", LoopSum.from_json),
        (["cobracket", "{x1 x2 x1 x2^-1; taut+1}"], "cobracket", lambda d: bi.Tensor.from_json(2, d)),
        (["div", "1 * X1.X2 + -1 * X2.X1", "1/2 * X1"], "div", lambda d: CyclicSeries.from_json(2, 4, d)),
        (["twist-log", "x1 x2", "--framing", "1,-1"], "trace", lambda d: CyclicSeries.from_json(2, 4, d)),
    ],
)
def test_json_round_trips(argv, key, decode):
    code, out, _ = call(*argv, "--json")
    data = json.loads(out)
    assert code == 0 and data["status"] == 0
    value = decode(data[key])
    assert json.loads(json.dumps(value.to_json())) == data[key]
    for row in data[key]:
        Fraction(row[-1])  # exact rational strings


def test_json_rationals_are_exact_strings():
    _, out, _ = call("twist-log", "x1", "--trunc", "3", "--json")
    coeffs = [row[-1] for row in json.loads(out)["regular"]]
    assert all(isinstance(c, str) and Fraction(c) for c in coeffs)
    assert any("/" in c for c in coeffs)


def test_verify_axioms_summary():
    code, out, _ = call("verify-axioms", "--surface", "holes=3", "--trunc", "4", "--seed", "7")
    assert code == 0
    for name in ("Jacobi", "co-Jacobi", "Drinfeld compatibility", "divergence cocycle"):
        assert f"PASS {name}" in out
    assert out.strip().endswith("PASS summary: 6/6 checks")


def test_output_is_deterministic():
    a = call("oracle-check", "--seed", "3", "--loops", "10", "--json")
    b = call("oracle-check", "--seed", "3", "--loops", "10", "--json")
    assert a == b and a[0] == 0


def test_compare_exit_codes():
    code, out, _ = call("compare-es-div", "logsq:x1 x2 x1^-1 x2^-1")
    assert code == 0 and "PASS" in out
    code, out, _ = call("compare-es-div", "logsq:x1 x2")
    assert code == 1 and "filtration" in out


def test_commutator_check():
    code, out, _ = call("commutator-check", "x1 x2", "x2 x3", "--surface", "holes=3", "--trunc", "4", "--framing", "1,-1,2")
    assert code == 0 and "framing independent: True" in out and out.strip().endswith("PASS")


def test_es_trace_example():
    assert call("es-trace", "1 * X1.X2 + -1 * X2.X1")[:2] == (0, "1 * X2\n")


@pytest.mark.parametrize(
    "argv, message",
    [
        (["bracket", "{x1 q2; 0}", "{x2; 0}"], "'q2' at position 3"),
        (["bracket", "{x3; 0}", "{x2; 0}"], "'x3'"),
        (["div", "1 * X1.Y2"], "position 0"),
        (["twist-log", "x1", "--framing", "1,2,3"], "framing has 3 entries"),
        (["twist-log", "x1", "--surface", "holes=zero"], "holes=n"),
        (["compare-es-div", "logprod:x1"], "expects 2"),
        (["twist-log", "x1 x1^-1"], "nontrivial"),
    ],
)
def test_input_errors(argv, message):
    code, _, err = call(*argv)
    assert code == 2 and message in err


def test_unknown_verb_is_an_input_error():
    assert call("frobnicate")[0] == 2


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "gt.cfg"
    cfg.write_text("# surface and truncation\nholes = 3\ntrunc = 2\nframing = 1,0,0\n")
    code, out, _ = call("twist-log", "x3", "--json", env={"GTLAB_CONFIG": str(cfg)})
    data = json.loads(out)
    assert code == 0 and data["rot"] == 1
    assert max(len(w) + k for w, k, _ in data["trace"]) == 2
    code, out, _ = call("twist-log", "x1", "--json", "--trunc", "3", "--config", str(cfg))
    data = json.loads(out)
    assert data["rot"] == 2 and max(len(w) + k for w, k, _ in data["trace"]) == 3
    cfg.write_text("holes: 3\n")
    assert call("twist-log", "x1", "--config", str(cfg))[0] == 2


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "gtlab.cli", "bracket", "{x1;0}", "{x2;0}"], capture_output=True, text=True
    )
    assert proc.returncode == 0 and proc.stdout == "0\n"
