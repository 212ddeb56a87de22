import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from breuilkit.cli import run

EXAMPLE = str(Path(__file__).resolve().parents[1] / "inputs" / "worked_example.json")


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), buf)
    return code, buf.getvalue()


def machine(*argv):
    code, text = call(*argv, "--format", "machine")
    return code, json.loads(text)


def test_validate():
    code, r = machine("validate", "--input", EXAMPLE)
    assert code == 0 and r["strongly_generic"]
    assert r["brackets"] == [[0, 4, 8], [8, 0, 4], [4, 8, 0]]


def test_non_generic_is_input_error(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text(json.dumps({"prime": 13, "weights": [0, 2, 8]}))
    assert call("validate", "--input", str(f))[0] == 1
    assert call("gauge", "--input", str(f))[0] == 1


def test_unreadable_input(tmp_path):
    f = tmp_path / "broken.json"
    f.write_text("{not json")
    assert call("gauge", "--input", str(f))[0] == 1
    assert call("gauge", "--input", str(tmp_path / "missing.json"))[0] == 1


def test_gauge_and_transcript():
    code, r = machine("gauge", "--seed", "3", "--transcript")
    assert code == 0 and r["verified"] and r["gauge_normal_form"] and r["final_diagonal_scalar"]
    assert len(r["transcript"]) == r["steps"]


def test_gauge_precision_flags():
    code, r8 = machine("--command", "gauge", "--seed", "1", "--precision", "8", "--fil", "11")
    code4, r4 = machine("--command", "gauge", "--seed", "1", "--precision", "4", "--fil", "11")
    assert code == code4 == 0
    assert all(0 <= v < 13**4 for v in r4["gauge"]["lambda"])
    assert any(v >= 13**4 for v in r8["gauge"]["lambda"])
    code, _ = machine("gauge", "--precision", "8", "--fil", "10")
    assert code == 2


def test_monodromy_worked_example():
    code, r = machine("monodromy", "--input", EXAMPLE)
    assert code == 0 and r["exists"] and r["oracle_solvable"]
    assert r["closed_form"]["P10"][8] == 5 and r["closed_form_in_oracle"]


def test_fl_compare():
    code, r = machine("fl", "--input", EXAMPLE)
    assert code == 0
    assert r["isomorphic_conjugate"] and not r["isomorphic_right"]


def test_fl_without_monodromy_is_input_error(tmp_path):
    f = tmp_path / "g.json"
    f.write_text(json.dumps({"prime": 13, "weights": [0, 4, 8], "gauge": {"v10": 1, "v20": 2}}))
    assert call("fl", "--input", str(f))[0] == 1


def test_etale():
    code, r = machine("etale", "--input", EXAMPLE)
    assert code == 0 and r["det_valuation"] == 36 and r["descent_pattern"] == [0, 5, 10]


def test_gauge_modp_deterministic():
    a = call("gauge-modp", "--seed", "4", "--format", "machine")
    b = call("gauge-modp", "--seed", "4", "--format", "machine")
    assert a == b and a[0] == 0


def test_text_output_is_stable():
    assert call("etale", "--input", EXAMPLE) == call("etale", "--input", EXAMPLE)


def test_no_convergence_exit_code(monkeypatch):
    import breuilkit.cli as cli
    from breuilkit.gauge import diagonalize

    monkeypatch.setattr(cli, "diagonalize", lambda A, N: diagonalize(A, N, max_steps=1))
    assert call("gauge", "--seed", "0")[0] == 3


def test_bad_flag_and_missing_command():
    with pytest.raises(SystemExit) as exc:
        run(["gauge", "--nope"], io.StringIO())
    assert exc.value.code == 1
    assert run([], io.StringIO()) == 1


def test_module_entry_point_bytes_identical():
    cmd = [sys.executable, "-m", "breuilkit", "fl", "--input", EXAMPLE, "--format", "machine"]
    a = subprocess.run(cmd, capture_output=True)
    b = subprocess.run(cmd, capture_output=True)
    assert a.returncode == 0 and a.stdout == b.stdout and a.stdout
