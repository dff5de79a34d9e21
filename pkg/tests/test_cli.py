from __future__ import annotations

import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from blindcopy.cli import main

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_sat_contradiction(capsys):
    code, out, _ = run(capsys, "sat", SAMPLES / "contradiction.cls")
    assert code == 1 and out == "Unsat\n"


def test_sat_procedures_agree(capsys):
    for proc in ("auto", "c", "c-horn", "oracle"):
        code, out, _ = run(capsys, "sat", SAMPLES / "normalize_example.cls", "--procedure", proc)
        assert (code, out) == (0, "Sat\n"), proc


def test_sat_trace_format(capsys):
    code, out, _ = run(capsys, "sat", SAMPLES / "contradiction.cls", "--trace")
    lines = out.splitlines()
    assert lines[0] == "Unsat"
    assert lines[-1].startswith("#") and "[" in lines[-1] and "false <= #" in lines[-1]


def test_sat_wrong_procedure_for_input(capsys):
    code, _, err = run(capsys, "sat", SAMPLES / "normalize_example.cls", "--procedure", "flat")
    assert code == 65 and err.startswith("error:")


def test_normalize_emits_six(capsys, tmp_path):
    code, out, _ = run(capsys, "normalize", SAMPLES / "normalize_example.cls")
    assert code == 0 and len(out.splitlines()) == 6
    target = tmp_path / "out.cls"
    code, out, _ = run(capsys, "normalize", SAMPLES / "normalize_example.cls", "--emit", target)
    assert code == 0 and out == "" and len(target.read_text().splitlines()) == 6


def test_secrecy_exit_codes(capsys):
    code, out, _ = run(capsys, "secrecy", SAMPLES / "ns.proto")
    assert code == 1 and out == "Leak n2ab\n"
    code, out, _ = run(capsys, "secrecy", SAMPLES / "shared_key.proto")
    assert code == 0 and out == "Secret s\nSecret kab\n"
    code, out, _ = run(capsys, "secrecy", SAMPLES / "ns.proto", "--secret", "n1ab", "--procedure", "normalize")
    assert code == 0 and out == "Secret n1ab\n"


def test_apds_modes(capsys):
    for via in ("horn", "protocol", "fixpoint"):
        assert run(capsys, "apds", SAMPLES / "counter.cls", "--goal", "Q(t(a))", "--via", via)[0] == 1
    assert run(capsys, "apds", SAMPLES / "counter.cls", "--goal", "R(t(s(a)))")[0] == 0
    code, out, _ = run(capsys, "apds", SAMPLES / "counter.cls", "--goal", "R(t(s(a)))", "--via", "fixpoint")
    assert (code, out) == (2, "Unknown\n")


def test_classify_and_decompose(capsys):
    code, out, _ = run(capsys, "classify", SAMPLES / "contradiction.cls")
    assert code == 0 and out.splitlines()[0].endswith("\tP(a)")
    code, out, _ = run(capsys, "decompose", "f(g(x1),h(g(x1)))")
    assert code == 0 and out == "f(x1,h(x1))\ng(x1)\n"
    code, _, err = run(capsys, "decompose", "f(x1,x2)")
    assert code == 65 and err.startswith("error:")


def test_classify_preprocess(capsys, tmp_path):
    src = tmp_path / "in.cls"
    src.write_text("P(a) | Q(x1).\n")
    code, out, _ = run(capsys, "classify", src, "--preprocess")
    assert code == 0 and "# branch 2 of 2" in out


def test_usage_and_parse_errors(capsys, tmp_path):
    assert run(capsys)[0] == 64
    assert run(capsys, "bogus")[0] == 64
    assert run(capsys, "sat", tmp_path / "missing.cls")[0] == 64
    assert run(capsys, "sat", SAMPLES / "normalize_example.cls", "--budget", "-1")[0] == 64
    bad = tmp_path / "bad.cls"
    bad.write_text("P(a) | .")
    code, _, err = run(capsys, "sat", bad)
    assert code == 65 and err.startswith("error: 1:")


def test_budget_exhaustion_is_unknown(capsys, tmp_path):
    f = tmp_path / "grow.cls"
    f.write_text("P(a).\nP(f(x1,x2)) | -P(x1) | -P(x2).\nQ(x1) | R(x1) | -P(x1).\n-Q(f(x1,x1)) | -R(x1).\n")
    code, out, err = run(capsys, "sat", f, "--budget", "0.000001")
    assert code == 2 and out == "Unknown\n" and err.startswith("error:")


def test_generate_is_seeded(capsys):
    a = run(capsys, "generate", "mixed", "--seed", "4", "--count", "3")[1]
    b = run(capsys, "generate", "mixed", "--seed", "4", "--count", "3")[1]
    assert a == b and a.count("# instance") == 3


def test_deterministic_stdout(capsys):
    a = run(capsys, "sat", SAMPLES / "normalize_example.cls", "--trace")[1]
    b = run(capsys, "sat", SAMPLES / "normalize_example.cls", "--trace")[1]
    assert a == b


@pytest.mark.skipif(shutil.which("blindcopy") is None, reason="console script not installed")
def test_console_script():
    p = subprocess.run(["blindcopy", "sat", str(SAMPLES / "contradiction.cls")], capture_output=True, text=True)
    assert p.returncode == 1 and p.stdout == "Unsat\n"
    p = subprocess.run([sys.executable, "-m", "blindcopy.cli", "secrecy", str(SAMPLES / "ns.proto")],
                       capture_output=True, text=True)
    assert p.returncode == 1
