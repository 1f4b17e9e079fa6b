import subprocess
import sys

import pytest

from sfpc.cli import main

from conftest import PROGRAMS, ROOT

GOLDEN = ROOT / "tests" / "golden"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_check_regression(capsys):
    assert run(capsys, "check", PROGRAMS / "regression.sfpc") == (0, "Real\n", "")


def test_check_uses_aliases(capsys):
    code, out, _ = run(capsys, "check", PROGRAMS / "walk.sfpc")
    assert (code, out) == (0, "Real\n")


def test_check_church(capsys):
    assert run(capsys, "check", PROGRAMS / "id.church")[:2] == (0, "LamReal\n")


def test_check_ill_typed(capsys, tmp_path):
    code, _, err = run(capsys, "check", write(tmp_path, "bad.sfpc", "1 2"))
    assert code == 1 and "T-App" in err


def test_check_parse_error_has_position(capsys, tmp_path):
    code, _, err = run(capsys, "check", write(tmp_path, "bad.sfpc", "let x =\n"))
    assert code == 1 and "bad.sfpc" in err and "line 2" in err


def test_translate_identity(capsys):
    code, out, _ = run(capsys, "translate", PROGRAMS / "id.church")
    assert code == 0
    assert out.startswith("type LamReal = mu ")
    assert "roll[LamReal]" in out and "Fun (\\x:LamReal. x)" in out


def test_translate_requires_church(capsys):
    assert run(capsys, "translate", PROGRAMS / "regression.sfpc")[0] == 64


def test_missing_file(capsys):
    assert run(capsys, "run", "missing.sfpc")[0] == 66


def test_unwritable_output(capsys, tmp_path):
    code = run(capsys, "run", PROGRAMS / "factorial.sfpc", "--samples", 2,
               "--out", tmp_path / "no" / "x.csv")[0]
    assert code == 66


def test_malformed_program_for_run(capsys, tmp_path):
    assert run(capsys, "run", write(tmp_path, "bad.sfpc", "(1,"))[0] == 65


@pytest.mark.parametrize("argv", [
    ["run"], ["run", "x.sfpc", "--samples", "0"], ["run", "x.sfpc", "--format", "svg"],
    ["equiv", "a.sfpc"], ["frobnicate"], [],
])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 64


def test_run_summary(capsys):
    code, out, _ = run(capsys, "run", PROGRAMS / "factorial.sfpc", "--samples", 10)
    assert code == 0
    assert "converged: 10" in out and "mean = 6.0" in out


def test_run_bottom_and_top(capsys, tmp_path):
    assert run(capsys, "run", write(tmp_path, "z.sfpc", "score(0); 1"), "--samples", 5)[0] == 2
    src = "score(1e200); score(1e200); 1"
    assert run(capsys, "run", write(tmp_path, "t.sfpc", src), "--samples", 5)[0] == 3


def test_run_outputs_are_byte_identical(capsys, tmp_path):
    outs = []
    for k in range(2):
        csv, hist, traces = (tmp_path / f"{n}{k}" for n in ("s.csv", "h.csv", "t.csv"))
        base = ["run", PROGRAMS / "regression.sfpc", "--samples", 3000, "--seed", 7]
        assert run(capsys, *base, "--out", csv, "--traces", traces)[0] == 0
        assert run(capsys, *base, "--out", hist, "--format", "hist", "--bins", 30)[0] == 0
        outs.append([p.read_bytes() for p in (csv, hist, traces)])
    assert outs[0] == outs[1]
    assert outs[0][1].decode().count("\n") == 31


def test_run_church_direct_and_translated_agree(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "run", PROGRAMS / "coin.church", "--samples", 500, "--out", a)
    run(capsys, "run", PROGRAMS / "coin.church", "--samples", 500, "--out", b, "--direct")
    assert a.read_bytes() == b.read_bytes()


def test_run_emit_sfpc(capsys, tmp_path):
    out = tmp_path / "coin.sfpc"
    assert run(capsys, "run", PROGRAMS / "coin.church", "--samples", 10, "--emit-sfpc", out)[0] == 0
    assert run(capsys, "check", out)[1] == "LamReal\n"


def test_direct_needs_church(capsys):
    assert run(capsys, "run", PROGRAMS / "factorial.sfpc", "--direct")[0] == 64


def test_equiv_pass_and_fail(capsys, tmp_path):
    a = write(tmp_path, "a.sfpc", "let x = sample in let y = normal_rng(0, 1) in x + y")
    b = write(tmp_path, "b.sfpc", "let y = normal_rng(0, 1) in let x = sample in x + y")
    c = write(tmp_path, "c.sfpc", "score(2); sample + normal_rng(0, 1)")
    code, out, _ = run(capsys, "equiv", a, b)
    assert code == 0 and out.startswith("PASS")
    assert run(capsys, "equiv", a, c, "--grid", 64)[0] == 1
    assert run(capsys, "equiv", a, c, "--mode", "mc", "--samples", 3000)[0] == 1


def test_equiv_unbounded_quadrature(capsys):
    assert run(capsys, "equiv", PROGRAMS / "factorial.sfpc", PROGRAMS / "factorial.sfpc")[0] == 65


def test_prims_lists_registry(capsys):
    code, out, _ = run(capsys, "prims")
    assert code == 0
    lines = out.splitlines()
    assert any(l.startswith("normal_pdf\tprimitive\t3") for l in lines)
    assert any(l.startswith("normal_rng\tkernel\t2") for l in lines)


@pytest.mark.parametrize("command", ["", "check", "run", "translate", "equiv", "prims"])
def test_help_golden(command):
    argv = [sys.executable, "-m", "sfpc.cli"] + ([command] if command else []) + ["--help"]
    out = subprocess.run(argv, capture_output=True, text=True, env={"COLUMNS": "80", "PATH": ""},
                         check=True).stdout
    assert out == (GOLDEN / f"help_{command or 'sfpc'}.txt").read_text()
