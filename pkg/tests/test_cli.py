import subprocess
import sys

import numpy as np
import pytest

from fgcoupled import BanachType, ConfigError, InputError, ProblemSyntaxError, QuasiType
from fgcoupled.cli import (
    EXIT_FLAGGED,
    EXIT_OK,
    EXIT_USAGE,
    emit_problem,
    load_problem,
    main,
    packaged_problem,
    parse_problem,
    run_command,
)

EX1_TEXT = packaged_problem("banach_example1.prob").read_text()


def header(report):
    out = {}
    for line in report.splitlines():
        if not line.strip():
            break
        k, v = line.split("=", 1)
        out[k] = v
    return out


def test_parse_example1():
    prob = parse_problem(EX1_TEXT)
    assert prob.F.kind == "affine"
    assert prob.F.A.tolist() == [[1 / 3]] and prob.F.B.tolist() == [[-1 / 4]]
    assert prob.G.A.tolist() == [[1 / 8]] and prob.G.B.tolist() == [[-1 / 6]]
    assert prob.X.lower == (-np.inf,) and prob.Y.upper == (np.inf,)
    assert prob.cls == BanachType(1 / 3, 1 / 4, 1 / 8, 1 / 6)
    assert prob.seed.x.tolist() == [-1.0]


def test_parse_example2():
    prob = load_problem("quasi_example2.prob")
    assert prob.cls == QuasiType(1 / 3, 1 / 4)
    assert prob.solve.hypothesis_mode == "order_limit"


def test_empty_file():
    with pytest.raises(ProblemSyntaxError) as info:
        parse_problem("")
    assert info.value.line == 1
    with pytest.raises(ProblemSyntaxError):
        parse_problem("# only a comment\n\n")


def test_inadmissible_constants():
    text = EX1_TEXT.replace("class.k = 1/3", "class.k = 0.6").replace("class.l = 1/4", "class.l = 0.6")
    with pytest.raises(ConfigError, match=r"k\+l<1 violated"):
        parse_problem(text)


@pytest.mark.parametrize("edit, line_of", [
    (lambda t: t.replace("map_F.A = 1/3", "map_F.A = 1/x"), "map_F.A"),
    (lambda t: t.replace("map_F.A = 1/3", "map_F.Q = 1/3"), "map_F.Q"),
    (lambda t: t.replace("map_F.A = 1/3", "mapF.A = 1/3"), "mapF.A"),
    (lambda t: t.replace("map_F.A = 1/3", "map_F.A 1/3"), "map_F.A 1/3"),
    (lambda t: t.replace("map_F.A = 1/3", "map_F.A = 1/0"), "map_F.A"),
    (lambda t: t.replace("map_F.A = 1/3", "map_F.A = inf"), "map_F.A"),
    (lambda t: t + "seed.x = 0\n", "seed.x = 0"),
    (lambda t: t.replace("map_F.kind = affine", "map_F.kind = spline"), "map_F.kind"),
    (lambda t: t.replace("class.n = 1/6", "class.c = 1/6"), "class.c"),
    (lambda t: t.replace("space_X.dim = 1", "space_X.dim = one"), "space_X.dim"),
])
def test_syntax_errors_carry_line(edit, line_of):
    text = edit(EX1_TEXT)
    [want] = [i for i, ln in enumerate(text.splitlines(), 1) if ln.startswith(line_of)]
    with pytest.raises(ProblemSyntaxError) as info:
        parse_problem(text)
    assert info.value.line == want


def test_missing_key():
    with pytest.raises(ProblemSyntaxError, match="missing required key map_G.B"):
        parse_problem(EX1_TEXT.replace("map_G.B = -1/6\n", ""))


def test_dimension_mismatch():
    with pytest.raises(InputError):
        parse_problem(EX1_TEXT.replace("map_F.A = 1/3", "map_F.A = 1/3, 1/5"))
    with pytest.raises(InputError):
        parse_problem(EX1_TEXT.replace("seed.x = -1", "seed.x = -1, 2"))
    with pytest.raises(InputError):
        parse_problem(EX1_TEXT.replace("seed.x = -1", "seed.x = 1"))


def test_unknown_builtin():
    text = EX1_TEXT.replace("map_F.kind = affine\nmap_F.A = 1/3\nmap_F.B = -1/4\nmap_F.offset = 0",
                            "map_F.kind = builtin\nmap_F.name = sqrt")
    with pytest.raises(ConfigError, match="unknown builtin"):
        parse_problem(text)


def test_builtin_and_matrix_parse():
    text = """
space_X.dim = 2
space_X.lower = -1, -1
space_X.upper = 0, 0
space_Y.dim = 2
space_Y.lower = 0, 0
space_Y.upper = 1, 1
map_F.kind = affine
map_F.A = 1/4, 0; 0, 1/4
map_F.B = -1/8, 0; 0, -1/8
map_G.kind = builtin
map_G.name = eighth_minus_eighth
"""
    prob = parse_problem(text)
    assert prob.F.A.tolist() == [[0.25, 0.0], [0.0, 0.25]]
    assert prob.F.offset.tolist() == [0.0, 0.0]
    assert prob.G.name == "eighth_minus_eighth"
    assert prob.cls is None and prob.seed is None and prob.solve is None
    assert parse_problem(emit_problem(prob)) == prob


@pytest.mark.parametrize("name", ["banach_example1.prob", "quasi_example2.prob",
                                  "banach_unique.prob"])
def test_round_trip_shipped(name):
    prob = load_problem(name)
    again = parse_problem(emit_problem(prob))
    assert again == prob
    assert emit_problem(again) == emit_problem(prob)


def test_load_falls_back_to_shipped():
    assert load_problem("examples/banach_example1.prob") == parse_problem(EX1_TEXT)
    with pytest.raises(InputError):
        load_problem("examples/nothing_here.prob")


def test_solve_command():
    status, report = run_command(["solve", "examples/banach_example1.prob", "--tol", "1e-10"])
    assert status == EXIT_OK
    h = header(report)
    assert h["converged"] == "true"
    x, y = (float(v) for v in h["point"].strip("()").split(";"))
    assert abs(x) + abs(y) <= 1e-9
    table = report.split("\n\n", 1)[1].splitlines()
    assert table[0].split() == ["j", "x", "y", "step", "residual", "bound_X", "bound_Y"]
    assert len(table) == int(h["iterations"]) + 2
    first = table[1].split()
    assert first[:3] == ["0", "-1", "1"] and float(first[5]) == pytest.approx(2.7)


def test_verify_command():
    status, report = run_command(["verify", "examples/banach_example1.prob"])
    assert status == EXIT_OK
    h = header(report)
    assert h["condition_violations"] == "0" and h["verdict"] == "ok"


def test_solve_bad_seed_exits_2(tmp_path):
    p = tmp_path / "bad.prob"
    p.write_text(EX1_TEXT.replace("seed.x = -1", "seed.x = 0"))
    status, report = run_command(["solve", str(p)])
    assert status == EXIT_FLAGGED
    assert header(report)["seed_ok"] == "false"


def test_nonconvergence_exits_2():
    status, report = run_command(["solve", "banach_example1.prob", "--max-iter", "3"])
    assert status == EXIT_FLAGGED and header(report)["converged"] == "false"


def test_divergence_exits_2(tmp_path):
    p = tmp_path / "div.prob"
    p.write_text("space_X.dim = 1\nspace_Y.dim = 1\nmap_F.kind = affine\nmap_F.A = 3\n"
                 "map_F.B = 0\nmap_F.offset = 1\nmap_G.kind = affine\nmap_G.A = 0\nmap_G.B = 0\n"
                 "seed.x = 1\nseed.y = 0\n")
    status, report = run_command(["solve", str(p)])
    assert status == EXIT_FLAGGED and header(report)["status"] == "diverged"


def test_estimate_command():
    status, report = run_command(["estimate", "banach_example1.prob", "--seed", "4"])
    assert status == EXIT_OK
    h = header(report)
    got = [float(h[k]) for k in "klmn"]
    assert got == pytest.approx([1 / 3, 1 / 4, 1 / 8, 1 / 6], abs=1e-6)
    status, report = run_command(["estimate", "banach_example1.prob", "--class", "kannan"])
    assert status == EXIT_FLAGGED and header(report)["status"] == "not-certifiable"


def test_certify_command():
    status, report = run_command(["certify", "banach_example1.prob", "--steps", "5"])
    assert status == EXIT_OK
    rows = report.split("\n\n", 1)[1].splitlines()[1:]
    assert len(rows) == 6
    for j, row in enumerate(rows):
        assert float(row.split()[1]) == pytest.approx(2.7 * (7 / 12) ** j, rel=1e-12)


def test_oracle_command(tmp_path):
    status, report = run_command(["oracle", "quasi_example2.prob"])
    assert status == EXIT_OK
    h = header(report)
    assert h["minimizer"] == "(0; 0)" and h["condition_violations"] == "0"
    p = tmp_path / "weak.prob"
    p.write_text(EX1_TEXT.replace("class.k = 1/3", "class.k = 0.1"))
    assert run_command(["oracle", str(p), "--grid", "11"])[0] == EXIT_FLAGGED


def test_usage_errors():
    assert run_command([])[0] == EXIT_USAGE
    assert run_command(["fly", "banach_example1.prob"])[0] == EXIT_USAGE
    assert run_command(["solve", "banach_example1.prob", "--tol", "abc"])[0] == EXIT_USAGE
    assert run_command(["solve", "missing.prob"])[0] == EXIT_USAGE
    assert run_command(["oracle", "banach_example1.prob", "--grid", "1"])[0] == EXIT_USAGE
    status, text = run_command(["estimate", "banach_example1.prob", "--class", "nope"])
    assert status == EXIT_USAGE and text.startswith("error:")


@pytest.mark.parametrize("cmd", ["solve", "verify", "estimate", "certify", "oracle"])
def test_report_determinism(cmd):
    argv = [cmd, "banach_unique.prob", "--seed", "17", "--samples", "300"]
    assert run_command(argv) == run_command(argv)


def test_seed_changes_sampling_only_report():
    a = run_command(["verify", "banach_example1.prob", "--seed", "1"])[1]
    b = run_command(["verify", "banach_example1.prob", "--seed", "2"])[1]
    assert header(a)["verdict"] == header(b)["verdict"] == "ok"


def test_main_writes_streams(capsys):
    assert main(["verify", "banach_example1.prob"]) == EXIT_OK
    assert "verdict=ok" in capsys.readouterr().out
    assert main(["solve", "nope.prob"]) == EXIT_USAGE
    assert capsys.readouterr().err.startswith("error:")


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "fgcoupled", "certify", "banach_unique.prob",
                          "--steps", "2"], capture_output=True, text=True)
    assert out.returncode == 0 and "bound_form=joint-D1" in out.stdout
