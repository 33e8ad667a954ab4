"""Command surface: parsing, exit codes, JSON reports, golden files."""

import json
import random
import subprocess
import sys
from pathlib import Path

import pytest

from pshdef.cli import main
from pshdef.exprparse import ExprSyntaxError, parse_wpoly
from pshdef.report import load_schema
from pshdef.wirtinger import canonical_str

try:
    import jsonschema
except ImportError:  # pragma: no cover
    jsonschema = None

R10 = "Im(w) + abs2(z)^2 + 100*abs2(z)^3 + 4*Re(z)*Re(w) - 10*Re(w)^2"
R8 = "Im(w) + abs2(z)^2 + 100*abs2(z)^3 + 4*Re(z)*Re(w) - 8*Re(w)^2"
R7 = "Im(w) + abs2(z)^2 + 100*abs2(z)^3 + 4*Re(z)*Re(w) - 7*Re(w)^2"
BALL = "Im(w) + abs2(z)"
C3 = "Im(w) + abs2(z1)^2 + abs2(z2) + 4*Re(z1)*Re(w) - 10*Re(w)^2"

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def check_schema(payload: dict):
    if jsonschema is None:
        pytest.skip("jsonschema not installed")
    jsonschema.validate(payload, load_schema())


# -- expression round trips ------------------------------------------------


def random_expr(rng: random.Random, depth: int = 0) -> str:
    atoms = ["z", "zbar", "w", "wbar", "i", str(rng.randint(1, 9))]
    if rng.random() < 0.3:
        atoms.append(f"{rng.randint(1, 9)}/{rng.randint(1, 9)}")
    if depth >= 3:
        return rng.choice(atoms)
    roll = rng.random()
    if roll < 0.25:
        return rng.choice(atoms)
    if roll < 0.40:
        f = rng.choice(["Re", "Im", "conj", "abs2"])
        return f"{f}({random_expr(rng, depth + 1)})"
    if roll < 0.55:
        return f"({random_expr(rng, depth + 1)})^{rng.randint(1, 3)}"
    if roll < 0.70:
        return f"-({random_expr(rng, depth + 1)})"
    op = rng.choice(["+", "-", "*"])
    return f"({random_expr(rng, depth + 1)} {op} {random_expr(rng, depth + 1)})"


def test_fifty_random_round_trips():
    rng = random.Random(2024)
    done = 0
    while done < 50:
        src = random_expr(rng)
        p = parse_wpoly(src, nz=1)
        text = canonical_str(p)
        assert parse_wpoly(text, nz=1) == p
        done += 1


def test_real_mode_round_trip():
    from pshdef.exprparse import parse_rpoly
    from pshdef.realconvex import canonical_rstr

    for src in ("y + x^2", "y + x^4 - 2*x*y", "y"):
        p = parse_rpoly(src, 1)
        assert parse_rpoly(canonical_rstr(p), 1) == p


def test_syntax_errors_have_positions():
    with pytest.raises(ExprSyntaxError, match="col"):
        parse_wpoly("z ^ (1/2)", nz=1)
    with pytest.raises(ExprSyntaxError):
        parse_wpoly("Im(w) +", nz=1)
    with pytest.raises(ExprSyntaxError, match="unknown variable"):
        parse_wpoly("Im(w) + q", nz=1)


# -- levi ------------------------------------------------------------------


def test_levi_ball(capsys):
    code, out, _ = run(capsys, "levi", "--r", BALL)
    assert code == 0
    assert out.strip() == "1/4"


def test_levi_real(capsys):
    code, out, _ = run(capsys, "levi", "--r", "y + x^2", "--real")
    assert code == 0
    assert out.strip() == "2"


def test_levi_multivariable(capsys):
    code, out, _ = run(capsys, "levi", "--r", C3)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("L_1 = ")
    assert lines[1].startswith("L_2 = ")


def test_levi_json(capsys):
    code, out, _ = run(capsys, "levi", "--r", BALL, "--json")
    assert code == 0
    d = json.loads(out)
    assert d["status"] == "ok"
    assert d["levi"] == ["1/4"]
    check_schema(d)


# -- analyze ---------------------------------------------------------------


def test_analyze_r10(capsys):
    code, out, _ = run(capsys, "analyze", "--r", R10)
    assert code == 0
    assert out.startswith("pass")
    assert "gate Dominated" in out


def test_analyze_r8_gate(capsys):
    code, out, _ = run(capsys, "analyze", "--r", R8, "--json")
    assert code == 0
    d = json.loads(out)
    assert d["status"] == "pass"
    assert d["gate"]["status"] == "NotDominated"
    assert d["levi"]["negative_count"] == 0
    assert d["levi_origin"] == ["0"]
    check_schema(d)


def test_analyze_r7_fails(capsys):
    code, out, _ = run(capsys, "analyze", "--r", R7, "--samples", "10000", "--json")
    assert code == 1
    d = json.loads(out)
    assert d["status"] == "fail"
    assert d["levi"]["min_value"] < -1e-9
    check_schema(d)


def test_analyze_real_modes(capsys):
    code, out, _ = run(capsys, "analyze", "--r", "y + x^2", "--real")
    assert code == 0
    code, out, _ = run(capsys, "analyze", "--r", "y - x^2", "--real", "--json")
    assert code == 1
    d = json.loads(out)
    assert d["status"] == "fail"
    assert d["convexity_precheck"]["witness"] is not None
    check_schema(d)


def test_analyze_csv(capsys, tmp_path):
    target = tmp_path / "points.csv"
    code, _, _ = run(
        capsys, "analyze", "--r", R10, "--samples", "50", "--csv-points", str(target)
    )
    assert code == 0
    lines = target.read_text().strip().splitlines()
    assert lines[0] == "index,re_z,im_z,re_w,im_w,residual"
    assert len(lines) == 51


# -- construct -------------------------------------------------------------


def test_construct_r10_json(capsys):
    code, out, _ = run(capsys, "construct", "--r", R10, "--json")
    assert code == 0
    d = json.loads(out)
    assert d["status"] == "Certified"
    assert d["command"] == "construct"
    assert d["final"]["T"] == "-4*Im(z)"
    assert d["final"]["K"] == 64
    check_schema(d)


def test_construct_golden_r10(capsys):
    code, out, _ = run(capsys, "construct", "--r", R10, "--json")
    assert code == 0
    assert out == (GOLDEN / "r10_report.json").read_text()


def test_construct_golden_r8(capsys):
    code, out, _ = run(capsys, "construct", "--r", R8, "--json")
    assert code == 0
    assert out == (GOLDEN / "r8_report.json").read_text()


def test_construct_trace_text(capsys):
    code, out, _ = run(capsys, "construct", "--r", R8)
    assert code == 0
    assert "status: Certified" in out
    assert "K search: failed (witness recorded)" in out
    assert "absorbed:" in out
    assert "final: T = -4*Im(z) + 8*Im(z)^2 - 8*Re(z)^2, K = 16" in out


def test_construct_r7_obstructed(capsys):
    code, out, _ = run(capsys, "construct", "--r", R7, "--samples", "10000", "--json")
    assert code == 1
    d = json.loads(out)
    assert d["status"] == "Obstructed"
    assert d["obstruction"]["kind"] == "not_pseudoconvex"
    assert d["obstruction"]["witness"]["min_value"] < 0
    check_schema(d)


def test_construct_c3_exhausted(capsys):
    code, out, _ = run(capsys, "construct", "--r", C3, "--samples", "600", "--json")
    assert code == 2
    d = json.loads(out)
    assert d["status"] == "Exhausted"
    assert d["obstruction"]["kind"] in ("fixpoint", "max_stages", "k_search_failed")
    check_schema(d)


def test_construct_real(capsys):
    code, out, _ = run(capsys, "construct", "--r", "y + x^2", "--real", "--json")
    assert code == 0
    d = json.loads(out)
    assert d["mode"] == "real"
    assert d["status"] == "Certified"
    check_schema(d)
    code, _, _ = run(capsys, "construct", "--r", "y - x^2", "--real")
    assert code == 1


def test_construct_deterministic(capsys):
    code1, out1, _ = run(capsys, "construct", "--r", R10, "--json")
    code2, out2, _ = run(capsys, "construct", "--r", R10, "--json")
    assert (code1, out1) == (code2, out2)


# -- verify ----------------------------------------------------------------


def test_verify_certified_r10(capsys):
    code, out, _ = run(
        capsys, "verify", "--r", R10, "--h", "1 - 4*Im(z)", "--K", "64"
    )
    assert code == 0
    assert out.startswith("pass")


def test_verify_certified_r8(capsys):
    code, out, _ = run(
        capsys,
        "verify",
        "--r",
        R8,
        "--h",
        "1 - 4*Im(z) + 8*Im(z)^2 - 8*Re(z)^2",
        "--K",
        "16",
    )
    assert code == 0


def test_verify_trivial_h_fails(capsys):
    code, out, _ = run(capsys, "verify", "--r", R10, "--h", "1", "--json")
    assert code == 1
    d = json.loads(out)
    assert d["status"] == "fail"
    assert abs(d["checks"]["psd"]["min_diag"] + 5.0) <= 1e-9
    check_schema(d)


def test_verify_h_must_be_one_at_origin(capsys):
    code, _, err = run(capsys, "verify", "--r", R10, "--h", "2 + Re(z)")
    assert code == 64
    assert "h must equal 1 at the origin" in err


def test_verify_h_must_be_real(capsys):
    code, _, err = run(capsys, "verify", "--r", R10, "--h", "1 + z")
    assert code == 64
    assert "real" in err


def test_verify_collar_and_csv(capsys, tmp_path):
    pts = tmp_path / "pts.csv"
    stats = tmp_path / "stats.csv"
    code, out, _ = run(
        capsys,
        "verify",
        "--r",
        R10,
        "--h",
        "1 - 4*Im(z)",
        "--K",
        "64",
        "--samples",
        "200",
        "--collar",
        "1e-4",
        "--csv-points",
        str(pts),
        "--csv-stats",
        str(stats),
        "--json",
    )
    assert code == 0
    d = json.loads(out)
    assert d["collar"]["non_normative"] is True
    assert d["collar"]["psd"]["passed"]
    check_schema(d)
    assert pts.read_text().splitlines()[0] == "index,re_z,im_z,re_w,im_w,residual"
    header = stats.read_text().splitlines()[0]
    assert header == "index,diag_1,diag_2,minor_1,least_eig"


def test_verify_real_accepts_certificate(capsys):
    code, out, _ = run(
        capsys,
        "verify",
        "--r",
        "y + x^2",
        "--h",
        "2 + y + x^2",
        "--real",
    )
    assert code == 0


def test_verify_real_rejects_K_flag(capsys):
    code, _, err = run(
        capsys, "verify", "--r", "y + x^2", "--h", "1", "--real", "--K", "4"
    )
    assert code == 64
    assert "complex-lane flag" in err


def test_verify_real_vanishing_h_fails(capsys):
    code, out, _ = run(
        capsys, "verify", "--r", "y + x^2", "--h", "1 - 300*x", "--real", "--json"
    )
    assert code == 1
    d = json.loads(out)
    assert any("1/2" in m for m in d["messages"])


# -- usage plumbing --------------------------------------------------------


def test_bad_expression_exit_64(capsys):
    code, _, err = run(capsys, "construct", "--r", "z ^ (1/2)")
    assert code == 64
    assert "col" in err


def test_normal_form_violation_exit_64(capsys):
    code, _, err = run(capsys, "construct", "--r", "Re(w)")
    assert code == 64
    assert "error:" in err


def test_missing_subcommand_exit_64(capsys):
    assert main([]) == 64


def test_console_script_installed():
    proc = subprocess.run(
        [sys.executable, "-m", "pshdef.cli", "levi", "--r", BALL],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "1/4"
