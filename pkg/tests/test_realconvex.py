"""Real convex lane: RPoly, boundary sampling, the y-derivative multiplier."""

import random
from fractions import Fraction

import numpy as np
import pytest

from pshdef.exprparse import parse_rpoly
from pshdef.realconvex import (
    RPoly,
    RealNormalFormError,
    canonical_rstr,
    convex_multiplier,
    convexity_check,
    project_to_real_boundary,
    real_hessian_check,
    real_hessian_values,
    real_normal_form_violations,
    sample_real_boundary,
    tangential_form,
    validate_real_normal_form,
)

X = RPoly.var_x(1)
Y = RPoly.var_y(1)


def rp(text, nv=1):
    return validate_real_normal_form(parse_rpoly(text, nv))


def random_rpoly(rng: random.Random, nx: int = 1, max_deg: int = 4) -> RPoly:
    vars_ = [RPoly.var_x(nx, j) for j in range(nx)] + [RPoly.var_y(nx)]
    p = RPoly.zero(nx)
    for _ in range(rng.randint(1, 5)):
        m = RPoly.const(nx, Fraction(rng.randint(-5, 5), rng.randint(1, 3)))
        for _ in range(rng.randint(0, max_deg)):
            m = m * rng.choice(vars_)
        p = p + m
    return p


def test_rpoly_arithmetic():
    p = (X + Y) ** 2
    assert p == X * X + (X * Y).scale(2) + Y * Y
    assert (p - p).is_zero()
    assert p.degree() == 2
    assert (X * X * Y).min_degree() == 3
    assert RPoly.const(1, 5).constant_value() == 5
    assert X.constant_value() is None
    assert RPoly.zero(1).constant_value() == 0


def test_rpoly_derivatives():
    p = X * X * Y + Y * Y * Y
    assert p.d_x(0) == (X * Y).scale(2)
    assert p.d_y() == X * X + (Y * Y).scale(3)


def test_rpoly_fd_agreement():
    rng = random.Random(31)
    for _ in range(10):
        p = random_rpoly(rng)
        dx = p.d_x(0)
        for _ in range(5):
            x = rng.uniform(-0.3, 0.3)
            y = rng.uniform(-0.3, 0.3)
            Xa = np.array([[x]])
            Ya = np.array([y])
            h = 1e-6
            num = (
                p.eval(np.array([[x + h]]), Ya) - p.eval(np.array([[x - h]]), Ya)
            )[0] / (2 * h)
            assert abs(dx.eval(Xa, Ya)[0] - num) <= 1e-6 * (1 + abs(num))


def test_rpoly_round_trip():
    rng = random.Random(37)
    for _ in range(20):
        p = random_rpoly(rng)
        assert parse_rpoly(canonical_rstr(p), 1) == p


def test_real_violations():
    assert real_normal_form_violations(Y + X * X) == []
    assert any("constant" in v for v in real_normal_form_violations(Y + RPoly.const(1, 1)))
    assert any("y" in v for v in real_normal_form_violations(Y.scale(2) + X * X))
    assert any("linear" in v for v in real_normal_form_violations(Y + X))
    with pytest.raises(RealNormalFormError):
        validate_real_normal_form(Y + X)


def test_projection_and_shell():
    r = validate_real_normal_form(Y + X * X)
    Yv, ok = project_to_real_boundary(r, np.array([[0.1]]))
    assert ok[0]
    assert abs(Yv[0] + 0.01) <= 1e-12
    shell = sample_real_boundary(r, 1e-2, 200, seed=0)
    assert shell.count == 200
    assert float(np.max(shell.residuals)) <= 1e-12
    assert float(np.max(shell.norms())) <= 1e-2
    again = sample_real_boundary(r, 1e-2, 200, seed=0)
    assert np.array_equal(shell.X, again.X)
    assert np.array_equal(shell.Y, again.Y)


def test_hessian_check_examples():
    conv = validate_real_normal_form(Y + X * X)
    shell = sample_real_boundary(conv, 1e-2, 200, seed=0)

    bowl = X * X + Y * Y
    res = real_hessian_check(bowl, shell)
    assert res.passed
    assert res.min_eig == 2.0

    quart = validate_real_normal_form(Y + X**4)
    qshell = sample_real_boundary(quart, 1e-2, 200, seed=0)
    self_res = real_hessian_check(quart.poly, qshell)
    assert self_res.passed
    assert self_res.min_eig >= -1e-9
    assert self_res.min_eig <= 1e-6  # flat direction: smallest eigenvalue near 0

    concave = Y - X * X
    bad = real_hessian_check(concave, shell)
    assert not bad.passed
    assert bad.min_diag == -2.0


def test_tangential_form_values():
    conv = validate_real_normal_form(Y + X * X)
    tf = tangential_form(conv, 0)
    assert tf.coeff((0, 0)) == 2
    conc = validate_real_normal_form(Y - X * X)
    assert tangential_form(conc, 0).coeff((0, 0)) == -2


def test_tangential_form_fd_probe():
    """Second difference along the tangent line matches the form."""
    r = validate_real_normal_form(Y + X**4 + X * X * Y)
    rng = random.Random(3)
    p = r.poly
    for _ in range(10):
        x = rng.uniform(-0.05, 0.05)
        Yv, ok = project_to_real_boundary(r, np.array([[x]]))
        assert ok[0]
        y = float(Yv[0])
        Xa, Ya = np.array([[x]]), np.array([y])
        vx = float(r.d_y().eval(Xa, Ya)[0])
        vy = -float(r.d_x(0).eval(Xa, Ya)[0])
        t = 1e-4

        def at(s):
            return float(p.eval(np.array([[x + s * vx]]), np.array([y + s * vy]))[0])

        second = (at(t) - 2 * at(0) + at(-t)) / (t * t)
        form = float(tangential_form(r, 0).eval(Xa, Ya)[0])
        assert abs(second - form) <= 1e-6 * (1 + abs(form))


def test_convexity_check_witness():
    conc = validate_real_normal_form(Y - X * X)
    shell = sample_real_boundary(conc, 1e-2, 300, seed=0)
    out = convexity_check(conc, shell)
    assert not out["passed"]
    assert out["witness"]["j"] == 1
    assert abs(out["witness"]["value"] + 2.0) <= 1e-9
    assert out["min_value"] < -1


def test_multiplier_parabola():
    rep = convex_multiplier(rp("y + x^2"))
    assert rep.status == "Certified"
    assert rep.final["K"] <= 2**4
    assert rep.final["T"] == "1"
    assert rep.final["stage"] == 0
    assert rep.verification["hessian"]["passed"]
    assert any("transplanted" in m for m in rep.messages)


def test_multiplier_quartic():
    rep = convex_multiplier(rp("y + x^4"))
    assert rep.status == "Certified"
    assert rep.final["K"] >= 1
    assert rep.verification["hessian"]["passed"]


def test_multiplier_flat_halfspace():
    rep = convex_multiplier(rp("y"))
    assert rep.status == "Certified"
    assert rep.final["K"] == 1


def test_multiplier_concave_obstructed():
    rep = convex_multiplier(rp("y - x^2"))
    assert rep.status == "Obstructed"
    assert rep.obstruction["kind"] == "not_convex"
    assert rep.final is None
    assert abs(rep.obstruction["witness"]["value"] + 2.0) <= 1e-9


def test_multiplier_two_variables():
    rep = convex_multiplier(rp("y + x1^2 + x2^4", 3))
    assert rep.status == "Certified"
    assert rep.verification["hessian"]["passed"]


def test_real_report_shape():
    rep = convex_multiplier(rp("y + x^2"))
    d = rep.as_dict()
    assert d["schema_version"] == 1
    assert d["mode"] == "real"
    assert d["status"] == "Certified"
    assert set(d) >= {
        "defining_function",
        "config",
        "convexity_precheck",
        "stages",
        "final",
        "obstruction",
        "verification",
        "k_search",
        "messages",
    }
    assert d["defining_function"]["nx"] == 1
    tr = rep.trace()
    assert "status: Certified" in tr
