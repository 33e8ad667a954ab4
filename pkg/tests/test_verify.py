"""Numeric verification: shells, PSD scans, the determinant identity."""

import numpy as np
import pytest
from fractions import Fraction

from pshdef.catalog import ball_like, half_space, type4_domain
from pshdef.verify import (
    BoundaryShell,
    IdentityCheckResult,
    identity_check_prop31,
    hessian_values,
    least_eigenvalues,
    levi_scan,
    necessary_conditions_check,
    project_to_boundary,
    psd_check,
    sample_boundary,
    sample_collar,
)
from pshdef.wirtinger import WPoly, abs2, im_z, re_z


def one_point_shell(nz=1):
    return BoundaryShell(
        radius=0.0,
        seed=0,
        Z=np.zeros((1, nz), dtype=complex),
        W=np.zeros(1, dtype=complex),
        residuals=np.zeros(1),
    )


def test_shell_invariants(r10, small_shell):
    s = small_shell
    assert s.count == 300
    assert float(np.max(s.residuals)) <= 1e-12
    assert float(np.max(s.norms())) <= 1e-2
    again = sample_boundary(r10, 1e-2, 300, seed=0)
    assert np.array_equal(s.Z, again.Z)
    assert np.array_equal(s.W, again.W)


def test_shell_seed_changes_points(r10, small_shell):
    other = sample_boundary(r10, 1e-2, 300, seed=1)
    assert not np.array_equal(small_shell.Z, other.Z)


def test_projection_ball_point(ball):
    Z = np.array([[0.1 + 0.0j]])
    W, ok = project_to_boundary(ball, Z, np.array([0.0]))
    assert ok[0]
    assert abs(W[0].real) <= 1e-15
    assert abs(W[0].imag - (-0.01)) <= 1e-12


def test_projection_halfspace_point(halfspace):
    Z = np.array([[0.1 + 0.0j]])
    W, ok = project_to_boundary(halfspace, Z, np.array([0.004]))
    assert ok[0]
    assert W[0] == 0.004 + 0j


def test_projection_r8_point(r8):
    Z = np.array([[0.04 + 0.0j]])
    W, ok = project_to_boundary(r8, Z, np.array([0.01]))
    assert ok[0]
    val = complex(r8.poly.eval(complex(Z[0, 0]), complex(W[0])))
    assert abs(val.real) <= 1e-12


def test_psd_identity_hessian(ball):
    f = abs2(WPoly.var_z(1)) + abs2(WPoly.var_w(1))
    shell = sample_boundary(ball, 1e-2, 200, seed=0)
    res = psd_check(f, shell)
    assert res.passed
    assert res.min_eig == 1.0
    assert res.min_diag == 1.0
    assert res.min_minor == 1.0
    assert res.count == 200


def test_psd_partial_multiplier_fails(r8, r8_report):
    """No ladder K certifies the stage-1 candidate (1 - 4 Im z + K r) r."""
    ladder = r8_report.stages[0].k_search.ladder
    assert len(ladder) == 21
    assert all(not step["passed"] for step in ladder)
    # the violation lives on the boundary curve Re z = 4 Re w, Im z = 0;
    # a shell of points marching down that line defeats every K
    t = np.array([2.0**-k for k in range(5, 21)])
    Z = (4 * t).reshape(-1, 1).astype(complex)
    W, ok = project_to_boundary(r8, Z, t)
    assert ok.all()
    shell = BoundaryShell(
        radius=float(np.max(np.abs(W))) + 0.13,
        seed=0,
        Z=Z,
        W=W,
        residuals=np.zeros(len(t)),
    )
    for e in range(21):
        h = WPoly.one(1) + im_z(1).scale(Fraction(-4)) + r8.poly.scale(Fraction(2**e))
        assert not psd_check(h * r8.poly, shell).passed


def test_psd_full_multiplier_passes(r8, r8_report):
    h = r8_report.final.h_poly(r8)
    shell = sample_boundary(r8, r8_report.verification["radius"], 2000, seed=0)
    res = psd_check(h * r8.poly, shell, 1e-9)
    assert res.passed


def test_identity_ball_origin(ball):
    res = identity_check_prop31(ball, 5, WPoly.zero(1), one_point_shell())
    assert res.max_lhs == 2.5
    assert res.max_deviation == 0.0
    assert res.passed


def test_identity_k_zero_exact(r10, small_shell):
    T = im_z(1).scale(Fraction(-4))
    res = identity_check_prop31(r10, 0, T, small_shell)
    assert res.max_deviation == 0.0
    assert res.passed


def test_identity_r10_k3(r10):
    shell = sample_boundary(r10, 1e-2, 100, seed=0)
    res = identity_check_prop31(r10, 3, im_z(1).scale(Fraction(-4)), shell)
    assert res.passed
    assert res.tolerance == 1e-8 * (1 + res.max_lhs)


def test_identity_deviation_tracks_residual(r10):
    """Off-boundary error enters the identity linearly, to leading order."""
    shell = sample_boundary(r10, 1e-2, 100, seed=0)
    T = im_z(1).scale(Fraction(-4))

    def dev(eps):
        off = BoundaryShell(
            radius=shell.radius,
            seed=shell.seed,
            Z=shell.Z,
            W=shell.W + 1j * eps,
            residuals=shell.residuals,
        )
        return identity_check_prop31(r10, 3, T, off).max_deviation

    d1 = dev(1e-7)
    d2 = dev(2e-7)
    assert d1 > 0
    assert 1.5 <= d2 / d1 <= 2.5


def test_necessary_certified_r10(r10, r10_report):
    h = r10_report.final.h_poly(r10)
    shell = sample_boundary(r10, 1e-2, 500, seed=0)
    res = necessary_conditions_check(r10, h, shell, K=r10_report.final.K)
    assert res.all_hold
    assert len(res.inequalities) == 4
    for rec in res.inequalities:
        assert rec.min_slack > 0
    assert res.log_deriv_verdict.status == "Dominated"


def test_necessary_trivial_h_fails(r8):
    shell = sample_boundary(r8, 1e-2, 500, seed=0)
    res = necessary_conditions_check(r8, WPoly.one(1), shell)
    assert not res.all_hold


def test_necessary_halfspace_equalities(halfspace):
    shell = sample_boundary(halfspace, 1e-2, 200, seed=0)
    res = necessary_conditions_check(halfspace, WPoly.one(1), shell, check_log_deriv=False)
    assert res.all_hold
    for rec in res.inequalities:
        assert rec.min_slack == 0.0


def test_necessary_rejects_vanishing_h(r10):
    shell = sample_boundary(r10, 1e-2, 500, seed=0)
    h = WPoly.one(1) + re_z(1).scale(Fraction(-150))
    with pytest.raises(ValueError, match="vanishes"):
        necessary_conditions_check(r10, h, shell)


def test_levi_scan_clean(r10):
    scan = levi_scan(r10, 1e-2, 2000, seed=0)
    assert scan.nonnegative
    assert scan.negative_count == 0
    assert scan.count == 2000


def test_levi_scan_finds_negative(r7):
    scan = levi_scan(r7, 1e-2, 10_000, seed=0)
    assert scan.min_value < -1e-9
    assert not scan.nonnegative
    assert scan.negative_count > 0
    assert scan.worst_point["w"] is not None


def test_collar_points_inside(r10):
    collar = sample_collar(r10, 1e-2, 200, seed=0, delta=1e-4)
    vals = np.array(
        [complex(r10.poly.eval(complex(z[0]), complex(w))).real
         for z, w in zip(collar.Z, collar.W)]
    )
    assert np.all(vals < 0)
    assert np.all(vals > -1e-4)
    assert float(np.max(collar.norms())) <= 1e-2


def test_least_eigenvalues_closed_form(r10, small_shell):
    H = hessian_values(r10.poly, small_shell.Z, small_shell.W)
    fast = least_eigenvalues(H)
    ref = np.linalg.eigvalsh(H)[:, 0]
    assert np.max(np.abs(fast - ref)) <= 1e-12
