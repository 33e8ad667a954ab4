"""
Verifying a multiplier certificate
==================================

Three independent checks back a certificate: a PSD scan of the complex
Hessian, an on-boundary determinant identity, and pointwise necessary
inequalities.
"""

from fractions import Fraction

from pshdef.catalog import type4_domain
from pshdef.verify import (
    identity_check_prop31,
    necessary_conditions_check,
    psd_check,
    sample_boundary,
)
from pshdef.wirtinger import WPoly, im_z

r = type4_domain(10)
T = im_z(1).scale(Fraction(-4))
K = 64
h = WPoly.one(1) + T + r.poly.scale(Fraction(K))
shell = sample_boundary(r, 1e-2, 2000, seed=0)
print("shell:", shell.count, "points, max residual", float(shell.residuals.max()))

rho = h * r.poly
psd = psd_check(rho, shell)
print(f"psd: passed={psd.passed} min_eig={psd.min_eig:.3e} min_diag={psd.min_diag:.3e}")

ident = identity_check_prop31(r, K, T, shell)
print(f"identity: passed={ident.passed} deviation={ident.max_deviation:.3e}")

nec = necessary_conditions_check(r, h, shell, K=K)
print("necessary inequalities:")
for q in nec.inequalities:
    print(f"  {q.name}: min slack {q.min_slack:.3e} holds={q.holds}")

# the same checks fail for the trivial multiplier h = 1
bad = psd_check(r.poly, shell)
print(f"h=1: passed={bad.passed} min_diag={bad.min_diag:.3e} (r_wwbar = -5)")
