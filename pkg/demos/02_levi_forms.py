"""
Levi forms of model boundaries
==============================

The tangential Levi form decides pseudoconvexity.  For a defining
function in normal form r = Im w + F it is a polynomial, so degenerate
directions can be read off symbolically.
"""

from pshdef.catalog import ball_like, half_space, type4_domain
from pshdef.cr import levi_form, levi_origin_value
from pshdef.wirtinger import canonical_str

# the ball has constant positive Levi form: strongly pseudoconvex
ball = ball_like(1)
print("ball:      L =", canonical_str(levi_form(ball, 0)))

# the half space Im w < 0 is Levi flat
flat = half_space(1)
print("halfspace: L =", canonical_str(levi_form(flat, 0)))

# a type-4 boundary: L vanishes at 0, so the origin value alone
# cannot distinguish pseudoconvex from not
for A in (7, 8, 10):
    r = type4_domain(A)
    print(f"A={A}: L(0) =", levi_origin_value(r))

# the scan settles it numerically: A = 7 fails, A = 8 just passes
from pshdef.verify import levi_scan

for A, n in ((7, 10_000), (8, 2000), (10, 2000)):
    scan = levi_scan(type4_domain(A), 1e-2, n, seed=0)
    print(f"A={A}: min Levi over {scan.count} boundary points = {scan.min_value:.3e}")
