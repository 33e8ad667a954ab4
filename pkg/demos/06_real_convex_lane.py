"""
The real-convex analog
======================

Same story one level down: for a convex boundary y = -F(x) the
multiplier h = 1 + Kr + r_y makes r h convex near the origin.
"""

from pshdef.exprparse import parse_rpoly
from pshdef.realconvex import convex_multiplier, validate_real_normal_form

for src in ("y + x^2", "y + x^4", "y - x^2"):
    r = validate_real_normal_form(parse_rpoly(src, 1))
    rep = convex_multiplier(r)
    print(f"r = {src}")
    print(" ", rep.trace().replace("\n", "\n  "))
    print()
