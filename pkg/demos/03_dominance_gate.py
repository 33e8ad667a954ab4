"""
When does the Levi form dominate the gradient?
==============================================

The construction hinges on |r_z|^2 <= C * L_r near the boundary point.
Probe curves hunt for directions where the ratio escapes.
"""

from pshdef.catalog import type4_domain
from pshdef.dominance import levi_dominance_gate

# A = 10: an exact positive-definite certificate settles it
v = levi_dominance_gate(type4_domain(10))
print("A=10:", v.status)
print("  reason:", v.reason)
print("  constant C =", v.constant)

# A = 8: the Levi form vanishes to higher order along one real curve,
# and the probe family finds it
v = levi_dominance_gate(type4_domain(8))
print("A=8:", v.status)
print("  reason:", v.reason)
d = v.witness["direction"]
print("  escape direction (Re z, Im z, Re w):", [round(float(x), 5) for x in d])
print("  Im z ~ 0 and Re z ~ 4 Re w on the curve")
print("  ratio along the curve:", [f"{x:.3g}" for x in v.witness["ratios"][-5:]])
