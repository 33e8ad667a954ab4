"""
Exact complex polynomials and Wirtinger derivatives
===================================================

Polynomials in z, zbar, w, wbar with Gaussian-rational coefficients.
Differentiation treats z and zbar as independent variables.
"""

from fractions import Fraction

from pshdef.wirtinger import WPoly, abs2, canonical_str, im_z, re_z, realify

z = WPoly.var_z(1)
w = WPoly.var_w(1)

# |z|^2 expands to z zbar, and its z-derivative is zbar
p = abs2(z)
print("p      =", canonical_str(p))
print("dp/dz  =", canonical_str(p.dz(0)))
print("dp/dzb =", canonical_str(p.dzbar(0)))

# Re and Im are polynomials too, so identities stay exact
q = re_z(1) * re_z(1) + im_z(1) * im_z(1)
print("Re^2 + Im^2 =", canonical_str(q), "equals |z|^2:", q == p)

# realify(f) = f + conj(f) always produces a real polynomial
f = z * z * w.conjugate() + z.scale(Fraction(1, 3))
g = realify(f)
print("realify:", canonical_str(g))
print("self-conjugate:", g == g.conjugate())

# evaluation at rational points is exact (no floats involved)
val = p.eval(Fraction(3, 7), 0)
print("p(3/7) =", val, "== 9/49:", val.re == Fraction(9, 49))
