"""Stock defining functions used by tests, demos, and the docs."""

from __future__ import annotations

from fractions import Fraction

from .cr import DefiningFunction, validate_normal_form
from .wirtinger import WPoly, abs2, im_w, re_w, re_z


def half_space(nz: int = 1) -> DefiningFunction:
    """Levi-flat model: r = Im w."""
    return validate_normal_form(im_w(nz))


def ball_like(nz: int = 1) -> DefiningFunction:
    """Strongly pseudoconvex model: r = Im w + sum |z_j|^2."""
    p = im_w(nz)
    for j in range(nz):
        p = p + abs2(WPoly.var_z(nz, j))
    return validate_normal_form(p)


def type4_domain(A) -> DefiningFunction:
    """Pseudoconvex (iff A >= 8) boundary of D'Angelo type 4 in C^2.

    r = Im w + |z|^4 + 100 |z|^6 + 4 Re z Re w - A (Re w)^2.
    Never plurisubharmonic itself: r_{w wbar} = -A/2.
    """
    nz = 1
    z2 = abs2(WPoly.var_z(nz))
    p = (
        im_w(nz)
        + z2 * z2
        + (z2 * z2 * z2).scale(100)
        + (re_z(nz) * re_w(nz)).scale(4)
        - (re_w(nz) * re_w(nz)).scale(Fraction(A))
    )
    return validate_normal_form(p)


def mixed_c3_example() -> DefiningFunction:
    """C^3 variant: degenerate in z_1, strongly convex in z_2.

    r = Im w + |z1|^4 + |z2|^2 + 4 Re z1 Re w - 10 (Re w)^2.
    """
    nz = 2
    z1sq = abs2(WPoly.var_z(nz, 0))
    p = (
        im_w(nz)
        + z1sq * z1sq
        + abs2(WPoly.var_z(nz, 1))
        + (re_z(nz, 0) * re_w(nz)).scale(4)
        - (re_w(nz) * re_w(nz)).scale(10)
    )
    return validate_normal_form(p)
