"""Shared fixtures and deterministic polynomial generators."""

import random
from fractions import Fraction

import numpy as np
import pytest

from pshdef.catalog import ball_like, half_space, mixed_c3_example, type4_domain
from pshdef.construct import run_construction
from pshdef.verify import sample_boundary
from pshdef.wirtinger import WPoly, im_w, im_z, re_w, re_z


@pytest.fixture(scope="session")
def r10():
    return type4_domain(10)


@pytest.fixture(scope="session")
def r8():
    return type4_domain(8)


@pytest.fixture(scope="session")
def r7():
    return type4_domain(7)


@pytest.fixture(scope="session")
def ball():
    return ball_like(1)


@pytest.fixture(scope="session")
def halfspace():
    return half_space(1)


@pytest.fixture(scope="session")
def c3_mixed():
    return mixed_c3_example()


@pytest.fixture(scope="session")
def r10_report(r10):
    return run_construction(r10)


@pytest.fixture(scope="session")
def r8_report(r8):
    return run_construction(r8)


@pytest.fixture(scope="session")
def small_shell(r10):
    return sample_boundary(r10, 1e-2, 300, seed=0)


# -- deterministic random polynomials -------------------------------------


def random_real_monomial(rng: random.Random, nz: int, max_deg: int) -> WPoly:
    """A product of Re/Im atoms with total degree in [2, max_deg]."""
    atoms = []
    for j in range(nz):
        atoms.append(re_z(nz, j))
        atoms.append(im_z(nz, j))
    atoms.append(re_w(nz))
    deg = rng.randint(2, max_deg)
    p = WPoly.one(nz)
    for _ in range(deg):
        p = p * rng.choice(atoms)
    c = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
    return p.scale(c if c else Fraction(1))


def random_normal_form(rng: random.Random, nz: int = 1, max_deg: int = 6) -> WPoly:
    """A valid defining polynomial Im w + F, F real of degree 2..max_deg."""
    F = WPoly.zero(nz)
    for _ in range(rng.randint(1, 4)):
        F = F + random_real_monomial(rng, nz, max_deg)
    return im_w(nz) + F


def random_real_T(rng: random.Random, nz: int = 1, max_deg: int = 3) -> WPoly:
    """A real multiplier part T vanishing at 0, degree 1..max_deg."""
    atoms = []
    for j in range(nz):
        atoms.append(re_z(nz, j))
        atoms.append(im_z(nz, j))
    atoms.append(re_w(nz))
    atoms.append(im_w(nz))
    T = WPoly.zero(nz)
    for _ in range(rng.randint(1, 3)):
        deg = rng.randint(1, max_deg)
        p = WPoly.one(nz)
        for _ in range(deg):
            p = p * rng.choice(atoms)
        T = T + p.scale(Fraction(rng.randint(-3, 3), rng.randint(1, 4)))
    return T


def random_wpoly(rng: random.Random, nz: int = 1, max_deg: int = 4) -> WPoly:
    """A random complex polynomial in z, zbar, w, wbar."""
    from pshdef.gaussrat import GaussianRational

    p = WPoly.zero(nz)
    vars_ = []
    for j in range(nz):
        vars_.append(WPoly.var_z(nz, j))
        vars_.append(WPoly.var_zbar(nz, j))
    vars_.append(WPoly.var_w(nz))
    vars_.append(WPoly.var_wbar(nz))
    for _ in range(rng.randint(1, 5)):
        m = WPoly.one(nz)
        for _ in range(rng.randint(0, max_deg)):
            m = m * rng.choice(vars_)
        c = GaussianRational(
            Fraction(rng.randint(-5, 5), rng.randint(1, 3)),
            Fraction(rng.randint(-5, 5), rng.randint(1, 3)),
        )
        p = p + m.scale(c)
    return p


def fd_dz(p: WPoly, z, w: complex, j: int = 0, step: float = 1e-5):
    """Central-difference Wirtinger z_j derivative: (d/dx - i d/dy)/2."""
    zs = [z] if p.nz == 1 and not isinstance(z, (tuple, list)) else list(z)

    def at(dz):
        pt = list(zs)
        pt[j] = pt[j] + dz
        return complex(p.eval(pt[0] if p.nz == 1 else tuple(pt), complex(w)))

    dx = (at(step) - at(-step)) / (2 * step)
    dy = (at(1j * step) - at(-1j * step)) / (2 * step)
    return 0.5 * (dx - 1j * dy)


def fd_dw(p: WPoly, z, w: complex, step: float = 1e-5):
    """Central-difference Wirtinger w derivative."""

    def at(dw):
        return complex(p.eval(z, complex(w) + dw))

    dx = (at(step) - at(-step)) / (2 * step)
    dy = (at(1j * step) - at(-1j * step)) / (2 * step)
    return 0.5 * (dx - 1j * dy)
