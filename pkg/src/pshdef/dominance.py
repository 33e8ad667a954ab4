"""Dominance testing: is |P|^2 controlled by the Levi form near the origin?

The question "does |P|^2 <= C * B hold on the boundary near 0" is decided
three ways, in order:

1. Exact certificates.  P identically zero; B positive at the origin; P
   nonvanishing where B vanishes; or a rational Sylvester test proving the
   boundary-reduced quadratic part of B positive definite while every
   numerator vanishes at 0.
2. Curve escape.  A family of probe curves through 0 is projected onto the
   boundary; a ratio that keeps growing along shrinking dyadic parameters
   refutes dominance and yields a witness direction.
3. Shell stability.  If the per-shell sup ratio has stopped increasing, the
   bound is accepted with C = twice the observed sup.

Anything else is reported as Unknown with the collected data; callers
treat Unknown conservatively.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .cr import DefiningFunction
from .gaussrat import GaussianRational
from .numeval import compiled
from .wirtinger import WPoly, canonical_str

DYADIC_EXPS = tuple(range(3, 17))  # t = 2^-3 .. 2^-16
ESCAPE_RUN = 5
ESCAPE_GROWTH = 8.0
ESCAPE_FLOOR = 100.0
STABLE_FACTOR = 1.10
NUM_FLOOR = 1e-30


class Bound(Enum):
    """Right-hand side used in |P|^2 <= C * B."""

    LEVI_ONLY = "levi"
    LEVI_PLUS_GRAD = "levi+grad"


class Curve(NamedTuple):
    """Probe curve z_k(t) = zdir_k t^zpow, Re w(t) = wamp t^wpow."""

    zdir: tuple
    zpow: int
    wamp: float
    wpow: int

    def describe(self) -> str:
        zs = ", ".join(
            f"{c.real:g}{c.imag:+g}i" if c.imag else f"{c.real:g}" for c in self.zdir
        )
        return f"z=({zs})*t^{self.zpow}, Re w={self.wamp:g}*t^{self.wpow}"


@dataclass(frozen=True)
class ProbeFamily:
    """Deterministic curve + shell probe configuration."""

    curves: tuple
    shell_exps: tuple
    samples_per_shell: int
    seed: int

    @staticmethod
    def default(nz: int, seed: int = 0) -> "ProbeFamily":
        curves = []
        scales = (0.25, 0.5, 1.0, 2.0, 4.0)

        def unit(k, amp):
            return tuple(amp if i == k else 0j for i in range(nz))

        for k in range(nz):
            for s in scales:
                for t16 in range(16):
                    amp = s * cmath.exp(2j * math.pi * t16 / 16)
                    for zp in (1, 2):
                        curves.append(Curve(unit(k, amp), zp, 0.0, 1))
        for eta in (1.0, -1.0):
            for wp in (1, 2):
                curves.append(Curve((0j,) * nz, 1, eta, wp))
        for k in range(nz):
            for s in scales:
                for t8 in range(8):
                    amp = s * cmath.exp(2j * math.pi * t8 / 8)
                    for zp in (1, 2, 3):
                        for wp in (1, 2, 3):
                            for eta in (1.0, -1.0):
                                curves.append(Curve(unit(k, amp), zp, eta, wp))
        rng = np.random.default_rng(seed)
        for _ in range(32):
            zdir = tuple(
                complex(a, b)
                for a, b in zip(rng.standard_normal(nz), rng.standard_normal(nz))
            )
            curves.append(Curve(zdir, 1, float(rng.standard_normal()), 1))
        return ProbeFamily(
            curves=tuple(curves),
            shell_exps=DYADIC_EXPS,
            samples_per_shell=160,
            seed=seed,
        )


def default_probes(nz: int, seed: int = 0) -> ProbeFamily:
    return ProbeFamily.default(nz, seed)


@dataclass
class ProjectedProbes:
    """Probe family pushed onto the boundary of a specific domain."""

    family: ProbeFamily
    curve_Z: np.ndarray  # (n_curves, n_t, nz)
    curve_W: np.ndarray  # (n_curves, n_t)
    curve_ok: np.ndarray  # bool mask
    t_values: np.ndarray
    shells: list  # BoundaryShell per shell_exps entry

    def in_ball_points(self, radius: float):
        """Converged curve points with |(z, w)| <= radius, flattened."""
        Z = self.curve_Z.reshape(-1, self.curve_Z.shape[-1])
        W = self.curve_W.reshape(-1)
        ok = self.curve_ok.reshape(-1)
        norms = np.sqrt(np.sum(np.abs(Z) ** 2, axis=1) + np.abs(W) ** 2)
        keep = ok & (norms <= radius)
        return Z[keep], W[keep]


def project_probes(r: DefiningFunction, family: ProbeFamily) -> ProjectedProbes:
    """Project every curve of the family onto the boundary (cached on r)."""

    def build():
        from .verify import project_to_boundary

        t = np.array([2.0**-e for e in family.shell_exps])
        nc, nt, nz = len(family.curves), len(t), r.nz
        Z = np.empty((nc * nt, nz), dtype=complex)
        U = np.empty(nc * nt)
        for i, c in enumerate(family.curves):
            tp = t ** c.zpow
            for k in range(nz):
                Z[i * nt : (i + 1) * nt, k] = c.zdir[k] * tp
            U[i * nt : (i + 1) * nt] = c.wamp * t ** c.wpow
        W, ok = project_to_boundary(r, Z, U)
        from .verify import sample_boundary

        shells = [
            sample_boundary(r, 2.0**-e, family.samples_per_shell, family.seed)
            for e in family.shell_exps
        ]
        return ProjectedProbes(
            family=family,
            curve_Z=Z.reshape(nc, nt, nz),
            curve_W=W.reshape(nc, nt),
            curve_ok=ok.reshape(nc, nt),
            t_values=t,
            shells=shells,
        )

    return r.cached(("probes", family), build)


@dataclass
class DominanceVerdict:
    status: str  # "Dominated" | "NotDominated" | "Unknown"
    constant: float | None
    reason: str
    witness: dict | None
    shell_ratios: list
    numerators: list
    bound: str

    @property
    def dominated(self) -> bool:
        return self.status == "Dominated"

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "constant": self.constant,
            "reason": self.reason,
            "witness": self.witness,
            "shell_ratios": self.shell_ratios,
            "numerators": self.numerators,
            "bound": self.bound,
        }


# -- exact real form and the quadratic certificate ------------------------


def real_form(p: WPoly) -> dict:
    """Real-polynomial form of a real WPoly.

    Returns {exponents: Fraction} over (x_1..x_nz, y_1..y_nz, u, v) with
    z_k = x_k + i y_k, w = u + i v.  Raises if p is not real-valued.
    """
    if not p.is_real():
        raise ValueError("real_form needs a real-valued polynomial")
    nz = p.nz
    nvar = 2 * nz + 2

    def var_dict(idx_re, idx_im, conj):
        one = tuple(0 for _ in range(nvar))
        e_re = tuple(1 if i == idx_re else 0 for i in range(nvar))
        e_im = tuple(1 if i == idx_im else 0 for i in range(nvar))
        im = GaussianRational(0, Fraction(-1 if conj else 1))
        return {e_re: GaussianRational.of(1), e_im: im}

    def mul(d1, d2):
        out = {}
        for e1, c1 in d1.items():
            for e2, c2 in d2.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                c = out.get(e)
                c = c1 * c2 if c is None else c + c1 * c2
                out[e] = c
        return {e: c for e, c in out.items() if not c.is_zero()}

    def powd(d, n):
        out = {tuple(0 for _ in range(nvar)): GaussianRational.of(1)}
        for _ in range(n):
            out = mul(out, d)
        return out

    acc: dict = {}
    for m, coeff in p.terms.items():
        d = {tuple(0 for _ in range(nvar)): coeff}
        for k in range(nz):
            if m.a[k]:
                d = mul(d, powd(var_dict(k, nz + k, False), m.a[k]))
            if m.b[k]:
                d = mul(d, powd(var_dict(k, nz + k, True), m.b[k]))
        if m.c:
            d = mul(d, powd(var_dict(2 * nz, 2 * nz + 1, False), m.c))
        if m.d:
            d = mul(d, powd(var_dict(2 * nz, 2 * nz + 1, True), m.d))
        for e, c in d.items():
            prev = acc.get(e)
            acc[e] = c if prev is None else prev + c
    out = {}
    for e, c in acc.items():
        if c.is_zero():
            continue
        if c.im != 0:
            raise AssertionError("imaginary residue in real_form expansion")
        out[e] = c.re
    return out


def real_basis_str(p: WPoly) -> str:
    """Text form of a real WPoly over Re/Im factors, e.g. `-4*Im(z)`.

    Parses back to the same polynomial; raises on non-real input.
    """
    rf = real_form(p)
    if not rf:
        return "0"
    nz = p.nz

    def factor_name(i: int) -> str:
        if i < nz:
            return "Re(z)" if nz == 1 else f"Re(z{i + 1})"
        if i < 2 * nz:
            return "Im(z)" if nz == 1 else f"Im(z{i - nz + 1})"
        return "Re(w)" if i == 2 * nz else "Im(w)"

    pieces = []
    for e, c in sorted(rf.items(), key=lambda kv: (sum(kv[0]), kv[0])):
        factors = []
        for i, k in enumerate(e):
            if k:
                n = factor_name(i)
                factors.append(n if k == 1 else f"{n}^{k}")
        mono = "*".join(factors)
        negated = c < 0
        if negated:
            c = -c
        if c == 1 and mono:
            body = mono
        else:
            cs = str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
            body = cs if not mono else f"{cs}*{mono}"
        if not pieces:
            pieces.append(("-" if negated else "") + body)
        else:
            pieces.append(("- " if negated else "+ ") + body)
    return " ".join(pieces)


def _det_fraction(M) -> Fraction:
    n = len(M)
    M = [row[:] for row in M]
    det = Fraction(1)
    for i in range(n):
        piv = next((k for k in range(i, n) if M[k][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            M[i], M[piv] = M[piv], M[i]
            det = -det
        det *= M[i][i]
        for k in range(i + 1, n):
            f = M[k][i] / M[i][i]
            for j in range(i, n):
                M[k][j] -= f * M[i][j]
    return det


def _sylvester_pd(M) -> bool:
    """Positive definiteness of an exact rational symmetric matrix."""
    for d in range(1, len(M) + 1):
        if _det_fraction([row[:d] for row in M[:d]]) <= 0:
            return False
    return True


def boundary_quadratic(B: WPoly, r: DefiningFunction):
    """Order-2 part of B restricted to the boundary, as a rational matrix.

    Works in the tangential variables (x_1..x_nz, y_1..y_nz, u); the
    normal variable v = Im w is eliminated via v = -F + O(3), so a linear
    v term of B feeds -coeff * F_2 into the quadratic form.  Returns None
    when B has a tangential linear part (no order-2 certificate exists).
    """
    nz = B.nz
    d = 2 * nz + 1
    rf = real_form(B)
    c_v = Fraction(0)
    quad: dict = {}
    for e, c in rf.items():
        deg = sum(e)
        if deg == 1:
            if e[d] == 1:
                c_v = c
            else:
                return None
        elif deg == 2 and e[d] == 0:
            quad[e[:d]] = quad.get(e[:d], Fraction(0)) + c
    if c_v != 0:
        f2 = real_form(r.higher_order_part())
        for e, c in f2.items():
            if sum(e) == 2 and e[d] == 0:
                quad[e[:d]] = quad.get(e[:d], Fraction(0)) - c_v * c
    M = [[Fraction(0)] * d for _ in range(d)]
    for e, c in quad.items():
        idx = [i for i in range(d) for _ in range(e[i])]
        a, b = idx[0], idx[1]
        if a == b:
            M[a][a] += c
        else:
            M[a][b] += c / 2
            M[b][a] += c / 2
    return M


# -- ratio scans ----------------------------------------------------------


def _num_sq(numerators, Z, W):
    acc = None
    for p in numerators:
        v = np.abs(compiled(p).eval(Z, W)) ** 2
        acc = v if acc is None else acc + v
    return acc


def _ratios(num_sq, bvals):
    den = np.where(bvals > 0, bvals, 0.0)
    out = np.empty_like(num_sq)
    zero_den = den == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num_sq / den
    out[zero_den & (num_sq < NUM_FLOOR)] = 0.0
    out[zero_den & (num_sq >= NUM_FLOOR)] = np.inf
    return out


def _direction(z_row, w) -> list:
    vec = []
    for c in z_row:
        vec.extend([c.real, c.imag])
    vec.append(w.real)
    n = math.sqrt(sum(x * x for x in vec))
    return [x / n for x in vec] if n > 0 else vec


def _curve_escape(numerators, bound_poly, probes: ProjectedProbes):
    """Best escaping curve, or None.

    Escape means: along the last ESCAPE_RUN dyadic parameters the ratio is
    finite, strictly increasing, grows by >= ESCAPE_GROWTH overall, and
    ends above ESCAPE_FLOOR.
    """
    nc, nt, nz = probes.curve_Z.shape
    Z = probes.curve_Z.reshape(-1, nz)
    W = probes.curve_W.reshape(-1)
    num = _num_sq(numerators, Z, W).reshape(nc, nt)
    bv = compiled(bound_poly).eval(Z, W).real.reshape(nc, nt)
    best = None
    for i in range(nc):
        ok = probes.curve_ok[i]
        t = probes.t_values[ok]
        if len(t) < ESCAPE_RUN:
            continue
        ratio = _ratios(num[i][ok], bv[i][ok])
        tail = ratio[-ESCAPE_RUN:]  # t decreases along the array
        if not np.all(np.isfinite(tail)):
            continue
        if np.any(np.diff(tail) <= 0):
            continue
        if tail[-1] < ESCAPE_FLOOR or tail[-1] < ESCAPE_GROWTH * tail[0]:
            continue
        if best is None or tail[-1] > best[1]:
            best = (i, float(tail[-1]), ratio, t)
    if best is None:
        return None
    i, final, ratio, t = best
    last = int(np.flatnonzero(probes.curve_ok[i])[-1])
    z_row = probes.curve_Z[i, last]
    w = probes.curve_W[i, last]
    return {
        "curve": probes.family.curves[i].describe(),
        "direction": _direction(z_row, w),
        "point": {
            "z": [[c.real, c.imag] for c in z_row],
            "w": [w.real, w.imag],
        },
        "t": [float(x) for x in t],
        "ratios": [float(x) for x in ratio],
        "final_ratio": final,
    }


def _shell_ratios(numerators, bound_poly, probes: ProjectedProbes):
    sups = []
    for shell in probes.shells:
        num = _num_sq(numerators, shell.Z, shell.W)
        bv = compiled(bound_poly).eval(shell.Z, shell.W).real
        ratio = _ratios(num, bv)
        finite = ratio[np.isfinite(ratio)]
        sups.append(float(np.max(finite)) if len(finite) else 0.0)
    return sups


# -- main entry points ----------------------------------------------------


def bound_poly_for(r: DefiningFunction, bound: Bound, j: int = 0) -> WPoly:
    if bound is Bound.LEVI_ONLY:
        return r.levi(j)
    return r.levi(j) + r.grad_z_sq()


def dominance_check(
    numerators,
    bound: Bound,
    r: DefiningFunction,
    probes: ProbeFamily | None = None,
    j: int = 0,
    bound_poly: WPoly | None = None,
) -> DominanceVerdict:
    """Decide |P|^2 <= C * B near 0 on the boundary of {r < 0}.

    `numerators` is one WPoly or a list (summed as squares on the left).
    The bound defaults to the tangential Levi form, optionally plus
    |grad_z r|^2; pass bound_poly to override.
    """
    if isinstance(numerators, WPoly):
        numerators = [numerators]
    numerators = [p for p in numerators if not p.is_zero()]
    B = bound_poly if bound_poly is not None else bound_poly_for(r, bound, j)
    names = [canonical_str(p) for p in numerators]

    def verdict(status, constant, reason, witness=None, sups=None):
        return DominanceVerdict(
            status=status,
            constant=constant,
            reason=reason,
            witness=witness,
            shell_ratios=sups if sups is not None else [],
            numerators=names,
            bound=bound.value,
        )

    if not numerators:
        return verdict("Dominated", 0.0, "numerator is identically zero")

    origin_z = [0] * r.nz
    b0 = B.eval(origin_z, 0)
    p0_nonzero = any(not p.eval(origin_z, 0).is_zero() for p in numerators)
    if isinstance(b0, GaussianRational) and b0.re > 0 and b0.im == 0:
        probes = probes if probes is not None else default_probes(r.nz, 0)
        proj = project_probes(r, probes)
        sups = _shell_ratios(numerators, B, proj)
        return verdict(
            "Dominated",
            2.0 * max(sups),
            "bound positive at the origin",
            sups=sups,
        )
    if p0_nonzero:
        return verdict(
            "NotDominated",
            None,
            "numerator nonvanishing where the bound vanishes",
            witness={"point": {"z": [[0.0, 0.0]] * r.nz, "w": [0.0, 0.0]}},
        )
    if isinstance(b0, GaussianRational) and b0.re < 0:
        return verdict(
            "NotDominated",
            None,
            "bound negative at the origin",
            witness={"point": {"z": [[0.0, 0.0]] * r.nz, "w": [0.0, 0.0]}},
        )

    probes = probes if probes is not None else default_probes(r.nz, 0)
    proj = project_probes(r, probes)

    if b0.is_zero() and all(p.min_degree() >= 1 for p in numerators):
        M = boundary_quadratic(B, r)
        if M is not None and _sylvester_pd(M):
            sups = _shell_ratios(numerators, B, proj)
            return verdict(
                "Dominated",
                2.0 * max(sups),
                "bound has positive definite boundary quadratic part",
                sups=sups,
            )

    escape = _curve_escape(numerators, B, proj)
    if escape is not None:
        return verdict(
            "NotDominated",
            None,
            "ratio escapes along a probe curve",
            witness=escape,
        )

    sups = _shell_ratios(numerators, B, proj)
    finite = [s for s in sups if math.isfinite(s)]
    if len(finite) == len(sups) and len(sups) >= 3:
        a, b, c = sups[-3], sups[-2], sups[-1]
        if b <= STABLE_FACTOR * a and c <= STABLE_FACTOR * b:
            return verdict(
                "Dominated",
                2.0 * max(sups),
                "shell sup ratios stable",
                sups=sups,
            )
    return verdict(
        "Unknown",
        None,
        "no certificate, no escaping curve, shell ratios not stable",
        sups=sups,
    )


@dataclass
class TermClassification:
    monomial: str
    verdict: DominanceVerdict

    def as_dict(self) -> dict:
        return {"monomial": self.monomial, "verdict": self.verdict.as_dict()}


@dataclass
class SplitResult:
    """g = S + E with E dominated and S needing cancellation."""

    S: WPoly
    E: WPoly
    terms: list
    has_unknown: bool

    def as_dict(self) -> dict:
        return {
            "S": canonical_str(self.S),
            "E": canonical_str(self.E),
            "terms": [t.as_dict() for t in self.terms],
            "has_unknown": self.has_unknown,
        }


def split_S_E(
    g: WPoly,
    r: DefiningFunction,
    bound: Bound,
    probes: ProbeFamily | None = None,
    j: int = 0,
) -> SplitResult:
    """Classify each monomial of g; dominated terms go to E, the rest to S.

    Unknown verdicts are treated as not dominated (kept in S) and flagged.
    """
    S = WPoly.zero(g.nz)
    E = WPoly.zero(g.nz)
    terms = []
    has_unknown = False
    for m, c in sorted(g.terms.items(), key=lambda kv: kv[0].sort_key()):
        mono = WPoly(g.nz, {m: c})
        v = dominance_check(mono, bound, r, probes, j=j)
        terms.append(TermClassification(canonical_str(mono), v))
        if v.status == "Dominated":
            E = E + mono
        else:
            S = S + mono
            if v.status == "Unknown":
                has_unknown = True
    return SplitResult(S=S, E=E, terms=terms, has_unknown=has_unknown)


def levi_dominance_gate(
    r: DefiningFunction, probes: ProbeFamily | None = None
) -> DominanceVerdict:
    """Check |grad_z r|^2 <= C * (sum of tangential Levi forms) near 0.

    Failure produces the witness direction along which the gradient
    escapes every Levi multiple.
    """
    nums = [r.d_z(j) for j in range(r.nz)]
    B = r.levi(0)
    for j in range(1, r.nz):
        B = B + r.levi(j)
    return dominance_check(
        nums, Bound.LEVI_ONLY, r, probes, bound_poly=B
    )
