"""Real-coordinates lane: convexity and the explicit multiplier 1 + Kr + r_y.

Domains {r < 0} in R^n with r = y + G(x, y), G of degree >= 2, so r_y is 1
near 0.  Because r_y is real it already solves the log-derivative equation,
and the whole staged construction collapses to the fixed choice T = r_y plus
a ladder over K.  Floors and ladder limits are transplanted verbatim from
the complex lane.

Off the boundary, with p = 1 + r_y, the Hessian determinant of r*h in a
tangential (x_j, y) plane expands as

    H_rh = H_rp + 4 K^2 r^2 H_r + 4 K^2 r L_r + 2 K L_rp
           + 2 K r [(rp)_xx r_yy + (rp)_yy r_xx - 2 (rp)_xy r_xy]

with L the tangential form below.  Documented for reference; nothing here
evaluates it, positivity is only ever checked on the boundary itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.stats import qmc, norm as _gauss

from .construct import H_MIN, SHRINK, KSearchResult
from .verify import (
    NEWTON_TARGET,
    RESIDUAL_BOUND,
    DEFAULT_TOL,
    ProbeConfigurationError,
    PsdCheckResult,
    least_eigenvalues,
)


def _fmt_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class RPoly:
    """Polynomial over (x_1..x_nx, y) with exact rational coefficients.

    Exponent keys are tuples of length nx + 1, the last slot for y.
    """

    __slots__ = ("nx", "terms")

    def __init__(self, nx: int, terms: dict):
        self.nx = nx
        self.terms = {e: Fraction(c) for e, c in terms.items() if c != 0}

    # -- constructors --

    @classmethod
    def zero(cls, nx: int) -> "RPoly":
        return cls(nx, {})

    @classmethod
    def const(cls, nx: int, val) -> "RPoly":
        return cls(nx, {(0,) * (nx + 1): Fraction(val)})

    @classmethod
    def var_x(cls, nx: int, j: int = 0) -> "RPoly":
        if not 0 <= j < nx:
            raise IndexError(f"x index {j} out of range for nx={nx}")
        e = [0] * (nx + 1)
        e[j] = 1
        return cls(nx, {tuple(e): Fraction(1)})

    @classmethod
    def var_y(cls, nx: int) -> "RPoly":
        e = (0,) * nx + (1,)
        return cls(nx, {e: Fraction(1)})

    # -- ring ops --

    def _check(self, other: "RPoly"):
        if self.nx != other.nx:
            raise ValueError("mixed variable counts")

    def __add__(self, other: "RPoly") -> "RPoly":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return RPoly(self.nx, out)

    def __sub__(self, other: "RPoly") -> "RPoly":
        return self + (-other)

    def __neg__(self) -> "RPoly":
        return RPoly(self.nx, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other: "RPoly") -> "RPoly":
        self._check(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return RPoly(self.nx, out)

    def __pow__(self, k: int) -> "RPoly":
        if k < 0:
            raise ValueError("negative exponent")
        out = RPoly.const(self.nx, 1)
        for _ in range(k):
            out = out * self
        return out

    def scale(self, c) -> "RPoly":
        c = Fraction(c)
        return RPoly(self.nx, {e: c * v for e, v in self.terms.items()})

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RPoly)
            and self.nx == other.nx
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.nx, frozenset(self.terms.items())))

    # -- queries --

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def min_degree(self) -> int:
        return min((sum(e) for e in self.terms), default=0)

    def coeff(self, exps: tuple) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def constant_value(self) -> Fraction | None:
        """The value if constant, else None (parser contract)."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1:
            (e, c), = self.terms.items()
            if sum(e) == 0:
                return c
        return None

    # -- calculus --

    def d_x(self, j: int = 0) -> "RPoly":
        if not 0 <= j < self.nx:
            raise IndexError(f"x index {j} out of range for nx={self.nx}")
        out: dict = {}
        for e, c in self.terms.items():
            if e[j]:
                ne = e[:j] + (e[j] - 1,) + e[j + 1 :]
                out[ne] = out.get(ne, Fraction(0)) + c * e[j]
        return RPoly(self.nx, out)

    def d_y(self) -> "RPoly":
        out: dict = {}
        last = self.nx
        for e, c in self.terms.items():
            if e[last]:
                ne = e[:last] + (e[last] - 1,)
                out[ne] = out.get(ne, Fraction(0)) + c * e[last]
        return RPoly(self.nx, out)

    # -- numerics --

    def eval(self, X, Y) -> np.ndarray:
        """Values at rows of X (m, nx) and Y (m,), float64."""
        Y = np.asarray(Y, dtype=np.float64)
        X = np.asarray(X, dtype=np.float64).reshape(len(Y), self.nx)
        out = np.zeros(len(Y))
        for e, c in self.terms.items():
            term = np.full(len(Y), float(c))
            for j in range(self.nx):
                if e[j]:
                    term = term * X[:, j] ** e[j]
            if e[-1]:
                term = term * Y ** e[-1]
            out += term
        return out

    def canonical_str(self) -> str:
        return canonical_rstr(self)

    def __repr__(self):
        return f"RPoly({self.canonical_str()!r})"


def _rmonomial_str(e: tuple, nx: int) -> str:
    parts = []
    for j in range(nx):
        if e[j]:
            n = "x" if nx == 1 else f"x{j + 1}"
            parts.append(n if e[j] == 1 else f"{n}^{e[j]}")
    if e[-1]:
        parts.append("y" if e[-1] == 1 else f"y^{e[-1]}")
    return " ".join(parts)


def canonical_rstr(p: RPoly) -> str:
    """Sorted-monomial text form; parses back to an identical RPoly."""
    if not p.terms:
        return "0"
    items = sorted(p.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]))
    pieces = []
    for e, c in items:
        mono = _rmonomial_str(e, p.nx)
        negated = c < 0
        if negated:
            c = -c
        body = mono if (c == 1 and mono) else (
            _fmt_fraction(c) if not mono else f"{_fmt_fraction(c)} * {mono}"
        )
        if not pieces:
            pieces.append(("-" if negated else "") + body)
        else:
            pieces.append(("- " if negated else "+ ") + body)
    return " ".join(pieces)


# -- normal form ----------------------------------------------------------


class RealNormalFormError(ValueError):
    """Input fails the r = y + G normal form; lists every violated clause."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def real_normal_form_violations(p: RPoly) -> list[str]:
    out = []
    unit = (0,) * (p.nx + 1)
    if p.coeff(unit) != 0:
        out.append("nonzero constant term")
    y_mono = (0,) * p.nx + (1,)
    if p.coeff(y_mono) != 1:
        out.append("coefficient of y is not 1")
    for j in range(p.nx):
        e = [0] * (p.nx + 1)
        e[j] = 1
        if p.coeff(tuple(e)) != 0:
            out.append(f"linear term in x_{j + 1}")
    higher = p - RPoly.var_y(p.nx)
    if not higher.is_zero() and higher.min_degree() < 2:
        out.append("remainder has terms of degree < 2")
    return out


def validate_real_normal_form(p: RPoly) -> "RealDefiningFunction":
    violations = real_normal_form_violations(p)
    if violations:
        raise RealNormalFormError(violations)
    return RealDefiningFunction(p)


@dataclass
class RealDefiningFunction:
    """A validated local defining function r = y + G."""

    poly: RPoly
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def nx(self) -> int:
        return self.poly.nx

    def cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def d_x(self, j: int = 0) -> RPoly:
        return self.cached(("dx", j), lambda: self.poly.d_x(j))

    def d_y(self) -> RPoly:
        return self.cached("dy", lambda: self.poly.d_y())

    def higher_order_part(self) -> RPoly:
        return self.cached("G", lambda: self.poly - RPoly.var_y(self.nx))


# -- boundary sampling ----------------------------------------------------


def project_to_real_boundary(r: RealDefiningFunction, X):
    """Solve y so r(x, y) = 0 by Newton from y = 0.

    Returns (Y, ok) where ok flags points with |r| <= 1e-12.
    """
    X = np.asarray(X, dtype=np.float64).reshape(-1, r.nx)
    Y = np.zeros(len(X))
    ry = r.d_y()
    vals = r.poly.eval(X, Y)
    for _ in range(60):
        if np.max(np.abs(vals), initial=0.0) <= NEWTON_TARGET:
            break
        slope = ry.eval(X, Y)
        slope = np.where(np.abs(slope) < 1e-6, np.sign(slope + 1e-30), slope)
        Y = Y - vals / slope
        vals = r.poly.eval(X, Y)
    ok = np.abs(vals) <= RESIDUAL_BOUND
    return Y, np.asarray(ok)


@dataclass
class RealShell:
    """Boundary sample: points (x, y) within the closed ball of `radius`."""

    radius: float
    seed: int
    X: np.ndarray  # (count, nx)
    Y: np.ndarray  # (count,)
    residuals: np.ndarray

    @property
    def count(self) -> int:
        return len(self.Y)

    def norms(self) -> np.ndarray:
        return np.sqrt(np.sum(self.X**2, axis=1) + self.Y**2)

    def as_dict(self) -> dict:
        return {
            "radius": self.radius,
            "seed": self.seed,
            "count": self.count,
            "max_residual": float(np.max(self.residuals)) if self.count else 0.0,
        }


def sample_real_boundary(
    r: RealDefiningFunction,
    radius: float,
    count: int,
    seed: int = 0,
) -> RealShell:
    """Low-discrepancy boundary points filling the ball of the given radius.

    The x coordinates are Halton-distributed in a ball of 0.93*radius and y
    is Newton-solved; out-of-ball or non-convergent points are dropped and
    topped up deterministically.
    """
    nx = r.nx
    sampler = qmc.Halton(d=nx + 1, scramble=True, seed=seed)
    Xs, Ys = [], []
    have = 0
    for _ in range(8):
        raw = sampler.random(max(64, int((count - have) * 1.25)))
        dirs = _gauss.ppf(raw[:, :nx])
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        radial = 0.93 * radius * raw[:, nx] ** (1.0 / nx)
        X = dirs * radial[:, None]
        Y, ok = project_to_real_boundary(r, X)
        full = np.sqrt(np.sum(X**2, axis=1) + Y**2)
        keep = ok & (full <= radius)
        Xs.append(X[keep])
        Ys.append(Y[keep])
        have += int(np.sum(keep))
        if have >= count:
            break
    if have < count:
        raise ProbeConfigurationError(
            f"only {have}/{count} boundary points projectable at radius {radius}"
        )
    X = np.concatenate(Xs)[:count]
    Y = np.concatenate(Ys)[:count]
    res = np.abs(r.poly.eval(X, Y))
    return RealShell(radius=radius, seed=seed, X=X, Y=Y, residuals=res)


# -- Hessian checks -------------------------------------------------------


def real_hessian_entries(f: RPoly) -> list:
    """Upper-triangular (nx+1)x(nx+1) second-derivative polynomials."""
    n = f.nx + 1

    def d(a: int) -> RPoly:
        return f.d_x(a) if a < f.nx else f.d_y()

    firsts = [d(a) for a in range(n)]
    out = [[None] * n for _ in range(n)]
    for a in range(n):
        for b in range(a, n):
            g = firsts[a]
            out[a][b] = g.d_x(b) if b < f.nx else g.d_y()
    return out


def real_hessian_values(f: RPoly, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Real Hessian of f at each point: array (m, n, n), symmetric."""
    n = f.nx + 1
    H = real_hessian_entries(f)
    m = len(Y)
    out = np.empty((m, n, n))
    for a in range(n):
        for b in range(a, n):
            vals = H[a][b].eval(X, Y)
            out[:, a, b] = vals
            if b != a:
                out[:, b, a] = vals
    return out


def _real_point_dict(X, Y, i) -> dict:
    return {
        "x": [float(X[i, j]) for j in range(X.shape[1])],
        "y": float(Y[i]),
    }


def real_psd_stats(H: np.ndarray, X, Y, tol: float) -> PsdCheckResult:
    n = H.shape[-1]
    diags = np.stack([H[:, a, a] for a in range(n)], axis=1)
    minors = np.stack(
        [
            H[:, j, j] * H[:, n - 1, n - 1] - H[:, j, n - 1] ** 2
            for j in range(n - 1)
        ],
        axis=1,
    )
    eigs = least_eigenvalues(H)
    i = int(np.argmin(eigs))
    passed = bool(
        np.min(diags) >= -tol and np.min(minors) >= -tol and np.min(eigs) >= -tol
    )
    return PsdCheckResult(
        passed=passed,
        tol=tol,
        min_diag=float(np.min(diags)),
        min_minor=float(np.min(minors)),
        min_eig=float(np.min(eigs)),
        worst_point=_real_point_dict(X, Y, i),
        count=len(Y),
    )


def real_hessian_check(f: RPoly, shell: RealShell, tol: float = DEFAULT_TOL) -> PsdCheckResult:
    """Full real Hessian PSD sampling of f over the shell."""
    H = real_hessian_values(f, shell.X, shell.Y)
    return real_psd_stats(H, shell.X, shell.Y, tol)


# -- tangential convexity -------------------------------------------------


def tangential_form(r: RealDefiningFunction, j: int = 0) -> RPoly:
    """Hessian of r on the tangential vector v_j = r_y e_j - r_{x_j} e_y.

    Equals r_xx r_y^2 - 2 r_xy r_x r_y + r_yy r_x^2; nonnegative on the
    boundary exactly when the domain is convex in the x_j direction.
    """
    rx = r.d_x(j)
    ry = r.d_y()
    rxx = rx.d_x(j)
    rxy = rx.d_y()
    ryy = ry.d_y()
    return rxx * ry * ry - (rxy * rx * ry).scale(2) + ryy * rx * rx


def convexity_check(
    r: RealDefiningFunction, shell: RealShell, tol: float = DEFAULT_TOL
) -> dict:
    """Minimum of every tangential form over the shell, with witness."""
    worst = None
    for j in range(r.nx):
        vals = tangential_form(r, j).eval(shell.X, shell.Y)
        i = int(np.argmin(vals))
        if worst is None or vals[i] < worst[0]:
            worst = (float(vals[i]), j, i)
    value, j, i = worst
    passed = value >= -tol
    out = {"min_value": value, "passed": passed, "witness": None}
    if not passed:
        out["witness"] = {
            "j": j + 1,
            "point": _real_point_dict(shell.X, shell.Y, i),
            "value": value,
        }
    return out


# -- the multiplier -------------------------------------------------------


@dataclass
class RealConfig:
    radius: float = 1e-2
    samples: int = 2000
    seed: int = 0
    max_k_exp: int = 20
    tol: float = DEFAULT_TOL

    def as_dict(self) -> dict:
        return {
            "radius": self.radius,
            "samples": self.samples,
            "seed": self.seed,
            "max_k_exp": self.max_k_exp,
            "tol": self.tol,
        }


@dataclass
class RealReport:
    """Outcome of the real-lane pipeline; same envelope as the complex one."""

    status: str  # "Certified" | "Obstructed" | "Exhausted"
    r_text: str
    nx: int
    config: RealConfig
    convexity_precheck: dict
    final: dict | None
    obstruction: dict | None
    verification: dict | None
    k_search: dict | None
    messages: list

    def as_dict(self) -> dict:
        return {
            "schema_version": 1,
            "mode": "real",
            "status": self.status,
            "defining_function": {"nx": self.nx, "text": self.r_text},
            "config": self.config.as_dict(),
            "convexity_precheck": self.convexity_precheck,
            "stages": [],
            "final": self.final,
            "obstruction": self.obstruction,
            "verification": self.verification,
            "k_search": self.k_search,
            "messages": list(self.messages),
        }

    def trace(self) -> str:
        lines = [f"status: {self.status}"]
        lines.append(f"r = {self.r_text}")
        if self.final:
            lines.append(f"final: T = {self.final['T']}, K = {self.final['K']}")
        if self.obstruction:
            lines.append(f"obstruction: {self.obstruction['kind']}")
        for m in self.messages:
            lines.append(f"note: {m}")
        return "\n".join(lines)


def convex_multiplier(
    r: RealDefiningFunction, config: RealConfig | None = None
) -> RealReport:
    """Certify r * (1 + Kr + r_y) convex near 0, K from the doubling ladder.

    Convexity of the input (every tangential form >= 0 on the shell) is a
    precondition; a violation reports an obstruction with witness.  The h
    floor |1 + r_y| >= 1/2 triggers the same single radius shrink as the
    complex lane.
    """
    config = config or RealConfig()
    ry = r.d_y()
    h_text = f"1 + K * ({canonical_rstr(r.poly)}) + {canonical_rstr(ry)}"
    messages = [
        "h floor and ladder limits transplanted from the complex lane",
    ]

    radius = config.radius
    shrunk = False
    shell = None
    precheck = None
    for attempt in range(2):
        shell = sample_real_boundary(r, radius, config.samples, config.seed)
        precheck = convexity_check(r, shell, config.tol)
        hbase = 1.0 + ry.eval(shell.X, shell.Y)
        if np.min(np.abs(hbase)) >= H_MIN or attempt:
            break
        radius *= SHRINK
        shrunk = True

    report = RealReport(
        status="Exhausted",
        r_text=canonical_rstr(r.poly),
        nx=r.nx,
        config=config,
        convexity_precheck=precheck,
        final=None,
        obstruction=None,
        verification=None,
        k_search=None,
        messages=messages,
    )
    if not precheck["passed"]:
        report.status = "Obstructed"
        report.obstruction = {
            "kind": "not_convex",
            "claim": "a tangential direction has negative second derivative; "
            "the domain is not convex near 0",
            "witness": precheck["witness"],
        }
        return report

    # rho = r (1 + Kr + r_y) = (r + r r_y) + K r^2: Hessian is linear in K
    base = real_hessian_values(r.poly + r.poly * ry, shell.X, shell.Y)
    quad = real_hessian_values(r.poly * r.poly, shell.X, shell.Y)
    ladder = []
    found = None
    for e in range(config.max_k_exp + 1):
        K = 2**e
        stats = real_psd_stats(base + K * quad, shell.X, shell.Y, config.tol)
        ladder.append(
            {
                "K": K,
                "min_diag": stats.min_diag,
                "min_minor": stats.min_minor,
                "min_eig": stats.min_eig,
                "passed": stats.passed,
            }
        )
        if stats.passed:
            found = (K, stats)
            break

    ks = KSearchResult(
        found=found is not None,
        K=found[0] if found else None,
        ladder=ladder,
        witness=None,
        radius=radius,
        shrunk=shrunk,
    )
    if found is None:
        last = ladder[-1]
        ks.witness = {
            "K": last["K"],
            "min_eig": last["min_eig"],
            "min_minor": last["min_minor"],
            "min_diag": last["min_diag"],
        }
        report.k_search = ks.as_dict()
        report.obstruction = {
            "kind": "k_search_failed",
            "claim": "no ladder K makes the product Hessian positive "
            "semi-definite on the shell",
            "witness": ks.witness,
        }
        return report

    K, stats = found
    report.k_search = ks.as_dict()
    report.status = "Certified"
    report.final = {
        "T": canonical_rstr(ry),
        "K": K,
        "stage": 0,
        "residual": "0",
        "absorbed_terms": [],
        "h": h_text,
    }
    report.verification = {"hessian": stats.as_dict()}
    return report
