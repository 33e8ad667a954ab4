"""Vectorized evaluation of WPoly over numpy point arrays.

A polynomial compiles once into exponent rows + complex coefficients;
evaluation builds per-variable power tables so each monomial costs a few
elementwise multiplies.  Used by every numeric module (boundary sampling,
PSD scans, dominance probing).
"""

from __future__ import annotations

import numpy as np

from .wirtinger import WPoly


class CompiledPoly:
    __slots__ = ("nz", "exps", "coeffs", "max_exp")

    def __init__(self, p: WPoly):
        self.nz = p.nz
        rows = []
        coeffs = []
        for m, c in sorted(p.terms.items(), key=lambda kv: kv[0].sort_key()):
            rows.append((*m.a, *m.b, m.c, m.d))
            coeffs.append(c.to_complex())
        self.exps = np.array(rows, dtype=np.int64).reshape(len(rows), 2 * p.nz + 2)
        self.coeffs = np.array(coeffs, dtype=complex)
        self.max_exp = int(self.exps.max()) if len(rows) else 0

    def eval(self, Z: np.ndarray, W: np.ndarray) -> np.ndarray:
        """Z has shape (m, nz) complex, W shape (m,); returns (m,) complex."""
        Z = np.asarray(Z)
        W = np.asarray(W)
        m = W.shape[0]
        if not len(self.coeffs):
            return np.zeros(m, dtype=np.result_type(W.dtype, np.complex128))
        cols = [Z[:, j] for j in range(self.nz)]
        cols += [np.conj(Z[:, j]) for j in range(self.nz)]
        cols += [W, np.conj(W)]
        # power tables up to the max exponent actually used per column
        tables = []
        for k, col in enumerate(cols):
            top = int(self.exps[:, k].max())
            t = [np.ones(m, dtype=col.dtype)]
            for _ in range(top):
                t.append(t[-1] * col)
            tables.append(t)
        acc = np.zeros(m, dtype=np.result_type(W.dtype, np.complex128))
        for row, c in zip(self.exps, self.coeffs):
            term = np.full(m, c, dtype=acc.dtype)
            for k, e in enumerate(row):
                if e:
                    term = term * tables[k][e]
            acc += term
        return acc


def compiled(p: WPoly) -> CompiledPoly:
    """Compile with caching on the polynomial object."""
    c = p._compiled
    if c is None:
        c = CompiledPoly(p)
        p._compiled = c
    return c


def eval_many(p: WPoly, Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    return compiled(p).eval(Z, W)
