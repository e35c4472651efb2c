"""Internal exact linear algebra shared by the operator modules.

Scalars are duck-typed: anything with field arithmetic, truthiness as the
zero test, and / for division works (Fraction, RatFunc, CycloNumber).  The
integer fast lane (numpy int64 with an overflow guard, object dtype as the
fallback) is what keeps probe-mode and cyclotomic-mode matrix products at
desk scale.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def rref(rows, ncols):
    """In-place reduced row echelon form over a field of duck-typed scalars.

    rows: list of dense lists.  Returns the list of pivot column indices.
    Deterministic: pivots are chosen left to right, first nonzero row wins.
    """
    pivots = []
    r = 0
    for col in range(ncols):
        pr = None
        for i in range(r, len(rows)):
            if rows[i][col]:
                pr = i
                break
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = rows[r][col]
        rows[r] = [x / inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return pivots


def rank(rows, ncols):
    return len(rref([list(r) for r in rows], ncols))


def kernel_basis(rows, ncols, one):
    """Basis of the right kernel of the matrix given by dense rows.

    Deterministic: one vector per free column, with `one` at the free column
    and back-substituted pivot entries; ordered by free column index.
    """
    rows = [list(r) for r in rows]
    pivots = rref(rows, ncols)
    pivot_set = set(pivots)
    zero = one - one
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        vec = [zero] * ncols
        vec[free] = one
        for rr, pc in enumerate(pivots):
            if rows[rr][free]:
                vec[pc] = -rows[rr][free]
        basis.append(vec)
    return basis


def solve_particular(rows, rhs, ncols):
    """One exact solution of A x = b with x supported on the pivot columns,
    or None if inconsistent.  Deterministic (pivot-column complement choice).
    """
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = rref(aug, ncols)  # never pivots on the rhs column by bound
    for row in aug:
        if not any(row[:ncols]) and row[ncols]:
            return None
    zero = rhs[0] - rhs[0]
    sol = [zero] * ncols
    for rr, pc in enumerate(pivots):
        sol[pc] = aug[rr][ncols]
    return sol


# --- integer matrix fast lane -------------------------------------------------

_INT64_SAFE = 2 ** 62


def _to_object_array(mat):
    a = np.empty((len(mat), len(mat[0]) if mat else 0), dtype=object)
    for i, row in enumerate(mat):
        for j, x in enumerate(row):
            a[i, j] = x
    return a


def int_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact product of integer matrices; int64 when provably overflow-free,
    arbitrary precision otherwise."""
    if a.size and b.size:
        ma = max(1, int(np.max(np.abs(a).astype(object))))
        mb = max(1, int(np.max(np.abs(b).astype(object))))
        if ma * mb * a.shape[1] < _INT64_SAFE:
            return (a.astype(np.int64) @ b.astype(np.int64)).astype(object)
    return a.astype(object) @ b.astype(object)


def clear_denominators(mat):
    """(integer numpy object matrix, positive integer scale) with
    mat == intmat / scale entrywise.  Input entries are Fractions or ints."""
    scale = 1
    for row in mat:
        for x in row:
            d = Fraction(x).denominator
            g = _gcd(scale, d)
            scale = scale // g * d
    out = np.empty((len(mat), len(mat[0]) if mat else 0), dtype=object)
    for i, row in enumerate(mat):
        for j, x in enumerate(row):
            f = Fraction(x) * scale
            out[i, j] = int(f)
    return out, scale


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


# --- dense matrices over a cyclotomic field -----------------------------------

class CycMat:
    """Dense matrix over Q[x]/Phi_M, stored as phi integer coefficient slices
    with one common positive integer denominator.  Built for fast exact
    products (slice convolution + reduction by the monic cyclotomic)."""

    __slots__ = ("root", "den", "sl")

    def __init__(self, root, slices, den=1):
        self.root = root
        self.sl = slices  # list of phi numpy object arrays, all same shape
        self.den = den

    @classmethod
    def zeros(cls, root, nrows, ncols):
        return cls(root, [np.zeros((nrows, ncols), dtype=object) for _ in range(root.phi)])

    @classmethod
    def identity(cls, root, n):
        sl = [np.zeros((n, n), dtype=object) for _ in range(root.phi)]
        for i in range(n):
            sl[0][i, i] = 1
        return cls(root, sl)

    @property
    def shape(self):
        return self.sl[0].shape

    @classmethod
    def from_entries(cls, root, nrows, ncols, entries):
        """entries: {(r, c): CycloNumber}."""
        common = 1
        for x in entries.values():
            for co in x.co:
                d = Fraction(co).denominator
                g = _gcd(common, d)
                common = common // g * d
        sl = [np.zeros((nrows, ncols), dtype=object) for _ in range(root.phi)]
        for (r, c), x in entries.items():
            for t, co in enumerate(x.co):
                if co:
                    sl[t][r, c] = int(Fraction(co) * common)
        return cls(root, sl, common)

    def entry(self, r, c):
        from .qnum import CycloNumber

        co = [Fraction(int(s[r, c]), self.den) for s in self.sl]
        return CycloNumber(self.root, co)

    def entries_dict(self):
        from .qnum import CycloNumber

        out = {}
        nr, nc = self.shape
        for r in range(nr):
            for c in range(nc):
                co = [Fraction(int(s[r, c]), self.den) for s in self.sl]
                if any(co):
                    out[(r, c)] = CycloNumber(self.root, co)
        return out

    def __matmul__(self, other):
        root = self.root
        phi = root.phi
        nr = self.shape[0]
        nc = other.shape[1]
        conv = [None] * (2 * phi - 1)
        for i, a in enumerate(self.sl):
            a_nonzero = a.any()
            if not a_nonzero:
                continue
            for j, b in enumerate(other.sl):
                if not b.any():
                    continue
                prod = int_matmul(a, b)
                t = i + j
                conv[t] = prod if conv[t] is None else conv[t] + prod
        out = [np.zeros((nr, nc), dtype=object) for _ in range(phi)]
        for t in range(phi):
            if conv[t] is not None:
                out[t] = out[t] + conv[t]
        for t in range(phi, 2 * phi - 1):
            if conv[t] is not None:
                row = root._red[t - phi]
                for i in range(phi):
                    if row[i]:
                        out[i] = out[i] + conv[t] * row[i]
        return CycMat(root, out, self.den * other.den)

    def __add__(self, other):
        if self.den == other.den:
            return CycMat(self.root, [a + b for a, b in zip(self.sl, other.sl)], self.den)
        g = _gcd(self.den, other.den)
        l = self.den // g * other.den
        fa, fb = l // self.den, l // other.den
        return CycMat(self.root, [a * fa + b * fb for a, b in zip(self.sl, other.sl)], l)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, k: int):
        return CycMat(self.root, [s * k for s in self.sl], self.den)

    def is_zero(self):
        return not any(s.any() for s in self.sl)

    def __eq__(self, other):
        if not isinstance(other, CycMat):
            return NotImplemented
        return (self - other).is_zero()
