"""The n-site spin chain: weight spaces, Temperley-Lieb generators, and the
quantum-group action.

Everything here is exact.  Operators carry their entries as Laurent
polynomials in v (v**2 = q) whenever the construction allows it, and the
modules downstream choose how to evaluate them: at a rational probe, at a
root of unity, or numerically.

Conventions, fixed once:
  * basis states of a weight space are +-1 tuples in descending
    lexicographic order, so the all-plus end of the chain comes first;
  * m2 is twice the total S^z eigenvalue, j2 twice a spin label;
  * generator index i is 1-based and acts on sites (i, i+1).
"""

from __future__ import annotations

import functools
import itertools
import math
from fractions import Fraction

import numpy as np

from .linalg import (
    CycMat,
    clear_denominators,
    int_matmul,
    kernel_basis,
    rref,
    solve_particular,
)
from .qnum import (
    CapError,
    CycloNumber,
    LaurentPoly,
    RatFunc,
    RootSpec,
    eval_at_root,
    q_factorial,
    q_int,
    q_num_half,
)


def gamma_dim(n: int, j2: int) -> int:
    """Number of independent highest-weight vectors of spin j2/2 in the chain:
    C(n, (n-j2)/2) - C(n, (n-j2)/2 - 1)."""
    if j2 < 0 or j2 > n or (n - j2) % 2:
        return 0
    k = (n - j2) // 2
    lower = math.comb(n, k - 1) if k >= 1 else 0
    return math.comb(n, k) - lower


def dim_weight(n: int, m2: int) -> int:
    if abs(m2) > n or (n - m2) % 2:
        return 0
    return math.comb(n, (n + m2) // 2)


class WeightSpace:
    """Fixed total-S^z slice of the chain, with its ordered basis."""

    __slots__ = ("n", "m2", "states", "index")

    def __init__(self, n, m2):
        if n < 1:
            raise ValueError("n >= 1 required")
        if abs(m2) > n or (n - m2) % 2:
            raise ValueError(f"no weight space m2={m2} for n={n}")
        self.n = n
        self.m2 = m2
        k = (n + m2) // 2  # number of up spins
        states = []
        for pos in itertools.combinations(range(n), k):
            s = [-1] * n
            for p in pos:
                s[p] = 1
            states.append(tuple(s))
        states.sort(reverse=True)
        self.states = states
        self.index = {s: r for r, s in enumerate(states)}

    @property
    def dim(self):
        return len(self.states)

    def __eq__(self, other):
        return isinstance(other, WeightSpace) and (self.n, self.m2) == (other.n, other.m2)

    def __hash__(self):
        return hash((self.n, self.m2))

    def __repr__(self):
        return f"WeightSpace(n={self.n}, m2={self.m2}, dim={self.dim})"


@functools.lru_cache(maxsize=None)
def weight_space(n: int, m2: int) -> WeightSpace:
    return WeightSpace(n, m2)


class Operator:
    """Sparse linear map between weight spaces.

    Entries live in whatever scalar ring the caller chose (LaurentPoly,
    RatFunc, Fraction, CycloNumber); only zero entries are omitted.  The
    class never converts scalars on its own.
    """

    __slots__ = ("dom", "cod", "ent")

    def __init__(self, dom, cod, ent):
        self.dom = dom
        self.cod = cod
        self.ent = ent

    @classmethod
    def zero(cls, dom, cod):
        return cls(dom, cod, {})

    @classmethod
    def identity(cls, space, one=None):
        if one is None:
            one = LaurentPoly.one()
        if not one:
            return cls.zero(space, space)
        return cls(space, space, {(r, r): one for r in range(space.dim)})

    @property
    def shape(self):
        return (self.cod.dim, self.dom.dim)

    def __matmul__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        if self.dom != other.cod:
            raise ValueError("composition domain mismatch")
        by_col = {}
        for (r, k), x in self.ent.items():
            by_col.setdefault(k, []).append((r, x))
        out = {}
        for (k, c), y in other.ent.items():
            for r, x in by_col.get(k, ()):
                v = x * y
                key = (r, c)
                if key in out:
                    v = out[key] + v
                if v:
                    out[key] = v
                elif key in out:
                    del out[key]
        return Operator(other.dom, self.cod, out)

    def __add__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        if self.dom != other.dom or self.cod != other.cod:
            raise ValueError("shape mismatch")
        out = dict(self.ent)
        for key, y in other.ent.items():
            if key in out:
                v = out[key] + y
                if v:
                    out[key] = v
                else:
                    del out[key]
            else:
                out[key] = y
        return Operator(self.dom, self.cod, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return Operator(self.dom, self.cod, {k: -x for k, x in self.ent.items()})

    def scale(self, s):
        """Left-multiply every entry by the scalar s."""
        if not s:
            return Operator.zero(self.dom, self.cod)
        out = {}
        for k, x in self.ent.items():
            v = s * x
            if v:
                out[k] = v
        return Operator(self.dom, self.cod, out)

    def __eq__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        return (
            self.dom == other.dom
            and self.cod == other.cod
            and self.ent == other.ent
        )

    def is_zero(self):
        return not self.ent

    def trace(self):
        vals = [x for (r, c), x in self.ent.items() if r == c]
        if not vals:
            return 0
        return functools.reduce(lambda a, b: a + b, vals)

    def apply(self, vec):
        """Apply to a sparse column vector {index: scalar}."""
        out = {}
        for (r, c), x in self.ent.items():
            y = vec.get(c)
            if y is None:
                continue
            v = x * y
            if r in out:
                v = out[r] + v
            if v:
                out[r] = v
            elif r in out:
                del out[r]
        return out

    def map_entries(self, f):
        out = {}
        for k, x in self.ent.items():
            v = f(x)
            if v:
                out[k] = v
        return Operator(self.dom, self.cod, out)

    def eval_q(self, qval):
        """Rational-probe evaluation at q = qval (even v-lattice entries only)."""
        return self.map_entries(lambda x: x.eval_q(qval))

    def eval_v(self, vval):
        return self.map_entries(lambda x: x.eval_fraction(vval))

    def eval_root(self, root: RootSpec):
        return self.map_entries(lambda x: eval_at_root(x, root))

    def dense_rows(self, zero):
        rows = [[zero] * self.dom.dim for _ in range(self.cod.dim)]
        for (r, c), x in self.ent.items():
            rows[r][c] = x
        return rows

    def transpose(self):
        return Operator(self.cod, self.dom, {(c, r): x for (r, c), x in self.ent.items()})


def probe_int_matrix(op: Operator, qval):
    """(integer numpy matrix, positive scale) with op == matrix/scale at q = qval."""
    dense = [[Fraction(0)] * op.dom.dim for _ in range(op.cod.dim)]
    for (r, c), x in op.ent.items():
        dense[r][c] = x.eval_q(qval)
    return clear_denominators(dense)


def probe_int_matrix_v(op: Operator, vval):
    """Same as probe_int_matrix but evaluated at v = vval (odd lattices allowed)."""
    dense = [[Fraction(0)] * op.dom.dim for _ in range(op.cod.dim)]
    for (r, c), x in op.ent.items():
        dense[r][c] = x.eval_fraction(vval)
    return clear_denominators(dense)


def root_cycmat(op: Operator, root: RootSpec) -> CycMat:
    return CycMat.from_entries(
        root, op.cod.dim, op.dom.dim,
        {k: eval_at_root(x, root) for k, x in op.ent.items()},
    )


# ---------------------------------------------------------------------------
# Temperley-Lieb generators.
#
# On the two-site patterns, with q' = q^-1:
#   e |+-> = q'|+-> - |-+>        e |-+> = -|+-> + q|-+>
# and e kills |++> and |-->.  Then e^2 = (q + q')e and the braid-like
# relations e e' e = e hold for neighbours; the tests sweep all of them.

@functools.lru_cache(maxsize=None)
def tl_generator(n: int, m2: int, i: int) -> Operator:
    if not 1 <= i <= n - 1:
        raise ValueError(f"generator index {i} outside 1..{n - 1}")
    W = weight_space(n, m2)
    qp = LaurentPoly.q_power(1)
    qm = LaurentPoly.q_power(-1)
    mone = LaurentPoly.const(-1)
    ent = {}
    for c, s in enumerate(W.states):
        a, b = s[i - 1], s[i]
        if a == b:
            continue
        t = list(s)
        t[i - 1], t[i] = b, a
        r_swap = W.index[tuple(t)]
        if a == 1:  # |+-> column
            ent[(c, c)] = qm
            ent[(r_swap, c)] = mone
        else:       # |-+> column
            ent[(c, c)] = qp
            ent[(r_swap, c)] = mone
    return Operator(W, W, ent)


def hecke_generator(n: int, m2: int, i: int) -> Operator:
    """h_i = e_i - q^-1; satisfies h^2 = (q - q^-1) h + 1."""
    W = weight_space(n, m2)
    return tl_generator(n, m2, i) - Operator.identity(W, LaurentPoly.q_power(-1))


def hamiltonian(n: int, m2: int) -> Operator:
    op = Operator.zero(weight_space(n, m2), weight_space(n, m2))
    for i in range(1, n):
        op = op + tl_generator(n, m2, i)
    return op


# ---------------------------------------------------------------------------
# Quantum-group generators.  The one-step raising operator carries the
# coproduct twist v**(sum of spins left of the site minus sum right of it).

@functools.lru_cache(maxsize=None)
def uq_splus(n: int, m2: int) -> Operator:
    dom = weight_space(n, m2)
    cod = weight_space(n, m2 + 2)
    ent = {}
    for c, s in enumerate(dom.states):
        total = sum(s)
        left = 0
        for i, si in enumerate(s):
            if si == -1:
                t = list(s)
                t[i] = 1
                r = cod.index[tuple(t)]
                right = total - left - si
                key = (r, c)
                add = LaurentPoly.v_power(left - right)
                ent[key] = ent[key] + add if key in ent else add
            left += si
    return Operator(dom, cod, ent)


@functools.lru_cache(maxsize=None)
def uq_sminus(n: int, m2: int) -> Operator:
    dom = weight_space(n, m2)
    cod = weight_space(n, m2 - 2)
    ent = {}
    for c, s in enumerate(dom.states):
        total = sum(s)
        left = 0
        for i, si in enumerate(s):
            if si == 1:
                t = list(s)
                t[i] = -1
                r = cod.index[tuple(t)]
                right = total - left - si
                key = (r, c)
                add = LaurentPoly.v_power(left - right)
                ent[key] = ent[key] + add if key in ent else add
            left += si
    return Operator(dom, cod, ent)


@functools.lru_cache(maxsize=None)
def divided_power(n: int, m2: int, r: int, sign: int) -> Operator:
    """(S^+)^(r) or (S^-)^(r) out of the weight-m2 space: the r-fold ordinary
    power divided, exactly, by [r]!.  The division succeeding is itself a
    structural fact and is asserted here, not assumed."""
    if r < 0:
        raise ValueError("r >= 0 required")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if abs(m2 + sign * 2 * r) > n:
        raise ValueError("divided power walks out of the chain")
    if r == 0:
        W = weight_space(n, m2)
        return Operator.identity(W)
    step = uq_splus if sign == 1 else uq_sminus
    op = step(n, m2)
    cur = m2
    for _ in range(r - 1):
        cur += 2 * sign
        op = step(n, cur) @ op
    fact = q_factorial(r)
    return op.map_entries(lambda x: x.exact_div(fact))


@functools.lru_cache(maxsize=None)
def s_r_operator(n: int, m2: int, r: int) -> Operator:
    """S_r = (S^-)^(r) (S^+)^(r) on the weight-m2 space; the building block of
    every idempotent downstream.  S_0 is the identity."""
    W = weight_space(n, m2)
    if m2 + 2 * r > n:
        return Operator.zero(W, W)
    up = divided_power(n, m2, r, 1)
    down = divided_power(n, m2 + 2 * r, r, -1)
    return down @ up


def casimir(n: int, m2: int) -> Operator:
    """S^2 = S^-S^+ + ([m + 1/2]^2 - [1/2]^2) on the weight-m2 space.

    RatFunc entries: the scalar part is a true rational function when m2 is
    odd.  It acts on a spin-j highest-weight descent as [j+1/2]^2 - [1/2]^2.
    """
    W = weight_space(n, m2)
    if m2 + 2 <= n:
        low = (uq_sminus(n, m2 + 2) @ uq_splus(n, m2)).map_entries(RatFunc.from_poly)
    else:
        low = Operator.zero(W, W)
    a = q_num_half(m2 + 1)
    b = q_num_half(1)
    return low + Operator.identity(W, a * a - b * b)


def central_element(n: int, m2: int) -> Operator:
    """(q - q^-1)^2 S^2 + [2], with Laurent polynomial entries.

    The rational scalar in the Casimir collapses: on the weight-m2 space the
    scalar part is exactly q^(m2+1) + q^(-m2-1), so no denominators survive.
    Eigenvalue on the spin-j block: q^(2j+1) + q^(-2j-1).
    """
    W = weight_space(n, m2)
    w2 = LaurentPoly({4: 1, 0: -2, -4: 1})  # (q - q^-1)^2
    if m2 + 2 <= n:
        low = (uq_sminus(n, m2 + 2) @ uq_splus(n, m2)).map_entries(lambda x: x * w2)
    else:
        low = Operator.zero(W, W)
    scalar = LaurentPoly.q_power(m2 + 1) + LaurentPoly.q_power(-m2 - 1)
    return low + Operator.identity(W, scalar)


def central_eigenvalue(j2: int) -> LaurentPoly:
    return LaurentPoly.q_power(j2 + 1) + LaurentPoly.q_power(-j2 - 1)


def highest_weight_vectors(n: int, m2: int):
    """Deterministic RatFunc basis of ker(S^+) on the weight-m2 space.
    Its size is gamma_dim(n, m2) for generic q."""
    W = weight_space(n, m2)
    if m2 == n:
        return [[RatFunc.one()]]
    sp = uq_splus(n, m2).map_entries(RatFunc.from_poly)
    rows = sp.dense_rows(RatFunc.zero())
    return kernel_basis(rows, W.dim, RatFunc.one())


def spin_flip(n: int, m2: int) -> Operator:
    """Site-wise spin reversal as a permutation W_m2 -> W_-m2.  Conjugating a
    TL generator by it is the same as substituting q -> 1/q."""
    dom = weight_space(n, m2)
    cod = weight_space(n, -m2)
    one = LaurentPoly.one()
    ent = {}
    for c, s in enumerate(dom.states):
        flipped = tuple(-x for x in s)
        ent[(cod.index[flipped], c)] = one
    return Operator(dom, cod, ent)


# ---------------------------------------------------------------------------
# Commutant of the TL action on a weight space, with certificates.

_MODP = 1_000_003
_COMMUTANT_DMAX = 300
PROBE_Q = (Fraction(3, 2), Fraction(7, 5))


def intertwiner_check(n: int, m2: int) -> bool:
    """e_i S^+ == S^+ e_i and e_i S^- == S^- e_i out of the weight-m2 space,
    as Laurent polynomial matrices."""
    ok = True
    if m2 + 2 <= n:
        sp = uq_splus(n, m2)
        for i in range(1, n):
            lhs = tl_generator(n, m2 + 2, i) @ sp
            rhs = sp @ tl_generator(n, m2, i)
            ok = ok and lhs == rhs
    if m2 - 2 >= -n:
        sm = uq_sminus(n, m2)
        for i in range(1, n):
            lhs = tl_generator(n, m2 - 2, i) @ sm
            rhs = sm @ tl_generator(n, m2, i)
            ok = ok and lhs == rhs
    return ok


def _modp_rref(mat: np.ndarray, p: int):
    """Row-reduce an int64 matrix mod p in place; returns pivot column list."""
    mat %= p
    nrows, ncols = mat.shape
    pivots = []
    r = 0
    for col in range(ncols):
        nz = np.nonzero(mat[r:, col])[0]
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            mat[[r, pr]] = mat[[pr, r]]
        inv = pow(int(mat[r, col]), p - 2, p)
        mat[r] = (mat[r] * inv) % p
        rest = np.nonzero(mat[:, col])[0]
        rest = rest[rest != r]
        if rest.size:
            mat[rest] = (mat[rest] - np.outer(mat[rest, col], mat[r])) % p
        pivots.append(col)
        r += 1
        if r == nrows:
            break
    return pivots


def _modp_nullspace(mat: np.ndarray, p: int) -> np.ndarray:
    """Columns spanning the mod-p right kernel."""
    work = mat.copy()
    pivots = _modp_rref(work, p)
    ncols = mat.shape[1]
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = np.zeros((ncols, len(free)), dtype=np.int64)
    for k, fc in enumerate(free):
        basis[fc, k] = 1
        for rr, pc in enumerate(pivots):
            basis[pc, k] = (-int(work[rr, fc])) % p
    return basis


def _commutant_upper_bound(gens_int, D: int, p: int, weights=None) -> int:
    """Exact mod-p dimension of the joint commutant of the given integer
    matrices, assuming it embeds in F_p[H] for H a weighted sum of them.

    The embedding is certified by a Krylov test (H nonderogatory mod p).
    Writing candidates as polynomials in H turns the problem into D unknowns;
    a sampled batch of constraints proposes a solution space and every
    generator then verifies it in full, so the answer is exact, not sampled.
    weights picks the combination H; callers may retry with another choice
    when the certificate fails.
    """
    rng = np.random.default_rng(20260817)
    gmod = [(g % p).astype(np.int64) for g in gens_int]
    if weights is None:
        weights = range(1, len(gens_int) + 1)
    H = np.zeros((D, D), dtype=np.int64)
    for w, g in zip(weights, gmod):
        H = (H + int(w) * g) % p

    # Krylov certificate: one cyclic vector makes H nonderogatory, which
    # traps any commuting matrix inside F_p[H].
    x = (np.arange(D, dtype=np.int64) + 1) % p
    kry = np.empty((D, D), dtype=np.int64)
    for k in range(D):
        kry[:, k] = x
        x = (H @ x) % p
    if len(_modp_rref(kry.copy(), p)) != D:
        raise CapError("Krylov certificate failed; eigenvalues may collide")

    def sampled_rows(samples):
        # row for (gen, a, b): k -> [H^k, S][a, b]
        rows = np.zeros((len(samples), D), dtype=np.int64)
        P = np.eye(D, dtype=np.int64)
        for k in range(D):
            for t, (gi, a, b) in enumerate(samples):
                S = gmod[gi]
                rows[t, k] = (int(P[a] @ S[:, b]) - int(S[a] @ P[:, b])) % p
            P = (P @ H) % p
        return rows

    samples = [
        (int(rng.integers(len(gmod))), int(rng.integers(D)), int(rng.integers(D)))
        for _ in range(min(4 * D, len(gmod) * D * D))
    ]
    for _ in range(D + 1):
        null = _modp_nullspace(sampled_rows(samples), p)
        s = null.shape[1]
        # build X_c = sum c_k H^k for every candidate in one power sweep
        X = [np.zeros((D, D), dtype=np.int64) for _ in range(s)]
        P = np.eye(D, dtype=np.int64)
        for k in range(D):
            for t in range(s):
                c = int(null[k, t])
                if c:
                    X[t] = (X[t] + c * P) % p
            P = (P @ H) % p
        bad = None
        for t in range(s):
            for gi, S in enumerate(gmod):
                T = (X[t] @ S - S @ X[t]) % p
                nz = np.nonzero(T)
                if nz[0].size:
                    bad = (gi, int(nz[0][0]), int(nz[1][0]))
                    break
            if bad:
                break
        if bad is None:
            return s
        samples.append(bad)
    raise CapError("commutant verification loop failed to stabilize")


def commutant_dimension(n: int, m2: int) -> int:
    """Certified dimension of the commutant of the TL generators on the
    weight-m2 space at generic q.

    Lower bound: the S_r commute with every generator (checked symbolically
    through the intertwining of the one-step operators) and are independent
    at a rational probe.  Upper bound: at the probe, mod a large prime, the
    joint commutant is computed exactly inside the polynomial algebra of a
    certified cyclic element.  The value is returned only when the two meet.
    """
    m2 = abs(m2)
    W = weight_space(n, m2)
    D = W.dim
    if D > _COMMUTANT_DMAX:
        raise CapError(f"weight space dim {D} beyond certification cap")
    count = (n - m2) // 2 + 1

    for step in range(m2, n + 1, 2):
        if not intertwiner_check(n, step):
            raise CapError("intertwining failed; commuting family invalid")

    q0 = PROBE_Q[0]
    flats = []
    for r in range(count):
        mat, _ = probe_int_matrix(s_r_operator(n, m2, r), q0)
        flats.append([int(x) for x in mat.ravel()])
    lower = _fraction_row_rank(flats)
    if lower != count:
        raise CapError("probe found the commuting family dependent")

    gens_int = []
    for i in range(1, n):
        mat, _ = probe_int_matrix(tl_generator(n, m2, i), q0)
        gens_int.append(mat)
    upper = _commutant_upper_bound(gens_int, D, _MODP)
    if upper != lower:
        raise CapError(f"commutant sandwich open: {lower} < dim <= {upper}")
    return lower


def _fraction_row_rank(rows) -> int:
    """Rank of a short, very wide integer matrix; scans columns left to right
    and stops as soon as the rank is saturated."""
    work = [list(map(Fraction, row)) for row in rows]
    nrows = len(work)
    ncols = len(work[0]) if work else 0
    rank = 0
    for col in range(ncols):
        pr = None
        for i in range(rank, nrows):
            if work[i][col]:
                pr = i
                break
        if pr is None:
            continue
        work[rank], work[pr] = work[pr], work[rank]
        inv = work[rank][col]
        prow = [x / inv for x in work[rank]]
        work[rank] = prow
        for i in range(nrows):
            if i != rank and work[i][col]:
                f = work[i][col]
                work[i] = [a - f * b for a, b in zip(work[i], prow)]
        rank += 1
        if rank == nrows:
            break
    return rank


# ---------------------------------------------------------------------------
# Decomposition of the full chain as a quantum-group module at a root of
# unity.  Summands are tilting modules: either a single spin-j block or two
# blocks (j, mu(j)) glued across the nearest singular wall.

def tilting_counts(n: int, p: int):
    """Predicted summand multiset: list of (j2, mu2 or None, count, dim),
    j2 descending, computed from the gamma dimensions by walking each
    reflection chain downward."""
    out = []
    cnt = {}
    for j2 in range(n, -1, -2):
        r = (j2 + 1) % p
        if r == 0 and j2 + 1 > p:
            raise CapError(f"spin {j2}/2 sits on a deep wall ((2j+1) = {(j2 + 1) // p}p)")
        up = j2 + 2 * ((-(j2 + 1)) % p) if r else None  # preimage under reflection
        c = gamma_dim(n, j2) - (cnt.get(up, 0) if up is not None and up <= n else 0)
        cnt[j2] = c
        if c < 0:
            raise CapError("negative multiplicity; chain walk inconsistent")
        if c == 0:
            continue
        if r == 0 or j2 - 2 * r < 0:
            out.append((j2, None, c, j2 + 1))
        else:
            mu2 = j2 - 2 * r
            out.append((j2, mu2, c, (j2 + 1) + (mu2 + 1)))
    return out


class _Span:
    """Incremental row span over a field, with deterministic reduction."""

    def __init__(self, ncols):
        self.rows = []
        self.piv = []
        self.ncols = ncols

    def reduce(self, vec):
        vec = list(vec)
        for row, pc in zip(self.rows, self.piv):
            x = vec[pc]
            if x:
                for k in range(self.ncols):
                    if row[k]:
                        vec[k] = vec[k] - x * row[k]
        return vec

    def add(self, vec):
        """Returns True when vec was independent of the span so far."""
        red = self.reduce(vec)
        for pc in range(self.ncols):
            if red[pc]:
                inv = red[pc]
                self.rows.append([x / inv for x in red])
                self.piv.append(pc)
                return True
        return False

    def contains(self, vec):
        return not any(self.reduce(vec))

    @property
    def rank(self):
        return len(self.rows)


class _RootChain:
    """Dense root-of-unity views of the one-step operators, cached per weight."""

    def __init__(self, n, root):
        self.n = n
        self.root = root
        self._splus = {}
        self._divdown = {}

    def splus_rows(self, m2):
        if m2 not in self._splus:
            op = uq_splus(self.n, m2).eval_root(self.root)
            zero = CycloNumber.zero(self.root)
            self._splus[m2] = op.dense_rows(zero)
        return self._splus[m2]

    def apply_splus(self, m2, vec):
        rows = self.splus_rows(m2)
        zero = CycloNumber.zero(self.root)
        return [
            functools.reduce(
                lambda a, b: a + b, (row[c] * vec[c] for c in range(len(vec)) if vec[c]), zero
            )
            for row in rows
        ]

    def divided_down(self, m2_from, k):
        key = (m2_from, k)
        if key not in self._divdown:
            op = divided_power(self.n, m2_from, k, -1).eval_root(self.root)
            self._divdown[key] = op
        return self._divdown[key]

    def descend(self, m2_from, k, vec_sparse):
        """(S^-)^(k) applied to a sparse {idx: CycloNumber} vector at m2_from."""
        return self.divided_down(m2_from, k).apply(vec_sparse)


def _sparse_of(vec, zero):
    return {i: x for i, x in enumerate(vec) if x}


def _dense_of(sparse, dim, zero):
    out = [zero] * dim
    for i, x in sparse.items():
        out[i] = x
    return out


class _Module:
    __slots__ = ("j2", "top", "mu2", "partner", "glued")

    def __init__(self, j2, top):
        self.j2 = j2
        self.top = top        # sparse vector at weight j2
        self.mu2 = None
        self.partner = None   # sparse vector at weight mu2
        self.glued = False

    def dim(self):
        d = self.j2 + 1
        if self.glued:
            d += self.mu2 + 1
        return d


def uq_pair_decompose(n: int, root: RootSpec):
    """Split the n-site chain into indecomposable quantum-group summands at
    the root of unity and audit every step exactly.

    Walks the weights from the top down.  New highest-weight vectors start
    summands; a descent that turns singular forces its summand to absorb a
    partner solved from one weight up.  The final multiset must match the
    reflection-chain prediction and the layers must exhaust every weight
    space, otherwise this raises.
    """
    p = root.p
    predicted = tilting_counts(n, p)  # raises early on unsupported walls
    chain = _RootChain(n, root)
    zero = CycloNumber.zero(root)
    one = CycloNumber.one(root)
    modules = []

    for m2 in range(n, -n - 1, -2):
        W = weight_space(n, m2)
        D = W.dim
        span = _Span(D)

        # layer vectors contributed by summands already in progress
        for M in modules:
            for vec in _module_layer(M, m2, chain, zero):
                if not span.add(vec):
                    raise CapError("summand layers collided; decomposition invalid")

        # gluing: a module whose current descent is singular takes a partner
        for M in modules:
            if M.glued or (M.j2 + 1) % p == 0:
                continue
            k = (M.j2 - m2) // 2
            if k < 1 or k > M.j2:
                continue
            d_k = chain.descend(M.j2, k, M.top)
            if not d_k:
                continue
            dk_dense = _dense_of(d_k, D, zero)
            if any(chain.apply_splus(m2, dk_dense)):
                continue
            # first singularity must occur at k = (2j+1) mod p
            if k != (M.j2 + 1) % p:
                raise CapError("singular descent at an unexpected depth")
            d_prev = chain.descend(M.j2, k - 1, M.top)
            w = _solve_partner(chain, n, m2, M, d_prev, zero, one)
            if w is None:
                raise CapError("no partner for a singular descent")
            M.mu2 = m2
            M.partner = _sparse_of(w, zero)
            M.glued = True
            if not span.add(w):
                raise CapError("partner vector dependent on existing layers")

        # fresh highest-weight vectors
        if span.rank < D:
            if m2 == n:
                kern = [[one]]
            else:
                kern = kernel_basis(chain.splus_rows(m2), D, one)
            for vec in kern:
                if span.add(vec):
                    modules.append(_Module(m2, _sparse_of(vec, zero)))

        if span.rank != D:
            raise CapError(f"weight {m2} not exhausted: {span.rank} of {D}")

    _audit_closure(n, chain, modules, zero)

    found = {}
    for M in modules:
        key = (M.j2, M.mu2 if M.glued else None)
        found[key] = found.get(key, 0) + 1
    pred_map = {(j2, mu2): c for j2, mu2, c, _ in predicted}
    if found != pred_map:
        raise CapError(f"summand multiset {found} differs from prediction {pred_map}")
    total = sum(M.dim() for M in modules)
    if total != 2 ** n:
        raise CapError("dimension audit failed")
    return [
        {"j2": j2, "mu2": mu2, "count": c, "dim": d}
        for j2, mu2, c, d in predicted
    ]


def _solve_partner(chain: _RootChain, n, mu2, M: _Module, d_prev, zero, one):
    """Find w at weight mu2 with S^+ w = d_prev whose summand closes under
    lowering.

    The raising equation fixes w only up to ker(S^+), and an arbitrary coset
    representative drags other summands' content along.  Descending past the
    partner's own range must land in the single surviving lowering-tail of
    the top part (or vanish), and imposing that for every in-range depth
    pins the kernel freedom down.
    """
    D = weight_space(n, mu2).dim
    rows = chain.splus_rows(mu2)
    rhs = _dense_of(d_prev, weight_space(n, mu2 + 2).dim, zero)
    w0 = solve_particular(rows, rhs, D)
    if w0 is None:
        return None
    kern = kernel_basis(rows, D, one)
    shift = (M.j2 - mu2) // 2  # depth offset between the two lowering tails

    nker = len(kern)
    blocks = []
    for t in itertools.count(mu2 + 1):
        if mu2 - 2 * t < -n:
            break
        low_dim = weight_space(n, mu2 - 2 * t).dim
        over_cols = [
            _dense_of(chain.descend(mu2, t, _sparse_of(kv, zero)), low_dim, zero)
            for kv in kern
        ]
        base = _dense_of(chain.descend(mu2, t, _sparse_of(w0, zero)), low_dim, zero)
        kt = shift + t
        tail = _dense_of(chain.descend(M.j2, kt, M.top), low_dim, zero) if kt <= M.j2 else None
        blocks.append((low_dim, over_cols, base, tail))
    if not blocks:
        return w0

    # unknowns: one coefficient per kernel vector, then one per tail vector
    ntail = sum(1 for b in blocks if b[3] is not None)
    ncols_total = nker + ntail
    eq_rows = []
    eq_rhs = []
    tcol = nker
    for low_dim, over_cols, base, tail in blocks:
        for coord in range(low_dim):
            row = [over_cols[s][coord] for s in range(nker)]
            row += [zero] * ntail
            if tail is not None:
                row[tcol] = -tail[coord]
            eq_rows.append(row)
            eq_rhs.append(-base[coord])
        if tail is not None:
            tcol += 1
    sol = solve_particular(eq_rows, eq_rhs, ncols_total)
    if sol is None:
        return None
    w = list(w0)
    for s in range(nker):
        if sol[s]:
            for idx in range(D):
                if kern[s][idx]:
                    w[idx] = w[idx] + sol[s] * kern[s][idx]
    return w


def _module_layer(M: _Module, m2, chain: _RootChain, zero):
    """Dense layer vectors of a summand at weight m2 (possibly empty)."""
    out = []
    D = weight_space(chain.n, m2).dim
    k = (M.j2 - m2) // 2
    if 0 <= k <= M.j2:
        vec = chain.descend(M.j2, k, M.top) if k else M.top
        if not vec:
            raise CapError("descent vanished inside a summand")
        out.append(_dense_of(vec, D, zero))
    if M.glued and M.mu2 is not None:
        t = (M.mu2 - m2) // 2
        if 1 <= t <= M.mu2:
            vec = chain.descend(M.mu2, t, M.partner)
            if not vec:
                raise CapError("partner descent vanished inside a summand")
            out.append(_dense_of(vec, D, zero))
    return out


def _audit_closure(n, chain: _RootChain, modules, zero):
    """Each summand must close under the divided lowering operators: every
    descent past the tracked layers is zero or already inside the summand."""

    def check(top2, start, k0, what):
        for k in itertools.count(k0):
            m2 = top2 - 2 * k
            if m2 < -n:
                return
            over = chain.descend(top2, k, start)
            if not over:
                continue
            D = weight_space(n, m2).dim
            sp = _Span(D)
            for vec in _module_layer(M, m2, chain, zero):
                sp.add(vec)
            if not sp.contains(_dense_of(over, D, zero)):
                raise CapError(f"summand not closed under lowering ({what})")

    for M in modules:
        check(M.j2, M.top, M.j2 + 1, "top part")
        if M.glued:
            check(M.mu2, M.partner, M.mu2 + 1, "partner part")
