"""Standard modules in their graphical description: link patterns, the
diagrammatic Temperley-Lieb action, and the embedding into spin weight spaces.

A link pattern on n sites ties 2*ell of them pairwise with non-crossing arcs;
the rest are defects.  A defect may never sit under an arc (its strand has to
escape), which pins the count of patterns with ell arcs at gamma_dim(n, n-2l).

The embedding psi sends an arc (i, j) to the two-site combination

    (-1)^i q^(1/2) |-_i +_j>  +  (-1)^j q^(-1/2) |+_i -_j>

applied multiplicatively over arcs to |++...+>.  The alternating site signs
are not decoration: the plain unstaggered combination is an eigenvector of a
single e_i but picks up a stray -1 each time a generator shuffles an arc past
a defect, so it fails to intertwine the full action.  Arcs always join sites
of opposite parity (they enclose an even number of paired sites), which makes
the staggering consistent.
"""

import itertools

from .qnum import LaurentPoly, RatFunc, loop_weight
from .spinrep import Operator, tl_generator, weight_space


class LinkPattern:
    """Non-crossing partial pairing of sites 1..n; unpaired sites are defects.

    Hashable and immutable.  The canonical serialization is the site-to-partner
    array with 0 marking a defect; patterns sort lexicographically by it.
    """

    __slots__ = ("n", "arcs", "defects", "_partner")

    def __init__(self, n, arcs):
        if n < 1:
            raise ValueError("n >= 1 required")
        norm = []
        for a, b in arcs:
            if a == b:
                raise ValueError("arc endpoints must differ")
            norm.append((min(a, b), max(a, b)))
        norm.sort()
        partner = [0] * (n + 1)
        for a, b in norm:
            if not (1 <= a < b <= n):
                raise ValueError(f"arc ({a},{b}) outside sites 1..{n}")
            if partner[a] or partner[b]:
                raise ValueError("site tied by two arcs")
            partner[a], partner[b] = b, a
        for (a, b), (c, d) in itertools.combinations(norm, 2):
            if a < c < b < d:
                raise ValueError(f"arcs ({a},{b}) and ({c},{d}) cross")
        defects = tuple(k for k in range(1, n + 1) if not partner[k])
        for d in defects:
            for a, b in norm:
                if a < d < b:
                    raise ValueError(f"defect {d} trapped under arc ({a},{b})")
        self.n = n
        self.arcs = tuple(norm)
        self.defects = defects
        self._partner = tuple(partner[1:])

    def partner_array(self):
        """Site-to-partner list, 1-based values, 0 for a defect."""
        return list(self._partner)

    @classmethod
    def from_partner_array(cls, arr):
        n = len(arr)
        arcs = [(k + 1, p) for k, p in enumerate(arr) if p > k + 1]
        return cls(n, arcs)

    @property
    def ell(self):
        return len(self.arcs)

    def __eq__(self, other):
        return (isinstance(other, LinkPattern)
                and self.n == other.n and self.arcs == other.arcs)

    def __hash__(self):
        return hash((self.n, self.arcs))

    def __repr__(self):
        body = " ".join(f"({a},{b})" for a, b in self.arcs) or "-"
        return f"LinkPattern(n={self.n}, arcs={body})"


def link_basis(n, ell):
    """All link patterns on n sites with ell arcs, sorted by partner array.

    A defect is only legal where no arc is open, so the walk below keeps a
    stack of open arcs and closes them innermost-first.
    """
    if ell < 0 or 2 * ell > n:
        return []
    out = []

    def walk(site, stack, arcs, opened):
        if site > n:
            if not stack and len(arcs) == ell:
                out.append(LinkPattern(n, arcs))
            return
        if opened < ell:
            stack.append(site)
            walk(site + 1, stack, arcs, opened + 1)
            stack.pop()
        if stack:
            a = stack.pop()
            arcs.append((a, site))
            walk(site + 1, stack, arcs, opened)
            arcs.pop()
            stack.append(a)
        else:
            walk(site + 1, stack, arcs, opened)

    walk(1, [], [], 0)
    out.sort(key=lambda w: w.partner_array())
    return out


class LinkCombination:
    """Formal combination of link patterns with RatFunc scalars; zero scalars
    are never stored."""

    __slots__ = ("n", "terms")

    def __init__(self, n, terms=None):
        self.n = n
        self.terms = {}
        if terms:
            for w, c in terms.items():
                if w.n != n:
                    raise ValueError("mixed chain sizes in one combination")
                if c:
                    self.terms[w] = c

    @classmethod
    def basis_vector(cls, pattern):
        return cls(pattern.n, {pattern: RatFunc.one()})

    def __add__(self, other):
        if not isinstance(other, LinkCombination):
            return NotImplemented
        if self.n != other.n:
            raise ValueError("mixed chain sizes")
        terms = dict(self.terms)
        for w, c in other.terms.items():
            acc = terms.get(w)
            acc = c if acc is None else acc + c
            if acc:
                terms[w] = acc
            elif w in terms:
                del terms[w]
        out = LinkCombination(self.n)
        out.terms = terms
        return out

    def scale(self, s):
        out = LinkCombination(self.n)
        if s:
            out.terms = {w: c * s for w, c in self.terms.items()}
        return out

    def __eq__(self, other):
        return (isinstance(other, LinkCombination)
                and self.n == other.n and self.terms == other.terms)

    def is_zero(self):
        return not self.terms

    def __repr__(self):
        if not self.terms:
            return "LinkCombination(0)"
        bits = [f"({c.format()})*{w!r}" for w, c in self.terms.items()]
        return " + ".join(bits)


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def _union(parent, a, b):
    parent[_find(parent, a)] = _find(parent, b)


def _cap_sites(i, w):
    """Compose the generator's cup-cap at sites (i, i+1) with pattern w.

    Union-find over 2n endpoints: nodes 0..n-1 are the result side, nodes
    n..2n-1 carry w.  Returns (pattern, loops) or (None, 0) when the cup joins
    two defect strands (the image then leaves the standard module).
    """
    n = w.n
    parent = list(range(2 * n))
    for k in range(1, n + 1):
        if k != i and k != i + 1:
            _union(parent, k - 1, n + k - 1)
    _union(parent, i - 1, i)
    _union(parent, n + i - 1, n + i)
    for a, b in w.arcs:
        _union(parent, n + a - 1, n + b - 1)

    comp = {}
    for x in range(2 * n):
        comp.setdefault(_find(parent, x), []).append(x)
    defect_nodes = {n + d - 1 for d in w.defects}

    arcs = []
    loops = 0
    for nodes in comp.values():
        left = [x + 1 for x in nodes if x < n]
        dangling = sum(1 for x in nodes if x in defect_nodes)
        if dangling >= 2:
            return None, 0
        if not left:
            if not dangling:
                loops += 1
            continue
        if len(left) == 2:
            assert not dangling, "strand with three endpoints"
            arcs.append((left[0], left[1]))
        else:
            assert dangling == 1, "strand with a single endpoint"
    return LinkPattern(n, arcs), loops


def act_e(i, v: LinkCombination) -> LinkCombination:
    """Diagrammatic action of the i-th generator on a combination."""
    if not 1 <= i <= v.n - 1:
        raise ValueError(f"generator index {i} outside 1..{v.n - 1}")
    beta = RatFunc.from_poly(loop_weight())
    out = LinkCombination(v.n)
    for w, c in v.terms.items():
        pattern, loops = _cap_sites(i, w)
        if pattern is None:
            continue
        for _ in range(loops):
            c = c * beta
        out = out + LinkCombination(v.n, {pattern: c})
    return out


def psi(n, pattern: LinkPattern):
    """Image of a link pattern in the weight space of its defect count,
    as a dense list of RatFunc coordinates."""
    if pattern.n != n:
        raise ValueError("pattern size differs from n")
    W = weight_space(n, n - 2 * pattern.ell)
    vec = {(1,) * n: LaurentPoly.one()}
    for a, b in pattern.arcs:
        sa = LaurentPoly.v_power(1, +1 if a % 2 == 0 else -1)
        sb = LaurentPoly.v_power(-1, +1 if b % 2 == 0 else -1)
        nxt = {}
        for s, c in vec.items():
            for site, f in ((a, sa), (b, sb)):
                t = list(s)
                t[site - 1] = -1
                key = tuple(t)
                add = c * f
                nxt[key] = nxt[key] + add if key in nxt else add
        vec = nxt
    out = [RatFunc.zero()] * W.dim
    for s, c in vec.items():
        out[W.index[s]] = RatFunc.from_poly(c)
    return out


def psi_sparse(n, pattern: LinkPattern):
    zero = RatFunc.zero()
    return {k: x for k, x in enumerate(psi(n, pattern)) if x != zero}


def verify_psi_homomorphism(n, ell) -> bool:
    """Exact check that psi intertwines the diagrammatic and spin actions."""
    pats = link_basis(n, ell)
    m2 = n - 2 * ell
    images = {w: psi_sparse(n, w) for w in pats}
    for i in range(1, n):
        op = tl_generator(n, m2, i)
        for w in pats:
            lhs = op.apply(images[w])
            acted = act_e(i, LinkCombination.basis_vector(w))
            rhs = {}
            for wp, c in acted.terms.items():
                for k, x in images[wp].items():
                    y = x * c
                    if k in rhs:
                        y = rhs[k] + y
                    if y:
                        rhs[k] = y
                    elif k in rhs:
                        del rhs[k]
            if lhs != rhs:
                return False
    return True
