"""Exact-arithmetic layer: q-combinatorics, canonical rational functions,
cyclotomic evaluation."""

from fractions import Fraction

import pytest

from tlspin.qnum import (
    CycloNumber,
    LaurentPoly,
    PoleError,
    RatFunc,
    RootSpec,
    cyclotomic_poly,
    eval_at_root,
    identity_a,
    identity_b,
    loop_weight,
    order_at_root,
    q_binomial,
    q_binomial_general,
    q_factorial,
    q_int,
    q_lucas,
    q_num_half,
)


def qp(k, coeff=1):
    return LaurentPoly.q_power(k, coeff)


# --- oracle: q-binomial as an explicit factorial quotient (independent of the
# Pascal recurrence inside q_binomial)

def qbin_oracle(k, l):
    if l < 0 or l > k:
        return LaurentPoly()
    return q_factorial(k).exact_div(q_factorial(l) * q_factorial(k - l))


class TestQInt:
    def test_zero_convention(self):
        assert not q_int(0)

    def test_beta(self):
        assert q_int(2) == qp(1) + qp(-1)
        assert loop_weight() == q_int(2)

    def test_three(self):
        # hand expansion: [3] = q^2 + 1 + q^-2
        assert q_int(3) == LaurentPoly({4: 1, 0: 1, -4: 1})

    def test_odd_function(self):
        for k in range(8):
            assert q_int(-k) == -q_int(k)

    @pytest.mark.parametrize("b", range(1, 11))
    @pytest.mark.parametrize("c", range(1, 11))
    def test_product_expansion(self, b, c):
        # [b][c] = sum_s [b+c-1-2s], s = 0..min(b,c)-1
        total = LaurentPoly()
        for s in range(min(b, c)):
            total = total + q_int(b + c - 1 - 2 * s)
        assert q_int(b) * q_int(c) == total

    def test_evaluation_at_one(self):
        for k in range(1, 9):
            assert q_int(k).eval_q(1) == k


class TestQBinomial:
    def test_edge_rows(self):
        assert q_binomial(5, 0) == LaurentPoly.one()
        assert q_binomial(0, 0) == LaurentPoly.one()
        assert not q_binomial(2, 3)
        assert not q_binomial(4, -1)

    def test_frozen_4_2(self):
        # [4 choose 2] = q^4 + q^2 + 2 + q^-2 + q^-4
        assert q_binomial(4, 2) == LaurentPoly({8: 1, 4: 1, 0: 2, -4: 1, -8: 1})

    def test_single_column_is_qint(self):
        for k in range(1, 10):
            assert q_binomial(k, 1) == q_int(k)

    @pytest.mark.parametrize("k", range(0, 11))
    def test_matches_factorial_quotient(self, k):
        for l in range(0, k + 1):
            assert q_binomial(k, l) == qbin_oracle(k, l)

    @pytest.mark.parametrize("k", range(0, 13))
    def test_symmetry(self, k):
        for l in range(0, k + 1):
            assert q_binomial(k, l) == q_binomial(k, k - l)

    def test_counts_at_one(self):
        from math import comb

        for k in range(9):
            for l in range(k + 1):
                assert q_binomial(k, l).eval_q(1) == comb(k, l)

    def test_general_matches_nonnegative(self):
        for k in range(8):
            for l in range(k + 2):
                assert q_binomial_general(k, l) == q_binomial(k, l)

    def test_general_negative_top(self):
        # [-1 choose l] = (-1)^l q^{-l(l+... } * unit; check the defining product
        for l in range(4):
            prod = LaurentPoly.one()
            for t in range(l):
                prod = prod * q_int(-1 - t)
            assert q_binomial_general(-1, l) * q_factorial(l) == prod


class TestRatFunc:
    def test_cancellation(self):
        num = LaurentPoly({4: 1, -4: -1})
        den = LaurentPoly({2: 1, -2: -1})
        assert RatFunc(num, den) == RatFunc.from_poly(q_int(2))

    def test_canonical_denominator(self):
        f = RatFunc(q_int(1), q_int(2) * Fraction(3, 7))
        assert f.den.min_exp == 0
        assert f.den.content() == 1
        assert Fraction(f.den.c[f.den.max_exp]) > 0

    def test_field_axioms_spot(self):
        a = RatFunc(q_int(3), q_int(2))
        b = RatFunc(q_int(5), q_int(4) * q_int(2))
        assert (a + b) - b == a
        assert (a * b) / b == a
        assert a * a.inverse() == RatFunc.one()
        assert a + (-a) == RatFunc.zero()

    def test_zero_denominator_rejected(self):
        with pytest.raises(ZeroDivisionError):
            RatFunc(q_int(1), LaurentPoly())

    def test_as_poly(self):
        f = RatFunc(q_int(2) * q_int(3), q_int(3))
        assert f.is_polynomial() and f.as_poly() == q_int(2)

    def test_serialization_roundtrip(self):
        f = RatFunc(q_int(3) + LaurentPoly.v_power(1, Fraction(2, 5)), q_int(4))
        assert RatFunc.from_json(f.to_json()) == f
        p = q_int(6)
        assert LaurentPoly.from_json(p.to_json()) == p

    def test_q_num_half(self):
        assert q_num_half(4) == RatFunc.from_poly(q_int(2))
        half = q_num_half(1)  # [1/2] = 1/(v + v^-1)
        assert half * RatFunc.from_poly(LaurentPoly({1: 1, -1: 1})) == RatFunc.one()


class TestRootSpec:
    def test_orders(self):
        assert RootSpec(2, 1).M == 8
        assert RootSpec(3, 1).M == 12
        assert RootSpec(3, 2).M == 6
        assert RootSpec(5, 4).M == 5
        assert RootSpec(4, 3).M == 16

    def test_validation(self):
        with pytest.raises(ValueError):
            RootSpec(1, 1)
        with pytest.raises(ValueError):
            RootSpec(4, 2)

    def test_residues(self):
        for p, l in [(2, 1), (3, 1), (3, 2), (4, 1), (5, 1), (5, 2)]:
            root = RootSpec(p, l)
            v = root.v_residue()
            q = root.q_residue()
            assert v * v == q
            qp_ = CycloNumber.one(root)
            for _ in range(2 * p):
                qp_ = qp_ * q
            assert qp_ == CycloNumber.one(root)
            half = CycloNumber.one(root)
            for _ in range(p):
                half = half * q
            sign = CycloNumber.const(root, (-1) ** (l % 2))
            assert half == sign  # q_c^p = (-1)^l

    def test_cyclotomic_polys(self):
        assert cyclotomic_poly(1) == (-1, 1)
        assert cyclotomic_poly(4) == (1, 0, 1)
        assert cyclotomic_poly(8) == (1, 0, 0, 0, 1)
        assert cyclotomic_poly(12) == (1, 0, -1, 0, 1)

    def test_complex_embedding(self):
        root = RootSpec(3, 1)
        q = root.q_residue().to_complex()
        assert abs(q - root.q_complex()) < 1e-12


class TestCycloNumber:
    def test_inverse(self):
        root = RootSpec(5, 1)
        x = root.v_residue() + CycloNumber.const(root, Fraction(1, 3))
        assert x * x.inverse() == CycloNumber.one(root)

    def test_zero_inverse_rejected(self):
        with pytest.raises(ZeroDivisionError):
            CycloNumber.zero(RootSpec(2, 1)).inverse()

    def test_serialization(self):
        root = RootSpec(3, 1)
        x = root.q_residue()
        data = x.to_json()
        assert data["order"] == 12
        assert all(len(row) == 3 for row in data["residue"])


class TestOrderAndEval:
    @pytest.mark.parametrize("p", [2, 3, 4, 5, 6, 7])
    def test_qint_p_vanishes_simply(self, p):
        root = RootSpec(p, 1)
        assert order_at_root(q_int(p), root) == 1
        assert not eval_at_root(q_int(p), root)

    def test_multiples_of_p_vanish(self):
        # [kp] = 0 at q_c, and nothing else in range vanishes
        for p in (2, 3, 5):
            root = RootSpec(p, 1)
            for k in range(1, 3 * p + 1):
                expected = 1 if k % p == 0 else 0
                assert order_at_root(q_int(k), root) == expected

    def test_order_additivity(self):
        root = RootSpec(3, 1)
        f = RatFunc.from_poly(q_int(3) * q_int(3))
        assert order_at_root(f, root) == 2
        g = RatFunc(q_int(2), q_int(3))
        assert order_at_root(g, root) == -1
        assert order_at_root(f * g, root) == 1

    def test_pole_raises(self):
        root = RootSpec(2, 1)
        with pytest.raises(PoleError):
            eval_at_root(RatFunc(LaurentPoly.one(), q_int(2)), root)

    def test_removable_singularity(self):
        # [6]/[3] -> q^3 + q^-3 at a p = 3 root: cancel first, then evaluate
        root = RootSpec(3, 1)
        f = RatFunc(q_int(6), q_int(3))
        assert eval_at_root(f, root) == eval_at_root(qp(3) + qp(-3), root)

    def test_exact_cancellation_to_zero(self):
        root = RootSpec(2, 1)
        f = RatFunc(-LaurentPoly.one(), q_int(2)) + RatFunc(LaurentPoly.one(), q_int(2))
        assert not f
        assert not eval_at_root(f, root)

    def test_eval_multiplicative(self):
        root = RootSpec(5, 2)
        f = RatFunc(q_int(3), q_int(2))
        g = RatFunc(q_int(4) + LaurentPoly.one(), q_int(7))
        assert eval_at_root(f * g, root) == eval_at_root(f, root) * eval_at_root(g, root)

    def test_eval_at_i(self):
        # p = 2, l = 1: q_c = i, so q_c^2 = -1
        root = RootSpec(2, 1)
        q = eval_at_root(RatFunc.from_poly(qp(1)), root)
        assert q * q == CycloNumber.const(root, -1)


class TestQLucas:
    @pytest.mark.parametrize("p", [2, 3, 4, 5])
    def test_exhaustive_small_blocks(self, p):
        root = RootSpec(p, 1)
        for k in range(4):
            for kp in range(4):
                for a in range(p):
                    for ap in range(p):
                        binom, small, _ = q_lucas(k, kp, a, ap, root)
                        lhs = q_binomial(k * p + a, kp * p + ap)
                        vanishes = (binom == 0) or (not small)
                        lhs_vanishes = (not lhs) or order_at_root(lhs, root) >= 1
                        assert vanishes == lhs_vanishes

    def test_simple_zero(self):
        # when the small factor vanishes it does so to first order only
        for p in (3, 5):
            root = RootSpec(p, 1)
            for a in range(p):
                for ap in range(a + 1):
                    f = q_binomial(a, ap)
                    assert order_at_root(f, root) <= 1


class TestTelescopingIdentities:
    @pytest.mark.parametrize("k", range(1, 7))
    def test_identity_a(self, k):
        for j2 in range(0, 9):
            for l in range(0, k):
                assert identity_a(l, j2, k)

    @pytest.mark.parametrize("i", range(1, 7))
    def test_identity_b(self, i):
        for m2 in range(0, 9):
            for l in range(0, i):
                assert identity_b(l, m2, i)

    def test_range_validation(self):
        with pytest.raises(ValueError):
            identity_a(3, 0, 3)
        with pytest.raises(ValueError):
            identity_b(2, 0, 2)


class TestCasimirScalars:
    @pytest.mark.parametrize("j2", range(0, 13))
    def test_central_eigenvalue_closed_form(self, j2):
        # (q - q^-1)^2 ([j+1/2]^2 - [1/2]^2) + [2] = q^(2j+1) + q^-(2j+1)
        #                                          = [2(2j+1)]/[2j+1]
        dq = RatFunc.from_poly(LaurentPoly({2: 1, -2: -1}))
        lhs = dq * dq * (q_num_half(j2 + 1) * q_num_half(j2 + 1)
                         - q_num_half(1) * q_num_half(1)) + RatFunc.from_poly(q_int(2))
        rhs = RatFunc(q_int(2 * (j2 + 1)), q_int(j2 + 1))
        assert lhs == rhs
        assert rhs == RatFunc.from_poly(LaurentPoly({2 * (j2 + 1): 1, -2 * (j2 + 1): 1}))

    def test_distinct_for_distinct_j(self):
        vals = [RatFunc(q_int(2 * (j2 + 1)), q_int(j2 + 1)) for j2 in range(0, 13)]
        for a in range(len(vals)):
            for b in range(a + 1, len(vals)):
                assert vals[a] != vals[b]


class TestFormatting:
    def test_poly_format(self):
        assert q_int(2).format() == "q + q^-1"
        assert LaurentPoly().format() == "0"
        assert LaurentPoly({1: 1, -3: -2}).format() == "v - 2*v^-3"

    def test_deterministic_json(self):
        f = q_binomial(5, 2)
        assert f.to_json() == f.to_json()
