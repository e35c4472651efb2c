"""Tests for the generic-q projector family.

Independent oracle: on a canonical descent vector of spin j', the operator
S_i acts by the scalar qbin(j'+m+i, i) * qbin(j'-m, i) (checked against the
spin representation in the spinrep tests).  Feeding those scalars through the
coefficient list must give delta_{j j'}, which pins every coefficient without
ever building a matrix.  Matrix-level assembly, orthogonality, and the
verification report are then tested on top.
"""

import json
from fractions import Fraction

import pytest

from tlspin.idempotent import (casimir_relation_check, coeff_a, family_j2,
                               idempotent_z, recursion_check, verify_family)
from tlspin.linalg import rank
from tlspin.linkstate import link_basis, psi
from tlspin.qnum import LaurentPoly, RatFunc, q_binomial, q_int
from tlspin.spinrep import (Operator, central_eigenvalue, gamma_dim,
                            tl_generator, weight_space)


def scalar_action(j2, jp2, m2, imax):
    # --- oracle: eigenvalue of sum a_i S_i on a spin-j' descent vector
    acc = RatFunc.zero()
    for i in range(imax + 1):
        w = q_binomial((jp2 + m2) // 2 + i, i) * q_binomial((jp2 - m2) // 2, i)
        acc = acc + coeff_a(i, j2, m2) * w
    return acc


def inv_qint(k):
    return RatFunc(LaurentPoly.one(), q_int(k))


class TestCoeffA:
    @pytest.mark.parametrize("j2", range(0, 9))
    def test_top_coefficient_is_one(self, j2):
        assert coeff_a(0, j2, j2) == RatFunc.one()

    def test_frozen_small_values(self):
        assert coeff_a(1, 0, 0) == -inv_qint(2)
        assert coeff_a(1, 2, 0) == inv_qint(2)
        assert coeff_a(1, 1, 1) == -RatFunc(q_int(2), q_int(3) * q_int(2))

    def test_vanishes_below_range(self):
        for j2, m2 in [(2, 0), (4, 0), (4, 2), (3, 1), (5, 1)]:
            for i in range((j2 - m2) // 2):
                assert not coeff_a(i, j2, m2)

    def test_parity_and_range_errors(self):
        with pytest.raises(ValueError):
            coeff_a(0, 1, 0)
        with pytest.raises(ValueError):
            coeff_a(0, 0, 2)
        with pytest.raises(ValueError):
            coeff_a(-1, 0, 0)

    @pytest.mark.parametrize("n,m2", [(4, 0), (5, 1), (6, 0), (6, 2),
                                      (7, 1), (8, 0), (9, 1)])
    def test_telescoping(self, n, m2):
        # summing the family coefficients at fixed i must collapse to S_0
        imax = (n - m2) // 2
        for i in range(imax + 1):
            acc = RatFunc.zero()
            for j2 in family_j2(n, m2):
                acc = acc + coeff_a(i, j2, m2)
            assert acc == (RatFunc.one() if i == 0 else RatFunc.zero())

    @pytest.mark.parametrize("n,m2", [(2, 0), (4, 0), (4, 2), (5, 1),
                                      (6, 0), (6, 2), (7, 1), (8, 0)])
    def test_scalar_action_is_kronecker(self, n, m2):
        imax = (n - m2) // 2
        for j2 in family_j2(n, m2):
            for jp2 in family_j2(n, m2):
                want = RatFunc.one() if j2 == jp2 else RatFunc.zero()
                assert scalar_action(j2, jp2, m2, imax) == want, (j2, jp2)


class TestIdempotentZ:
    def test_n2_frozen_matrix(self):
        z = idempotent_z(2, 0, 0)
        half = inv_qint(2)
        e1 = tl_generator(2, 0, 1)
        assert z == e1.map_entries(lambda x: RatFunc.from_poly(x) * half)
        zt = idempotent_z(2, 2, 0)
        W = weight_space(2, 0)
        assert z + zt == Operator.identity(W, RatFunc.one())

    @pytest.mark.parametrize("n", range(2, 7))
    def test_top_projector_is_identity(self, n):
        W = weight_space(n, n)
        assert idempotent_z(n, n, n) == Operator.identity(W, RatFunc.one())

    @pytest.mark.parametrize("n,m2", [(2, 0), (3, 1), (4, 0), (4, 2), (5, 1)])
    def test_idempotent_and_orthogonal(self, n, m2):
        js = family_j2(n, m2)
        zs = {j2: idempotent_z(n, j2, m2) for j2 in js}
        for j2 in js:
            assert zs[j2] @ zs[j2] == zs[j2]
        for a in range(len(js)):
            for b in range(a + 1, len(js)):
                assert (zs[js[a]] @ zs[js[b]]).is_zero()

    @pytest.mark.parametrize("n,m2", [(2, 0), (4, 0), (5, 1), (6, 0), (6, 4)])
    def test_trace_counts_block_dimension(self, n, m2):
        for j2 in family_j2(n, m2):
            tr = idempotent_z(n, j2, m2).trace()
            assert tr == RatFunc.one() * gamma_dim(n, j2)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            idempotent_z(4, 1, 0)
        with pytest.raises(ValueError):
            idempotent_z(4, 6, 0)
        with pytest.raises(ValueError):
            idempotent_z(4, 2, -2)


class TestProjectorOnLinkImage:
    """The embedded standard module is exactly the j = m block."""

    @pytest.mark.parametrize("n", range(2, 7))
    def test_kills_higher_blocks_exactly(self, n):
        for ell in range(n // 2 + 1):
            m2 = n - 2 * ell
            vecs = [{r: x for r, x in enumerate(psi(n, w)) if x}
                    for w in link_basis(n, ell)]
            for j2 in family_j2(n, m2):
                if j2 == m2:
                    continue
                z = idempotent_z(n, j2, m2)
                assert all(z.apply(v) == {} for v in vecs)

    @pytest.mark.parametrize("n", range(2, 7))
    def test_bottom_block_keeps_full_rank(self, n):
        qv = Fraction(3, 2)
        for ell in range(n // 2 + 1):
            m2 = n - 2 * ell
            basis = link_basis(n, ell)
            z = idempotent_z(n, m2, m2)
            W = weight_space(n, m2)
            rows = []
            for w in basis:
                vec = z.apply({r: x for r, x in enumerate(psi(n, w)) if x})
                dense = [Fraction(0)] * W.dim
                for r, x in vec.items():
                    dense[r] = (x.eval_q(qv) if ell % 2 == 0
                                else (x * LaurentPoly.v_power(1)).eval_q(qv))
                rows.append(dense)
            assert rank(rows, W.dim) == len(basis)
            assert len(basis) == gamma_dim(n, m2)


class TestVerifyFamily:
    @pytest.mark.parametrize("n,m2,count", [(2, 0, 2), (3, 1, 2), (4, 0, 3),
                                            (4, 2, 2), (5, 1, 3), (6, 2, 3)])
    def test_symbolic_families_pass(self, n, m2, count):
        rep = verify_family(n, m2)
        assert rep["mode"] == "symbolic"
        assert rep["all_pass"]
        assert len(rep["idempotents"]) == count
        assert rep["commutant_dim"] == count
        assert rep["primitive_certified"]

    def test_probe_family_passes(self):
        rep = verify_family(7, 1)
        assert rep["mode"] == "probe"
        assert rep["all_pass"]
        assert len(rep["idempotents"]) == 4

    def test_probe_agrees_with_symbolic(self):
        a = verify_family(5, 1, mode="symbolic")
        b = verify_family(5, 1, mode="probe")
        assert a["all_pass"] and b["all_pass"]
        assert [e["j"] for e in a["idempotents"]] == \
            [e["j"] for e in b["idempotents"]]

    def test_report_shape_and_labels(self):
        rep = verify_family(5, 1)
        assert rep["n"] == 5 and rep["m"] == "1/2"
        assert [e["j"] for e in rep["idempotents"]] == ["1/2", "3/2", "5/2"]
        assert [e["trace"] for e in rep["idempotents"]] == [5, 4, 1]
        for e in rep["idempotents"]:
            assert set(e["checks"]) == {"idempotent", "tl_commutes", "trace",
                                        "diagonal_action"}
        assert rep["orthogonality"] and rep["partition_of_unity"]
        json.dumps(rep)

    def test_integer_m_label(self):
        rep = verify_family(4, 2)
        assert rep["m"] == 1
        assert [e["j"] for e in rep["idempotents"]] == [1, 2]

    def test_mode_caps(self):
        with pytest.raises(ValueError):
            verify_family(9, 1, mode="symbolic")
        with pytest.raises(ValueError):
            verify_family(13, 1, mode="probe")


class TestRecursion:
    @pytest.mark.parametrize("n,j2,m2", [(4, 0, 0), (4, 2, 0), (4, 2, 2),
                                         (5, 1, 1), (6, 0, 0), (6, 2, 0),
                                         (6, 4, 2), (7, 3, 1)])
    def test_closed_form_solves_recursion(self, n, j2, m2):
        assert recursion_check(n, j2, m2)

    def test_top_spin_has_no_ancestor(self):
        with pytest.raises(ValueError):
            recursion_check(4, 4, 0)


class TestCasimirRelation:
    def test_scalar_identity(self):
        # [2(2j+1)]/[2j+1] collapses to the central eigenvalue
        for j2 in range(10):
            assert RatFunc(q_int(2 * (j2 + 1)), q_int(j2 + 1)) == \
                RatFunc.from_poly(central_eigenvalue(j2))

    def test_frozen_n2_scalars(self):
        assert central_eigenvalue(0) == q_int(2)
        assert RatFunc.from_poly(central_eigenvalue(2)) == \
            RatFunc(q_int(6), q_int(3))

    @pytest.mark.parametrize("n", range(2, 6))
    def test_family_relation(self, n):
        assert casimir_relation_check(n)
