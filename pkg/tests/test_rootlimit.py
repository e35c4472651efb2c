"""Degeneration machinery: labels, cycles, bound pairs, exact limits,
projector families and block multiplicities at roots of unity."""

import pytest

from tlspin.qnum import CycloNumber, PoleError, RatFunc, RootSpec, eval_at_root, order_at_root, q_int
from tlspin.idempotent import coeff_a, family_j2
from tlspin.spinrep import gamma_dim, s_r_operator, dim_weight
from tlspin import rootlimit as rl


class TestLabels:
    def test_frozen_triples(self):
        assert rl.labels(6, 18, 18, 4) == (1, 2, 0, 0, 6, 1)
        assert rl.labels(6, 20, 18, 4).adg == (2, 1, 2)
        assert rl.labels(0, 7, 7, 3).adg == (0, 0, 2)
        assert rl.labels(3, 6, 2, 3) == (1, 0, 0, 2, 2, 2)

    def test_residues_bounded(self):
        for p in (2, 3, 5):
            for m2 in range(0, 7):
                for j2 in range(m2, 13, 2):
                    for i in range((j2 - m2) // 2, 9):
                        lab = rl.labels(i, j2, m2, p)
                        assert 0 <= lab.a < p and 0 <= lab.d < p and 0 <= lab.g < p
                        assert lab.r * p + lab.a == i

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            rl.labels(0, 2, 0, 1)
        with pytest.raises(ValueError):
            rl.labels(-1, 2, 0, 3)
        with pytest.raises(ValueError):
            rl.labels(2, 3, 0, 3)   # j - m not integral
        with pytest.raises(ValueError):
            rl.labels(2, 0, 2, 3)   # j < m


class TestCriticality:
    def test_integer_spins(self):
        assert rl.is_critical(2, 3)       # [3] dies at p = 3
        assert not rl.is_critical(1, 3)
        assert rl.is_critical(14, 5)
        assert rl.is_critical(4, 5)

    def test_odd_chain_all_critical_at_p2(self):
        # 2j + 1 is even for every half-integer j
        assert all(rl.is_critical(j2, 2) for j2 in range(1, 21, 2))
        assert not any(rl.is_critical(j2, 2) for j2 in range(0, 21, 2))


class TestSingularity:
    def test_criterion_matches_order_everywhere(self):
        # the checked cross-validation is inside is_singular; a sweep that
        # never raises is the content of the test
        for p in (2, 3, 4, 5):
            root = RootSpec(p)
            for n in (6, 9):
                for m2 in range(n % 2, n + 1, 2):
                    for j2 in family_j2(n, m2):
                        for i in range((j2 - m2) // 2, (n - m2) // 2 + 1):
                            rl.is_singular(i, j2, m2, root)

    def test_spurious_rejected(self):
        with pytest.raises(ValueError):
            rl.is_singular(0, 4, 0, RootSpec(3))

    def test_positive_orders_occur(self):
        # numerators vanish too: regular coefficients of order +1 and +2
        assert not rl.is_singular(3, 6, 2, RootSpec(3))
        assert order_at_root(coeff_a(3, 6, 2), RootSpec(3)) == 1
        assert not rl.is_singular(6, 8, 0, RootSpec(3))
        assert order_at_root(coeff_a(6, 8, 0), RootSpec(3)) == 2

    def test_critical_always_regular(self):
        root = RootSpec(3)
        for i in range(1, 8):
            assert not rl.is_singular(i, 2, 0, root)
            assert not rl.is_singular(i, 2, 2, root)


class TestCyclesAndPairs:
    def test_frozen_pairs_20_3_5(self):
        pairs, kind = rl.bound_pairs(20, 6, 5)
        assert pairs == [(6, 12), (8, 10), (18, 20)]
        assert kind[14] == "critical"
        assert kind[16] == "unbound"

    def test_minimal_case(self):
        pairs, kind = rl.bound_pairs(2, 0, 2)
        assert pairs == [(0, 2)]
        assert kind == {0: "bound", 2: "bound"}

    def test_pair_members_not_critical(self):
        for n in range(2, 13):
            for p in (2, 3, 4, 5):
                for m2 in range(n % 2, n + 1, 2):
                    pairs, kind = rl.bound_pairs(n, m2, p)
                    for a, b in pairs:
                        assert not rl.is_critical(a, p)
                        assert not rl.is_critical(b, p)
                        assert (a + b + 2) % (2 * p) == 0   # j + j' = p - 1 mod p

    def test_rightmost_cycle_length(self):
        # built-in assertion: rightmost cycle on line i has i % p + 1 entries
        for n in (8, 11, 14):
            for p in (2, 3, 5):
                for m2 in range(n % 2, n + 1, 2):
                    d = rl.cycle_diagram(n, m2, p)
                    for i in d.rows:
                        assert len(d.rightmost[i]) == i % p + 1

    def test_lines_share_block_structure(self):
        # every cycle is an initial segment of a bottom-line block
        d = rl.cycle_diagram(14, 2, 3)
        bottom = {c[0]: c for c in d.cycles[d.rows[-1]]}
        for i in d.rows:
            for cyc in d.cycles[i]:
                assert cyc == bottom[cyc[0]][:len(cyc)]

    def test_partner_labels(self):
        # on singular lines the partner labels reflect: d' = a - g, g' = a - d
        d = rl.cycle_diagram(30, 18, 4)
        for (j2, j2p) in d.pairs:
            for i in d.rows:
                if (i, j2) in d.singular:
                    assert (i, j2p) in d.singular
                    la, lb = d.grid[(i, j2)], d.grid[(i, j2p)]
                    assert lb.d == la.a - la.g
                    assert lb.g == la.a - la.d

    def test_singularity_lockstep(self):
        # both members of a bound pair turn singular on exactly the same lines
        for (n, m2, p) in ((12, 0, 3), (13, 1, 4), (14, 2, 5)):
            d = rl.cycle_diagram(n, m2, p)
            for (j2, j2p) in d.pairs:
                for i in d.rows:
                    if (i, j2) in d.grid and (i, j2p) in d.grid:
                        assert ((i, j2) in d.singular) == ((i, j2p) in d.singular)

    def test_opposite_trace_residues(self):
        # [2j' + 1] = -[2j + 1] at the root, the seed of the pole cancellation
        for (n, m2, p) in ((12, 0, 3), (20, 6, 5)):
            root = RootSpec(p)
            for (j2, j2p) in rl.bound_pairs(n, m2, p)[0]:
                a = eval_at_root(q_int(j2 + 1), root)
                b = eval_at_root(q_int(j2p + 1), root)
                assert a + b == CycloNumber.zero(root)


class TestFigureGrids:
    def test_big_even_grid(self):
        d = rl.cycle_diagram(30, 18, 4)
        assert d.grid[(0, 18)].adg == (0, 0, 3)
        assert d.rightmost[0] == [18]
        assert d.grid[(6, 18)].adg == (2, 0, 1) and (6, 18) in d.singular
        assert d.grid[(6, 20)].adg == (2, 1, 2) and (6, 20) in d.singular
        assert d.grid[(6, 22)].adg == (2, 2, 3) and (6, 22) not in d.singular
        assert d.grid[(6, 24)].adg == (2, 3, 0) and (6, 24) not in d.singular
        assert d.pairs == [(18, 20), (22, 24), (26, 28)]
        assert d.kind[30] == "unbound"
        assert d.critical_positions() == [19, 23, 27, 31]

    def test_half_integer_grid(self):
        d = rl.cycle_diagram(25, 13, 5)
        assert d.cols == list(range(13, 26, 2))
        # labels are periodic along each line with period p
        for i in d.rows:
            for j2 in d.cols:
                if (i, j2) in d.grid and (i + 5, j2) in d.grid:
                    assert d.grid[(i, j2)].adg == d.grid[(i + 5, j2)].adg

    def test_text_rendering_marks(self):
        text = rl.cycle_diagram(30, 18, 4).to_text()
        assert "(2,0,1)!" in text      # singular mark
        assert "•" in text        # spurious cell below the triangle
        assert "‹" in text and "›" in text
        assert "pairs: (9,10), (11,12), (13,14)" in text
        assert "unbound: 15" in text


class TestLimits:
    def test_minimal_chain_frozen(self):
        root = RootSpec(2)
        z = rl.limit_idempotent(2, (0, 2), 0, root)
        s0 = s_r_operator(2, 0, 0).eval_root(root)
        assert z.ent == s0.ent
        nil = rl.nilpotent(2, (0, 2), 0, root)
        s1 = s_r_operator(2, 0, 1).eval_root(root)
        assert all(nil.ent[k] == -v for k, v in s1.ent.items())
        assert set(nil.ent) == set(s1.ent)

    def test_pair_sum_regular(self):
        # coefficient sums of a bound pair have no pole left
        for (n, m2, p) in ((6, 0, 3), (8, 2, 3), (12, 0, 5)):
            root = RootSpec(p)
            for pair in rl.bound_pairs(n, m2, p)[0]:
                for i in range((n - m2) // 2 + 1):
                    c = coeff_a(i, pair[0], m2) + coeff_a(i, pair[1], m2)
                    if c:
                        assert order_at_root(c, root) >= 0

    def test_rejects_unbound_pair(self):
        with pytest.raises(ValueError):
            rl.limit_idempotent(6, (2, 6), 0, RootSpec(3))
        with pytest.raises(ValueError):
            rl.nilpotent(6, (2, 6), 0, RootSpec(3))

    def test_projector_at_root_pole(self):
        with pytest.raises(PoleError):
            rl.projector_at_root(6, 0, 0, RootSpec(3))   # bound j is singular

    def test_nilpotent_square_zero(self):
        root = RootSpec(3)
        nil = rl.nilpotent(6, (0, 4), 0, root)
        sq = rl._cycmat(nil, root) @ rl._cycmat(nil, root)
        assert sq.is_zero()
        assert not nil.is_zero()


class TestProjectorFamily:
    def test_n6_structure(self):
        fam = rl.projector_family(6, 0, RootSpec(3))
        kinds = [(m.kind, tuple(m.j2)) for m in fam.members]
        assert kinds == [("pair", (0, 4)), ("critical", (2,)), ("unbound", (6,))]
        traces = [m.trace_expected for m in fam.members]
        assert traces == [gamma_dim(6, 0) + gamma_dim(6, 4), gamma_dim(6, 2), gamma_dim(6, 6)]
        assert traces == [10, 9, 1]
        assert fam.all_pass
        assert fam.checks["commutant_dim"] == 4
        assert fam.checks["primitive_certified"] is True

    def test_odd_chain_semisimple(self):
        # p = 2 on an odd chain: every j critical, generic family specializes
        fam = rl.projector_family(5, 1, RootSpec(2))
        assert all(m.kind == "critical" for m in fam.members)
        assert fam.all_pass and fam.checks["primitive_certified"] is True

    def test_small_sweep(self):
        for n in (2, 3, 4, 5, 6):
            for p in (2, 3, 4):
                for m2 in range(n % 2, n + 1, 2):
                    fam = rl.projector_family(n, m2, RootSpec(p))
                    assert fam.all_pass, (n, m2, p, fam.checks)
                    assert fam.checks["primitive_certified"] is True, (n, m2, p)
                    npairs = len(rl.bound_pairs(n, m2, p)[0])
                    assert len(fam.members) == (n - m2) // 2 + 1 - npairs

    def test_structurally_glued_block(self):
        # a block that repeats a composition factor defeats the Krylov path;
        # the sketch fallback must still certify it
        fam = rl.projector_family(8, 2, RootSpec(2))
        assert fam.all_pass and fam.checks["primitive_certified"] is True

    def test_other_primitive_roots(self):
        for l in (3,):
            fam = rl.projector_family(4, 0, RootSpec(2, l))
            assert fam.all_pass and fam.checks["primitive_certified"] is True
        fam = rl.projector_family(6, 0, RootSpec(3, 2))
        assert fam.all_pass and fam.checks["primitive_certified"] is True

    def test_generic_degeneration_note(self):
        fam = rl.projector_family(4, 0, RootSpec(7))
        assert fam.note is not None
        assert not rl.bound_pairs(4, 0, 7)[0]
        assert fam.all_pass

    def test_member_sum_traces(self):
        fam = rl.projector_family(7, 1, RootSpec(3))
        assert sum(m.trace_expected for m in fam.members) == dim_weight(7, 1)


class TestMultiplicities:
    def test_frozen_table_6_3(self):
        rep = rl.multiplicities(6, RootSpec(3))
        got = {(e["module"], e["j2"]): (e["multiplicity"], e["dimension"])
               for e in rep.entries}
        assert got == {("P", 2): (3, 9), ("P", 4): (1, 10),
                       ("P", 6): (4, 6), ("V", 6): (3, 1)}
        assert rep.total == 64
        assert rep.all_pass

    def test_per_weight_blocks_20_5(self):
        rep = rl.multiplicities(20, RootSpec(5))
        w3 = [(b["module"], b["j2"]) for b in rep.per_weight[6]]
        assert set(w3) == {("P", 12), ("P", 10), ("V", 14), ("V", 16), ("P", 20)}
        assert rep.all_pass

    def test_odd_chain_p2_semisimple(self):
        rep = rl.multiplicities(5, RootSpec(2))
        assert all(e["kind"] == "critical" for e in rep.entries)
        assert all(e["multiplicity"] == e["j2"] + 1 for e in rep.entries)
        assert rep.all_pass

    def test_generic(self):
        rep = rl.multiplicities(6)
        assert rep.root is None
        assert all(e["multiplicity"] == e["j2"] + 1 for e in rep.entries)
        assert rep.total == 64 and rep.all_pass

    def test_audit_sweep(self):
        for n in range(1, 13):
            for p in (2, 3, 4, 5, 7):
                rep = rl.multiplicities(n, RootSpec(p))
                assert rep.total == 2 ** n, (n, p)
                assert rep.all_pass, (n, p, rep.cross_checks)

    def test_deep_root_matches_generic_counts(self):
        # p > n: every block is a plain V_j with its generic multiplicity
        rep = rl.multiplicities(4, RootSpec(7))
        assert [(e["module"], e["multiplicity"]) for e in rep.entries] == \
            [("V", 1), ("V", 3), ("V", 5)]
