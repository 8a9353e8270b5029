import math
from fractions import Fraction

import mpmath as mp
import pytest

import gx1cycles as gx
from gx1cycles.nodes import (COLLATZ_FAMILY, THREE_X1_FAMILY, NodeFamily,
                             family_for_mapping, lambda_in_open_interval)


class TestLambdaExact:
    def test_first_product(self):
        assert gx.lambda_exact(COLLATZ_FAMILY, (1, 1)) == Fraction(8, 9)

    def test_table_value_to_15_digits(self):
        lam = gx.lambda_exact(COLLATZ_FAMILY, (31, 22))
        assert abs(float(lam) - 0.997914046257308) < 1e-13

    def test_matthews_full_counts(self, mat):
        assert gx.lambda_exact(mat, (1, 1, 1, 1)) == Fraction(255, 256)

    def test_matthews_1747_cycle_lambda(self, mat):
        lam = gx.lambda_exact(mat, (432, 434, 450, 431))
        assert abs(float(lam) - 1.354586564) < 1e-8

    def test_from_branch_counts(self, g):
        counts = gx.branch_counts(gx.trajectory(g, 4, 5))
        assert gx.lambda_exact(g, counts) == Fraction(256, 243)

    def test_counts_length_checked(self, g):
        with pytest.raises(ValueError):
            gx.lambda_exact(g, (1, 1))


class TestLnLambda:
    def test_first_product(self, g):
        ln = gx.ln_lambda(g, (1, 1, 0))
        assert abs(float(ln.value) - math.log(8 / 9)) < 1e-12
        assert float(ln.value) == pytest.approx(-0.1177830, abs=1e-6)

    def test_empty_counts_give_exact_zero(self, g):
        ln = gx.ln_lambda(g, (0, 0, 0))
        assert ln.value == 0 and ln.error_bound == 0

    def test_deep_row_needs_extended_precision(self):
        # 9126 growth and 6475 division uses, yet |ln lambda| < 2e-5
        g = gx.collatz()
        ln = gx.ln_lambda(g, (6475, 9126, 0))
        assert 0 < abs(float(ln.value)) < 2e-5

    def test_error_bound_documented(self, g):
        for bits in (64, 128, 256, 512):
            ln = gx.ln_lambda(g, (5, 100, 70), precision_bits=bits)
            assert ln.error_bound <= mp.mpf(2) ** (8 - bits)

    def test_agrees_with_exact_fraction(self, g):
        for counts in ((1, 1, 0), (3, 10, 7), (22, 20, 11)):
            lam = gx.lambda_exact(g, counts)
            ln = gx.ln_lambda(g, counts)
            with mp.workprec(300):
                direct = mp.ln(mp.mpf(lam.numerator)) - mp.ln(mp.mpf(lam.denominator))
                assert abs(ln.value - direct) <= 2 * float(ln.error_bound) + mp.mpf(2) ** -290

    def test_ln_matches_exact_for_all_reference_rows(self):
        from gx1cycles.reference import load_reference_table

        for name, mapping, vec in (("collatz", gx.collatz(),
                                    lambda k1, k2: (k2, k1, 0)),
                                   ("3x1", gx.three_x_plus_one(),
                                    lambda k1, k2: (k2, k1))):
            for row in load_reference_table(name)["rows"]:
                counts = vec(row["k1"], row["k2"])
                ln = gx.ln_lambda(mapping, counts)
                lam = gx.lambda_exact(mapping, counts)
                with mp.workprec(400):
                    direct = mp.ln(mp.mpf(lam.numerator)) - mp.ln(mp.mpf(lam.denominator))
                    assert abs(ln.value - direct) <= ln.error_bound + mp.mpf(2) ** -380

    def test_negative_multiplier_warns_and_flags(self):
        m = gx.validate(2, [(1, 0), (-3, 1)])
        with pytest.warns(UserWarning, match="negative multiplier"):
            ln = gx.ln_lambda(m, (1, 3))
        assert ln.negative
        assert gx.lambda_exact(m, (1, 3)) < 0


class TestRhoMax:
    def test_values(self):
        assert gx.rho_max(0) == 0
        assert gx.rho_max(1) == Fraction(1, 3)
        assert gx.rho_max(3) == Fraction(37, 27)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            gx.rho_max(-1)

    def test_matches_brute_force_small(self, g):
        import itertools

        from gx1cycles.affine import compose_affine

        for k1 in range(0, 5):
            for k2 in range(0, 5):
                best = Fraction(0)
                for pos in itertools.combinations(range(k1 + k2), k1):
                    for choice in itertools.product((1, 2), repeat=k1):
                        seq = [0] * (k1 + k2)
                        for p, c in zip(pos, choice):
                            seq[p] = c
                        best = max(best, abs(compose_affine(g, seq).offset))
                assert best == gx.rho_max(k1), (k1, k2)


class TestBoundC:
    @pytest.mark.parametrize("family,counts,expected", [
        (COLLATZ_FAMILY, (1, 1), 0.9067673),
        (THREE_X1_FAMILY, (1, 1), 0.3704306),
        (COLLATZ_FAMILY, (7, 5), 5.0150589),
    ])
    def test_published_rows(self, family, counts, expected):
        result = gx.bound_C(family, counts)
        assert result.ln_C == pytest.approx(expected, abs=1e-5)

    def test_atkin_constant(self):
        result = gx.bound_C(COLLATZ_FAMILY, (1, 1), constant=gx.COLLATZ_CONSTANT_FROM_8)
        assert result.constant == Fraction(63, 248)
        assert result.C < gx.bound_C(COLLATZ_FAMILY, (1, 1)).C

    def test_undefined_without_growth(self):
        with pytest.raises(ValueError, match="k_growth"):
            gx.bound_C(COLLATZ_FAMILY, (0, 5))

    def test_generalized_requires_constant(self, mat):
        with pytest.raises(ValueError, match="explicit"):
            gx.bound_C(mat, (1, 1, 1, 1))
        result = gx.bound_C(mat, (1, 1, 1, 1), constant=Fraction(1, 4))
        assert result.k_growth == 3          # everything outside class 0
        assert result.C == pytest.approx(0.25 * 3 / abs(math.log(255 / 256)), rel=1e-9)

    def test_unit_lambda_rejected(self):
        m = gx.validate(2, [(2, 0), (2, 2)])
        with pytest.raises(ValueError, match="lambda exactly 1"):
            gx.bound_C(m, (0, 1), constant=Fraction(1, 2))

    def test_mapping_resolves_to_family(self, h):
        # variant mappings share the Collatz two-slope family
        counts = gx.branch_counts(gx.detect_cycle(h, 8))
        result = gx.bound_C(h, counts)
        assert result.constant == Fraction(7, 24)
        assert result.k_growth == 3


class TestGenerateNodes:
    def test_first_products(self):
        nodes = gx.generate_nodes(COLLATZ_FAMILY, max_nodes=6)
        pairs = [(n.k1, n.k2) for n in nodes]
        assert pairs == [(0, 1), (1, 0), (1, 1), (2, 1), (3, 2), (4, 3)]
        assert [n.side for n in nodes] == ["PP", "PG", "PP", "PG", "PG", "PP"]
        assert nodes[4].value == pytest.approx(256 / 243, abs=1e-14)
        assert nodes[5].value == pytest.approx(0.93644261545496, abs=1e-13)

    def test_3x1_first_products(self):
        nodes = gx.generate_nodes(THREE_X1_FAMILY, max_nodes=7)
        values = [n.value for n in nodes]
        assert values[2] == pytest.approx(0.75, abs=1e-15)
        assert values[3] == pytest.approx(1.125, abs=1e-15)
        assert values[4] == pytest.approx(0.84375, abs=1e-15)
        assert values[5] == pytest.approx(0.94921875, abs=1e-15)
        assert values[6] == pytest.approx(1.06787109375, abs=1e-15)

    def test_depth_zero_gives_seeds_only(self):
        nodes = gx.generate_nodes(COLLATZ_FAMILY, max_main_nodes=0)
        assert [(n.k1, n.k2) for n in nodes] == [(0, 1), (1, 0)]
        assert nodes[0].ln_c is None

    def test_deep_pg_value(self):
        nodes = gx.generate_nodes(COLLATZ_FAMILY, max_main_nodes=7)
        deep = [n for n in nodes if (n.k1, n.k2) == (179, 127)]
        assert len(deep) == 1
        assert deep[0].value == pytest.approx(1.00102276179641, abs=1e-13)
        assert deep[0].side == "PG" and (deep[0].i, deep[0].j) == (7, 5)

    def test_run_structure_to_depth_9(self):
        nodes = gx.generate_nodes(COLLATZ_FAMILY, max_main_nodes=9)
        from gx1cycles.nodes import _run_lengths

        assert _run_lengths(nodes) == (1, 2, 2, 3, 1, 5, 2, 23)

    def test_max_k_stop(self):
        nodes = gx.generate_nodes(COLLATZ_FAMILY, max_k=53)
        assert nodes[-1].k == 53 and (nodes[-1].k1, nodes[-1].k2) == (31, 22)

    def test_requires_stop_condition(self):
        with pytest.raises(ValueError, match="stop condition"):
            gx.generate_nodes(COLLATZ_FAMILY)

    def test_lambda_fraction_guard(self):
        nodes = gx.generate_nodes(COLLATZ_FAMILY, max_nodes=3)
        assert nodes[2].lambda_fraction() == Fraction(8, 9)
        with pytest.raises(ValueError):
            nodes[2].lambda_fraction(max_k=1)

    def test_numerator_power_of_two_denominator_power_of_three(self):
        for n in gx.generate_nodes(COLLATZ_FAMILY, max_main_nodes=6):
            lam = n.lambda_fraction()
            num = lam.numerator
            den = lam.denominator
            assert num & (num - 1) == 0          # power of 2
            while den % 3 == 0:
                den //= 3
            assert den == 1

    def test_sides_match_value(self):
        for n in gx.generate_nodes(COLLATZ_FAMILY, max_main_nodes=8):
            if n.side == "PP":
                assert n.value < 1
            else:
                assert n.value > 1

    def test_monotone_approach_to_one(self):
        nodes = gx.generate_nodes(COLLATZ_FAMILY, max_k=16_000)
        last = {"PP": None, "PG": None}
        for n in nodes[2:]:
            lam = n.lambda_fraction()
            prev = last[n.side]
            if prev is not None:
                if n.side == "PP":
                    assert prev < lam < 1
                else:
                    assert 1 < lam < prev
            last[n.side] = lam

    def test_carnielli_family_nodes(self):
        fam = family_for_mapping(gx.carnielli_T(3))
        nodes = gx.generate_nodes(fam, max_nodes=8)
        # seeds 1/3 and 4/3, first product 4/9, then climbing back
        assert nodes[0].value == pytest.approx(1 / 3)
        assert nodes[1].value == pytest.approx(4 / 3)
        assert nodes[2].value == pytest.approx(4 / 9)
        for n in nodes:
            lo, hi = fam.lambda_range()
            assert lambda_in_open_interval(fam, n.k1, n.k2, lo, hi) or n.k == 1

    def test_range_confinement_sample(self):
        for n in gx.generate_nodes(COLLATZ_FAMILY, max_nodes=300):
            assert lambda_in_open_interval(COLLATZ_FAMILY, n.k1, n.k2,
                                           Fraction(1, 2), Fraction(2))


class TestFamilies:
    def test_family_for_mapping(self, g, t31, h):
        assert family_for_mapping(g) is COLLATZ_FAMILY
        assert family_for_mapping(t31) is THREE_X1_FAMILY
        assert family_for_mapping(h) is COLLATZ_FAMILY

    def test_family_for_carnielli(self):
        fam = family_for_mapping(gx.carnielli_T(5))
        assert (fam.d, fam.m_div, fam.m_grow) == (5, 1, 6)
        assert fam.constant is None

    def test_matthews_has_no_two_slope_family(self, mat):
        with pytest.raises(ValueError):
            family_for_mapping(mat)

    def test_node_family_selector(self):
        assert gx.node_family("collatz") is COLLATZ_FAMILY
        assert gx.node_family("perm:3") is COLLATZ_FAMILY
        assert gx.node_family(THREE_X1_FAMILY) is THREE_X1_FAMILY

    def test_bad_family_shape_rejected(self):
        with pytest.raises(ValueError):
            NodeFamily("bad", 3, 4, 5)


class TestReciprocity:
    def test_published_depths(self):
        ng = gx.generate_nodes(COLLATZ_FAMILY, max_main_nodes=9)
        nt = gx.generate_nodes(THREE_X1_FAMILY, max_main_nodes=10)
        rep = gx.reciprocity_check(ng, nt)
        assert rep.ok
        assert rep.runs_collatz[-1] == 23 and rep.runs_3x1[-1] == 23
        assert rep.runs_3x1 == (1,) + rep.runs_collatz

    def test_seed_half_excluded(self):
        ng = gx.generate_nodes(COLLATZ_FAMILY, max_nodes=5)
        nt = gx.generate_nodes(THREE_X1_FAMILY, max_nodes=6)
        rep = gx.reciprocity_check(ng, nt)
        assert rep.ok
        # the 3x+1 seed PP=1/2 is the one unmatched value
        assert rep.pairs_checked == len(nt) - 1

    def test_mismatch_detected(self):
        ng = gx.generate_nodes(COLLATZ_FAMILY, max_nodes=6)
        rep = gx.reciprocity_check(ng, ng)
        assert not rep.ok
