"""Walsh system, chaos sums, hypercontractive and comparison checks."""

import math
from fractions import Fraction as F

import pytest

from multsys.stepfn import StepFn, integral, make_step, scale
from multsys.systems import Bounds, BoundedSystem
from multsys.extremal import PowerOuter
from multsys.chaos import (
    ChaosSum,
    bonami_kiener_check,
    chaos_eval,
    max_partial_sum,
    product_member,
    rademacher,
    rademacher_system,
    rho,
    second_moment,
    walsh,
    walsh_comparison_check,
    walsh_decompose,
)
from multsys.harness import random_chaos_sum, random_system, seeded_rng


def unit_bounds(n):
    return tuple(Bounds(F(-1), F(1)) for _ in range(n))


def absfn(f):
    return StepFn(f.domain_end, f.breakpoints, tuple(abs(v) for v in f.values))


class TestWalshNumeration:
    def test_decompose_six(self):
        idx = walsh_decompose(6)
        assert idx.exponents == (1, 2)
        assert rho(6) == 2

    def test_w6_is_r2_r3(self):
        assert walsh(6) == rademacher(2) * rademacher(3)

    def test_powers_of_two_are_rademachers(self):
        for m in range(1, 6):
            assert walsh(1 << (m - 1)) == rademacher(m)
            assert rho(1 << (m - 1)) == 1

    def test_w0_constant_one(self):
        assert walsh(0) == StepFn.constant(1)

    def test_decompose_rejects_zero(self):
        with pytest.raises(ValueError):
            walsh_decompose(0)

    def test_orthonormality_up_to_five_factors(self):
        fns = {m: walsh(m) for m in range(32)}
        for a in range(32):
            for b in range(a, 32):
                got = integral(fns[a] * fns[b])
                assert got == (1 if a == b else 0)

    def test_walsh_dirichlet_identity(self):
        for n in range(1, 6):
            total = walsh(0)
            for k in range(1, 1 << n):
                total = total + walsh(k)
            expected = make_step(
                1, [0, F(1, 1 << n), 1], [F(1 << n), F(0)]
            )
            assert total == expected


class TestProductMember:
    def test_rademacher_pair(self):
        base = rademacher_system(2)
        assert product_member(base, 0b11) == walsh(3)

    def test_singleton(self):
        base = rademacher_system(3)
        assert product_member(base, 0b100) == base.members[2]

    def test_duplicated_member_squares_away(self):
        r1 = rademacher(1)
        base = BoundedSystem((r1, r1), unit_bounds(2))
        assert product_member(base, 0b11) == StepFn.constant(1)

    def test_empty_mask_rejected(self):
        with pytest.raises(ValueError):
            product_member(rademacher_system(2), 0)


class TestChaosSum:
    def test_single_walsh_term(self):
        s = ChaosSum(2, (((0b11), (F(1),)),), 2)
        assert chaos_eval(s)[0] == walsh(3)

    def test_sum_of_first_two_rademachers(self):
        s = ChaosSum(2, ((0b01, (F(1),)), (0b10, (F(1),))), 1)
        f = chaos_eval(s)[0]
        assert list(f.pieces()) == [
            (F(0), F(1, 4), F(2)),
            (F(1, 4), F(3, 4), F(0)),
            (F(3, 4), F(1), F(-2)),
        ]

    def test_empty_terms_is_zero(self):
        s = ChaosSum(2, (), 1)
        assert chaos_eval(s)[0] == StepFn.constant(0)

    def test_duplicate_mask_rejected(self):
        with pytest.raises(ValueError):
            ChaosSum(2, ((1, (F(1),)), (1, (F(2),))), 1)

    def test_order_cap_enforced(self):
        with pytest.raises(ValueError):
            ChaosSum(2, ((0b11, (F(1),)),), 1)

    def test_parseval(self):
        rng = seeded_rng("parseval", 1)
        for _ in range(20):
            s = random_chaos_sum(rng, 6, rng.randint(1, 3), rng.randint(1, 6))
            f = chaos_eval(s)[0]
            coeff_sq = sum((c[0] * c[0] for _, c in s.terms), F(0))
            assert second_moment(f) == coeff_sq

    def test_general_base_matches_rademacher_on_rademacher(self):
        rng = seeded_rng("base-agree", 2)
        s_int = random_chaos_sum(rng, 4, rng.randint(1, 2), rng.randint(1, 4))
        n = s_int.n_members
        s_sys = ChaosSum(rademacher_system(n), s_int.terms, s_int.order)
        assert chaos_eval(s_int)[0] == chaos_eval(s_sys)[0]


class TestBonamiKiener:
    def test_single_walsh_function(self):
        s = ChaosSum(2, ((0b11, (F(1),)),), 2)
        rep = bonami_kiener_check(s, 4)
        assert rep.passed
        assert rep.lhs == pytest.approx(1.0)
        assert rep.rhs == pytest.approx(3.0)

    def test_first_order_pair(self):
        s = ChaosSum(2, ((0b01, (F(1),)), (0b10, (F(1),))), 1)
        rep = bonami_kiener_check(s, 4)
        assert rep.passed
        assert rep.lhs == pytest.approx(8 ** 0.25)
        assert rep.rhs == pytest.approx(math.sqrt(3) * math.sqrt(2))

    def test_second_order_pair(self):
        s = ChaosSum(3, ((0b011, (F(1),)), (0b101, (F(1),))), 2)
        rep = bonami_kiener_check(s, 4)
        assert rep.passed
        assert rep.rhs == pytest.approx(3 * math.sqrt(2))

    def test_rejects_low_p(self):
        s = ChaosSum(2, ((0b01, (F(1),)),), 1)
        with pytest.raises(ValueError):
            bonami_kiener_check(s, 2)

    def test_rejects_mixed_orders(self):
        s = ChaosSum(2, ((0b01, (F(1),)), (0b11, (F(1),))), 2)
        with pytest.raises(ValueError):
            bonami_kiener_check(s, 4)

    def test_rejects_non_multiplicative_base(self):
        half = BoundedSystem(
            (make_step(1, [0, 1], [F(1, 2)]),), unit_bounds(1)
        )
        s = ChaosSum(half, ((0b1, (F(1),)),), 1)
        with pytest.raises(ValueError):
            bonami_kiener_check(s, 4)

    def test_rejects_oversized_base(self):
        big = BoundedSystem(
            (make_step(1, [0, 1], [F(2)]),), (Bounds(F(-2), F(2)),)
        )
        s = ChaosSum(big, ((0b1, (F(1),)),), 1)
        with pytest.raises(ValueError):
            bonami_kiener_check(s, 4)

    def test_random_corpus(self):
        rng = seeded_rng("bonami-corpus", 3)
        for _ in range(40):
            d = rng.choice([2, 3])
            s = random_chaos_sum(rng, 8, d, rng.randint(1, 8))
            p = rng.choice([3.0, 4.0, 6.0])
            assert bonami_kiener_check(s, p).passed


class TestMaxPartialSum:
    def test_single_term_is_abs(self):
        s = ChaosSum(2, ((0b10, (F(-3),)),), 1)
        assert max_partial_sum(s, [0b10]) == StepFn.constant(3)

    def test_two_rademachers(self):
        s = ChaosSum(2, ((0b01, (F(1),)), (0b10, (F(1),))), 1)
        f = max_partial_sum(s, [0b01, 0b10])
        # (2, 1, 1, 2) on quarters; the middle pair merges in canonical form
        assert f == make_step(1, [0, F(1, 4), F(3, 4), 1], [2, 1, 2])

    def test_rejects_non_permutation(self):
        s = ChaosSum(2, ((0b01, (F(1),)), (0b10, (F(1),))), 1)
        with pytest.raises(ValueError):
            max_partial_sum(s, [0b01])

    def test_dominates_plain_sum(self):
        rng = seeded_rng("maximal-dominates", 4)
        for _ in range(15):
            s = random_chaos_sum(rng, 5, rng.randint(1, 3), rng.randint(1, 6))
            if not s.terms:
                continue
            order = [m for m, _ in s.terms]
            rng.shuffle(order)
            fmax = max_partial_sum(s, order)
            fsum = chaos_eval(s)[0]
            diff = fmax - absfn(fsum)
            assert all(v >= 0 for v in diff.values)

    def test_general_base(self):
        rng = seeded_rng("maximal-base", 5)
        sys = random_system(rng, n_max=3)
        s = ChaosSum(sys, ((0b01, (F(1, 2),)),), 1)
        f = max_partial_sum(s, [0b01])
        assert f == absfn(scale(sys.members[0], F(1, 2)))


class TestWalshComparison:
    def test_rademacher_base_is_equality(self):
        base = rademacher_system(2)
        terms = [(0b01, [F(1)]), (0b11, [F(1, 2)])]
        rep = walsh_comparison_check(base, terms, PowerOuter(F(2)), 2)
        assert rep.passed
        assert rep.mu == 0
        assert rep.lhs == pytest.approx(rep.rhs)

    def test_scaled_pair_single_product_mask(self):
        base = BoundedSystem(
            (scale(rademacher(1), F(1, 2)), scale(rademacher(2), F(1, 2))),
            unit_bounds(2),
        )
        rep = walsh_comparison_check(
            base, [(0b11, [F(1)])], PowerOuter(F(2)), 2
        )
        assert rep.passed
        assert rep.lhs == pytest.approx(1 / 16)
        assert rep.rhs == pytest.approx(1.0)

    def test_maximal_variant_reported(self):
        base = rademacher_system(2)
        terms = [(0b01, [F(1)]), (0b10, [F(1)])]
        rep = walsh_comparison_check(
            base, terms, PowerOuter(F(2)), 1, order=[0b01, 0b10]
        )
        assert rep.passed
        assert rep.lhs_maximal == pytest.approx(rep.rhs_maximal)
        # E[max(|r1|, |r1+r2|)^2] = (4 + 1 + 1 + 4)/4
        assert rep.lhs_maximal == pytest.approx(2.5)

    def test_pipeline_base_passes_with_zero_error(self):
        from multsys.extremal import extremal_pipeline

        rng = seeded_rng("comparison-pipeline", 6)
        for _ in range(5):
            raw = random_system(rng, n_max=3)
            # normalize so every member satisfies ||phi||_inf <= 1
            sys = BoundedSystem(
                tuple(
                    scale(f, F(1) / max(abs(b.lower), b.upper))
                    for f, b in zip(raw.members, raw.bounds)
                ),
                tuple(
                    Bounds(
                        b.lower / max(abs(b.lower), b.upper),
                        b.upper / max(abs(b.lower), b.upper),
                    )
                    for b in raw.bounds
                ),
            )
            d = rng.randint(1, sys.n)
            base = extremal_pipeline(sys, d)
            terms = [(1 << k, [F(1)]) for k in range(min(d, sys.n))]
            rep = walsh_comparison_check(base, terms, PowerOuter(F(2)), d)
            assert rep.mu == 0
            assert rep.passed
