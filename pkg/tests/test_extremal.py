"""Extremalization and convex-domination verification."""

from fractions import Fraction as F

import pytest

from multsys.stepfn import make_step
from multsys.systems import (
    Bounds,
    BoundedSystem,
    canonical_independent_law,
    check_two_valued_independence,
    is_d_multiplicative,
    masks_up_to,
    moment,
    mult_error,
)
from multsys.extremal import (
    ComboOuter,
    ConvexSpec,
    ExpOuter,
    HingeOuter,
    PowerOuter,
    QuasiPolynomial,
    eval_convex,
    expected_convex,
    expected_convex_law,
    expected_convex_many,
    extremal_pipeline,
    extremalize,
    verify_convex_domination,
    verify_convex_domination_many,
)
from multsys.chaos import rademacher, rademacher_system
from multsys.harness import random_convex_spec, random_system, seeded_rng

from oracles import naive_expected_convex, naive_law_expected, naive_spec_value


def unit_bounds(n):
    return tuple(Bounds(F(-1), F(1)) for _ in range(n))


def poly(n, *terms, out_dim=1):
    return QuasiPolynomial(n, out_dim, tuple(terms))


def sq(p):
    return ConvexSpec((p,), F(2), PowerOuter(F(2)))


class TestOuters:
    def test_power_integer_exact(self):
        out = PowerOuter(F(3))
        assert out(F(1, 2)) == F(1, 8)
        assert isinstance(out(F(1, 2)), F)

    def test_power_fractional_float(self):
        out = PowerOuter(F(3, 2))
        assert out(F(4)) == pytest.approx(8.0)

    def test_power_rejects_sub_linear(self):
        with pytest.raises(ValueError):
            PowerOuter(F(1, 2))

    def test_exp(self):
        import math

        assert ExpOuter(F(2))(F(1)) == pytest.approx(math.exp(2))

    def test_hinge(self):
        out = HingeOuter(F(1, 2))
        assert out(F(1, 4)) == 0
        assert out(F(3, 4)) == F(1, 4)

    def test_combo(self):
        out = ComboOuter(
            ((F(1), PowerOuter(F(2))), (F(2), HingeOuter(F(1)))), F(1, 3)
        )
        assert out(F(2)) == F(4) + F(2) + F(1, 3)

    def test_combo_rejects_negative_weight(self):
        with pytest.raises(ValueError):
            ComboOuter(((F(-1), PowerOuter(F(2))),))


class TestEvalConvex:
    def test_max_of_two_polys(self):
        # G(t) = max(|t1|, |t1 t2|)^2 at (2, 3)
        g = ConvexSpec(
            (poly(2, (0b01, (F(1),))), poly(2, (0b11, (F(1),)))),
            F(2),
            PowerOuter(F(2)),
        )
        assert eval_convex(g, (F(2), F(3))) == 36

    def test_vector_norm_inf(self):
        g = ConvexSpec(
            (poly(2, (0b01, (F(1), F(0))), (0b10, (F(0), F(1))), out_dim=2),),
            float("inf"),
            PowerOuter(F(1)),
        )
        assert eval_convex(g, (F(1, 3), F(-1, 2))) == F(1, 2)

    def test_arity_checked(self):
        g = sq(poly(2, (0b01, (F(1),))))
        with pytest.raises(ValueError):
            eval_convex(g, (F(1),))

    def test_duplicate_mask_rejected(self):
        with pytest.raises(ValueError):
            poly(2, (0b01, (F(1),)), (0b01, (F(2),)))

    def test_against_oracle(self):
        rng = seeded_rng("eval-convex-oracle", 1)
        for _ in range(40):
            n = rng.randint(1, 4)
            g = random_convex_spec(rng, n)
            t = [F(rng.randint(-8, 8), 8) for _ in range(n)]
            got = float(eval_convex(g, t))
            want = naive_spec_value(g, [float(x) for x in t])
            assert got == pytest.approx(want, rel=1e-9, abs=1e-12)


class TestExpectedConvex:
    def test_sum_square_of_rademacher_pair(self):
        sys = rademacher_system(2)
        g = sq(poly(2, (0b01, (F(1),)), (0b10, (F(1),))))
        assert expected_convex(sys, g) == 2

    def test_against_oracle(self):
        rng = seeded_rng("expected-convex-oracle", 2)
        for _ in range(25):
            sys = random_system(rng, n_max=4)
            g = random_convex_spec(rng, sys.n)
            got = float(expected_convex(sys, g))
            want = naive_expected_convex(sys, g)
            assert got == pytest.approx(want, rel=1e-9, abs=1e-9)

    def test_many_matches_single(self):
        rng = seeded_rng("expected-convex-many", 3)
        sys = random_system(rng, n_max=4)
        specs = [random_convex_spec(rng, sys.n) for _ in range(6)]
        batch = expected_convex_many(sys, specs)
        for g, v in zip(specs, batch):
            assert v == expected_convex(sys, g)


class TestExpectedConvexLaw:
    def test_fourth_moment_of_sign_sum(self):
        atoms = canonical_independent_law(unit_bounds(2))
        g = ConvexSpec(
            (poly(2, (0b01, (F(1),)), (0b10, (F(1),))),),
            F(2),
            PowerOuter(F(4)),
        )
        assert expected_convex_law(atoms, g) == 8

    def test_asymmetric_abs_mean(self):
        atoms = canonical_independent_law((Bounds(F(-1), F(3)),))
        g = ConvexSpec((poly(1, (0b1, (F(1),))),), F(2), PowerOuter(F(1)))
        assert expected_convex_law(atoms, g) == F(3, 2)

    def test_against_oracle(self):
        rng = seeded_rng("law-oracle", 4)
        for _ in range(20):
            sys = random_system(rng, n_max=3)
            g = random_convex_spec(rng, sys.n)
            atoms = canonical_independent_law(sys.bounds)
            got = float(expected_convex_law(atoms, g))
            want = naive_law_expected(sys.bounds, g)
            assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


class TestExtremalize:
    def test_constant_zero_becomes_fair_sign(self):
        sys = BoundedSystem(
            (make_step(1, [0, 1], [F(0)]),), unit_bounds(1)
        )
        out, trace = extremalize(sys)
        assert list(out.members[0].pieces()) == [
            (F(0), F(1, 2), F(1)),
            (F(1, 2), F(1), F(-1)),
        ]
        assert trace.stages[0].c_points == (F(1, 2),)

    def test_constant_half_splits_at_three_quarters(self):
        sys = BoundedSystem(
            (make_step(1, [0, 1], [F(1, 2)]),), unit_bounds(1)
        )
        out, trace = extremalize(sys)
        assert list(out.members[0].pieces()) == [
            (F(0), F(3, 4), F(1)),
            (F(3, 4), F(1), F(-1)),
        ]
        assert trace.stages[0].c_points == (F(3, 4),)

    def test_output_two_valued(self):
        rng = seeded_rng("extremalize-two-valued", 5)
        for _ in range(15):
            sys = random_system(rng, n_max=4)
            out, _ = extremalize(sys)
            for f, b in zip(out.members, sys.bounds):
                assert set(f.values) <= {b.lower, b.upper}

    def test_preserves_every_subset_moment(self):
        rng = seeded_rng("extremalize-moments", 6)
        for _ in range(15):
            sys = random_system(rng, n_max=4)
            out, _ = extremalize(sys)
            for mask in masks_up_to(sys.n, sys.n):
                assert moment(out, mask) == moment(sys, mask)

    def test_never_decreases_convex_expectation(self):
        rng = seeded_rng("extremalize-monotone", 7)
        for _ in range(15):
            sys = random_system(rng, n_max=4)
            g = random_convex_spec(rng, sys.n)
            out, _ = extremalize(sys)
            before = expected_convex(sys, g)
            after = expected_convex(out, g)
            if isinstance(before, F) and isinstance(after, F):
                assert after >= before
            else:
                assert float(after) >= float(before) - 1e-9

    def test_idempotent(self):
        rng = seeded_rng("extremalize-idem", 8)
        sys = random_system(rng, n_max=4)
        once, _ = extremalize(sys)
        twice, _ = extremalize(once)
        assert twice.members == once.members

    def test_two_valued_input_passes_through(self):
        sys = rademacher_system(3)
        out, _ = extremalize(sys)
        assert out.members == sys.members


class TestPipeline:
    def test_output_is_extremal_and_d_independent(self):
        rng = seeded_rng("pipeline-output", 9)
        for _ in range(8):
            sys = random_system(rng, n_max=4)
            d = rng.randint(1, sys.n)
            out = extremal_pipeline(sys, d)
            assert out.domain_end == 1
            assert is_d_multiplicative(out, d)
            assert check_two_valued_independence(out, d)
            for f, b in zip(out.members, sys.bounds):
                assert set(f.values) <= {b.lower, b.upper}

    def test_d_out_of_range(self):
        sys = rademacher_system(2)
        with pytest.raises(ValueError):
            extremal_pipeline(sys, 3)


class TestVerify:
    def test_rademacher_pair_fourth_power_is_tight(self):
        sys = rademacher_system(2)
        g = ConvexSpec(
            (poly(2, (0b01, (F(1),)), (0b10, (F(1),))),),
            F(2),
            PowerOuter(F(4)),
        )
        rep = verify_convex_domination(sys, g, 2)
        assert rep.passed
        assert rep.lhs == 8
        assert rep.rhs_product_law == 8
        assert rep.slack_product_law == 0
        assert rep.mu == 0
        assert rep.rhs_pipeline is None  # d = n: no extra comparison

    def test_half_rademacher_square(self):
        f = make_step(1, [0, F(1, 2), 1], [F(1, 2), F(-1, 2)])
        sys = BoundedSystem((f,), unit_bounds(1))
        g = sq(poly(1, (0b1, (F(1),))))
        rep = verify_convex_domination(sys, g, 1)
        assert rep.passed
        assert rep.lhs == F(1, 4)
        assert rep.rhs_product_law == 1  # mu = 0, E[xi^2] = 1

    def test_constant_half_picks_up_error_factor(self):
        sys = BoundedSystem(
            (make_step(1, [0, 1], [F(1, 2)]),), unit_bounds(1)
        )
        g = sq(poly(1, (0b1, (F(1),))))
        rep = verify_convex_domination(sys, g, 1)
        assert rep.mu == F(1, 2)
        assert rep.lhs == F(1, 4)
        assert rep.rhs_product_law == 1
        # slack folds in the multiplicative-error factor: (1 + 1/2)*1 - 1/4
        assert rep.slack_product_law == F(5, 4)
        assert rep.passed

    def test_correlated_pair_fails_product_law_but_not_pipeline(self):
        # two copies of the same sign function: the product-law comparison
        # at d = 1 has L = 4 > 2 = R, while the pipeline coupling keeps the
        # correlation and stays tight
        r1 = rademacher(1)
        sys = BoundedSystem((r1, r1), unit_bounds(2))
        g = sq(poly(2, (0b01, (F(1),)), (0b10, (F(1),))))
        rep = verify_convex_domination(sys, g, 1)
        assert rep.lhs == 4
        assert rep.rhs_product_law == 2
        assert not rep.product_law_ok
        assert rep.pipeline_ok
        assert rep.rhs_pipeline == 4
        assert not rep.passed

    def test_random_corpus_passes(self):
        rng = seeded_rng("verify-corpus", 10)
        for _ in range(20):
            sys = random_system(rng, n_max=4)
            specs = [random_convex_spec(rng, sys.n) for _ in range(4)]
            for d in range(1, sys.n + 1):
                reports = verify_convex_domination_many(sys, specs, d)
                assert all(r.passed for r in reports)

    def test_many_matches_single(self):
        rng = seeded_rng("verify-many", 11)
        sys = random_system(rng, n_max=3)
        specs = [random_convex_spec(rng, sys.n) for _ in range(3)]
        batch = verify_convex_domination_many(sys, specs, sys.n)
        for g, rep in zip(specs, batch):
            single = verify_convex_domination(sys, g, sys.n)
            assert single.lhs == rep.lhs
            assert single.rhs_product_law == rep.rhs_product_law
            assert single.passed == rep.passed

    def test_mu_matches_mult_error(self):
        rng = seeded_rng("verify-mu", 12)
        sys = random_system(rng, n_max=4)
        g = random_convex_spec(rng, sys.n)
        for d in range(1, sys.n + 1):
            rep = verify_convex_domination(sys, g, d)
            assert rep.mu == mult_error(sys, d)
