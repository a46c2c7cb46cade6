"""Bounded systems: moments, multiplicative error, extension, independence."""

from fractions import Fraction as F

import pytest

from multsys.stepfn import integral, make_step, restrict
from multsys.systems import (
    Bounds,
    BoundedSystem,
    SubsetFamily,
    canonical_independent_law,
    check_two_valued_independence,
    extend_to_multiplicative,
    is_d_multiplicative,
    mask_of,
    masks_up_to,
    members_of,
    moment,
    moment_table,
    mult_error,
    mult_error_family,
    parse_family,
)
from multsys.chaos import rademacher_system
from multsys.harness import random_system, seeded_rng

from oracles import naive_moment, naive_mult_error


class TestMasks:
    def test_roundtrip(self):
        assert mask_of([1, 3]) == 0b101
        assert members_of(0b101) == (1, 3)
        assert members_of(mask_of([2])) == (2,)

    def test_masks_up_to(self):
        assert masks_up_to(3, 1) == [1, 2, 4]
        assert len(masks_up_to(4, 4)) == 15

    def test_one_based(self):
        with pytest.raises(ValueError):
            mask_of([0])


class TestBounds:
    def test_cap(self):
        b = Bounds(F(-1, 4), F(1, 2))
        assert b.cap == F(1, 4)
        assert b.width == F(3, 4)

    def test_sign_constraint(self):
        with pytest.raises(ValueError):
            Bounds(F(1, 4), F(1, 2))
        with pytest.raises(ValueError):
            Bounds(F(-1), F(0))


class TestSystemConstruction:
    def test_value_outside_bounds_rejected(self):
        f = make_step(1, [0, 1], [2])
        with pytest.raises(ValueError):
            BoundedSystem((f,), (Bounds(F(-1), F(1)),))

    def test_domain_mismatch_rejected(self):
        f = make_step(1, [0, 1], [F(1, 2)])
        g = make_step(2, [0, 2], [F(1, 2)])
        with pytest.raises(ValueError):
            BoundedSystem((f, g), (Bounds(F(-1), F(1)), Bounds(F(-1), F(1))))


class TestFamilies:
    def test_parse(self):
        assert parse_family("le:2", 3).masks == frozenset(masks_up_to(3, 2))
        assert parse_family("all", 2).masks == frozenset([1, 2, 3])
        eq2 = parse_family("eq:2", 3).masks
        assert eq2 == frozenset([0b011, 0b101, 0b110])

    def test_parse_errors(self):
        with pytest.raises(ValueError):
            parse_family("huh", 3)
        with pytest.raises(ValueError):
            parse_family("le:0", 3)


class TestMoments:
    def test_rademacher_moments_vanish(self):
        sys = rademacher_system(4)
        for mask in masks_up_to(4, 4):
            assert moment(sys, mask) == 0

    def test_against_naive_oracle(self):
        rng = seeded_rng("test-moments", 11)
        for _ in range(25):
            sys = random_system(rng, n_max=4)
            for mask in masks_up_to(sys.n, sys.n):
                assert moment(sys, mask) == naive_moment(sys, mask)

    def test_mult_error_against_oracle(self):
        rng = seeded_rng("test-mu", 5)
        for _ in range(15):
            sys = random_system(rng, n_max=4)
            for d in range(1, sys.n + 1):
                assert mult_error(sys, d) == naive_mult_error(sys, d)

    def test_moment_table_covers_family(self):
        sys = rademacher_system(3)
        fam = SubsetFamily.up_to(3, 2)
        table = moment_table(sys, fam)
        assert set(table.entries) == set(fam.masks)

    def test_d_multiplicative_flag(self):
        assert is_d_multiplicative(rademacher_system(3), 3)
        half = BoundedSystem(
            (make_step(1, [0, 1], [F(1, 2)]),), (Bounds(F(-1), F(1)),)
        )
        assert not is_d_multiplicative(half, 1)


class TestExtension:
    def test_worked_example_constant_half(self):
        sys = BoundedSystem(
            (make_step(1, [0, 1], [F(1, 2)]),), (Bounds(F(-1), F(1)),)
        )
        ext = extend_to_multiplicative(sys, SubsetFamily.up_to(1, 1))
        assert ext.domain_end == F(3, 2)
        # appended stretch carries -1 so the raw integral cancels
        assert list(ext.members[0].pieces()) == [
            (F(0), F(1), F(1, 2)),
            (F(1), F(3, 2), F(-1)),
        ]
        assert integral(ext.members[0]) == 0

    def test_zeroes_every_family_moment_exactly(self):
        rng = seeded_rng("test-extend", 23)
        for _ in range(20):
            sys = random_system(rng, n_max=5)
            d = rng.randint(1, sys.n)
            fam = SubsetFamily.up_to(sys.n, d)
            ext = extend_to_multiplicative(sys, fam)
            table = moment_table(ext, fam)
            assert all(v == 0 for v in table.entries.values())

    def test_extension_length_is_family_error(self):
        rng = seeded_rng("test-extend-len", 7)
        for _ in range(10):
            sys = random_system(rng, n_max=4)
            fam = SubsetFamily.up_to(sys.n, sys.n)
            ext = extend_to_multiplicative(sys, fam)
            assert ext.domain_end == 1 + mult_error_family(sys, fam)

    def test_prefix_untouched_and_bounds_respected(self):
        rng = seeded_rng("test-extend-prefix", 3)
        for _ in range(10):
            sys = random_system(rng, n_max=4)
            fam = SubsetFamily.up_to(sys.n, sys.n)
            ext = extend_to_multiplicative(sys, fam)
            for orig, new, b in zip(sys.members, ext.members, sys.bounds):
                assert restrict(new, F(1)) == orig
                assert all(b.lower <= v <= b.upper for v in new.values)

    def test_multiplicative_input_is_fixed_point(self):
        sys = rademacher_system(3)
        ext = extend_to_multiplicative(sys, SubsetFamily.up_to(3, 3))
        assert ext.domain_end == 1
        assert ext.members == sys.members

    def test_requires_unit_domain(self):
        f = make_step(2, [0, 2], [F(1, 2)])
        sys = BoundedSystem((f,), (Bounds(F(-1), F(1)),))
        with pytest.raises(ValueError):
            extend_to_multiplicative(sys, SubsetFamily.up_to(1, 1))


class TestIndependence:
    def test_rademacher_is_fully_independent(self):
        sys = rademacher_system(4)
        assert check_two_valued_independence(sys, 4)

    def test_duplicated_member_fails_pairwise(self):
        r1 = make_step(1, [0, F(1, 2), 1], [1, -1])
        sys = BoundedSystem(
            (r1, r1), (Bounds(F(-1), F(1)), Bounds(F(-1), F(1)))
        )
        assert not check_two_valued_independence(sys, 2)

    def test_rejects_three_valued_member(self):
        f = make_step(1, [0, F(1, 3), F(2, 3), 1], [1, F(1, 2), -1])
        sys = BoundedSystem((f,), (Bounds(F(-1), F(1)),))
        with pytest.raises(ValueError):
            check_two_valued_independence(sys, 1)


class TestCanonicalLaw:
    def test_single_member_weights(self):
        atoms = canonical_independent_law((Bounds(F(-1), F(3)),))
        # P(B) = -A/(B-A) = 1/4, P(A) = 3/4
        weights = {a.values[0]: a.prob for a in atoms}
        assert weights[F(3)] == F(1, 4)
        assert weights[F(-1)] == F(3, 4)

    def test_mean_zero_and_total_mass(self):
        bounds = (Bounds(F(-1, 2), F(1)), Bounds(F(-2), F(1, 3)))
        atoms = canonical_independent_law(bounds)
        assert sum(a.prob for a in atoms) == 1
        for k in range(2):
            assert sum(a.prob * a.values[k] for a in atoms) == 0

    def test_atom_count(self):
        bounds = tuple(Bounds(F(-1), F(1)) for _ in range(4))
        assert len(canonical_independent_law(bounds)) == 16
