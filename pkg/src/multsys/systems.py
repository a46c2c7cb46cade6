"""Bounded systems of step functions.

A system is an ordered family phi_1..phi_n of step functions on a common
domain, each confined to a band [A_k, B_k] with A_k < 0 < B_k.  This module
computes exact mixed moments E[prod_{j in A} phi_j] over subset families,
the multiplicative error mu_d (the cap-weighted sum of absolute moments over
subsets of size <= d), a moment-killing extension of the domain that zeroes
any prescribed family of moments, and an exact independence test for
two-valued systems.

Subsets of {1..n} are bit masks: bit k-1 set means member k participates.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Mapping, Sequence

from .stepfn import (
    StepFn,
    as_rational,
    refine_common,
)


# -- subset-mask helpers -------------------------------------------------


def mask_of(members: Iterable[int]) -> int:
    """Bit mask of 1-based member indices."""
    m = 0
    for k in members:
        if k < 1:
            raise ValueError("member indices are 1-based")
        m |= 1 << (k - 1)
    return m


def members_of(mask: int) -> tuple[int, ...]:
    """1-based member indices of a bit mask, ascending."""
    out = []
    k = 1
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return tuple(out)


def masks_up_to(n: int, d: int) -> list[int]:
    """All nonempty subset masks of {1..n} with at most d elements,
    ascending numerically."""
    out = [
        sum(1 << i for i in idxs)
        for size in range(1, d + 1)
        for idxs in combinations(range(n), size)
    ]
    out.sort()
    return out


@dataclass(frozen=True)
class Bounds:
    """Band [lower, upper] with lower < 0 < upper; ``cap`` is
    min(-lower, upper), the weight used by the multiplicative error."""

    lower: Fraction
    upper: Fraction

    def __post_init__(self) -> None:
        lo = as_rational(self.lower)
        up = as_rational(self.upper)
        if not lo < 0 < up:
            raise ValueError(f"bounds must satisfy lower < 0 < upper, got [{lo}, {up}]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def cap(self) -> Fraction:
        return min(-self.lower, self.upper)

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower


@dataclass(frozen=True)
class BoundedSystem:
    """Ordered step functions with per-member bounds, on a common domain."""

    members: tuple[StepFn, ...]
    bounds: tuple[Bounds, ...]

    def __post_init__(self) -> None:
        members = tuple(self.members)
        bounds = tuple(self.bounds)
        if not members:
            raise ValueError("a system needs at least one member")
        if len(members) != len(bounds):
            raise ValueError("one Bounds per member required")
        end = members[0].domain_end
        for k, (f, b) in enumerate(zip(members, bounds), start=1):
            if f.domain_end != end:
                raise ValueError("members must share one domain")
            for v in f.values:
                if not (b.lower <= v <= b.upper):
                    raise ValueError(
                        f"member {k} takes value {v} outside [{b.lower}, {b.upper}]"
                    )
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "bounds", bounds)

    @property
    def n(self) -> int:
        return len(self.members)

    @property
    def domain_end(self) -> Fraction:
        return self.members[0].domain_end


@dataclass(frozen=True)
class SubsetFamily:
    """A finite family of nonempty subsets of {1..n}, as bit masks."""

    n: int
    masks: frozenset[int]

    def __post_init__(self) -> None:
        masks = frozenset(self.masks)
        if self.n < 1:
            raise ValueError("n must be positive")
        full = (1 << self.n) - 1
        for m in masks:
            if m == 0:
                raise ValueError("the empty subset is not allowed")
            if m & ~full:
                raise ValueError(f"mask {m:#x} references members beyond {self.n}")
        object.__setattr__(self, "masks", masks)

    @staticmethod
    def up_to(n: int, d: int) -> "SubsetFamily":
        if not 1 <= d <= n:
            raise ValueError(f"d must lie in 1..{n}")
        return SubsetFamily(n, frozenset(masks_up_to(n, d)))

    @staticmethod
    def exactly(n: int, d: int) -> "SubsetFamily":
        if not 1 <= d <= n:
            raise ValueError(f"d must lie in 1..{n}")
        masks = [m for m in masks_up_to(n, d) if m.bit_count() == d]
        return SubsetFamily(n, frozenset(masks))

    @staticmethod
    def full(n: int) -> "SubsetFamily":
        return SubsetFamily.up_to(n, n)

    def sorted_masks(self) -> list[int]:
        return sorted(self.masks)


def parse_family(text: str, n: int) -> SubsetFamily:
    """Parse a family spec: 'le:d' (all sizes <= d), 'eq:d' (size exactly d),
    or 'all' (every nonempty subset)."""
    t = text.strip().lower()
    if t == "all":
        return SubsetFamily.full(n)
    for prefix, builder in (("le:", SubsetFamily.up_to), ("eq:", SubsetFamily.exactly)):
        if t.startswith(prefix):
            try:
                d = int(t[len(prefix):])
            except ValueError as exc:
                raise ValueError(f"bad family spec {text!r}") from exc
            return builder(n, d)
    raise ValueError(f"bad family spec {text!r} (want 'le:d', 'eq:d', or 'all')")


@dataclass(frozen=True)
class MomentTable:
    """Exact normalized moments E[prod_{j in A} phi_j] for a subset family."""

    n: int
    entries: Mapping[int, Fraction]

    def __getitem__(self, mask: int) -> Fraction:
        return self.entries[mask]


# -- moment computation --------------------------------------------------


def cell_groups(sys: BoundedSystem) -> list[tuple[Fraction, tuple[Fraction, ...]]]:
    """Cells of the common partition grouped by their value vector:
    a list of (total width, per-member values).  Exact and order-stable."""
    part = refine_common(sys.members)
    acc: dict[tuple[Fraction, ...], Fraction] = {}
    cols = part.values
    for j in range(part.n_cells):
        key = tuple(col[j] for col in cols)
        w = part.breakpoints[j + 1] - part.breakpoints[j]
        if key in acc:
            acc[key] += w
        else:
            acc[key] = w
    return [(w, key) for key, w in acc.items()]


class SubsetProducts:
    """Memoized subset products prod_{j in A} values[j-1] for one value
    vector; shared across many masks."""

    __slots__ = ("values", "_memo")

    def __init__(self, values: Sequence[Fraction]):
        self.values = values
        self._memo: dict[int, Fraction] = {0: Fraction(1)}

    def product(self, mask: int) -> Fraction:
        memo = self._memo
        got = memo.get(mask)
        if got is not None:
            return got
        low = mask & -mask
        p = self.product(mask ^ low) * self.values[low.bit_length() - 1]
        memo[mask] = p
        return p


def raw_moment(sys: BoundedSystem, mask: int) -> Fraction:
    """Exact unnormalized integral of prod_{j in A} phi_j over the domain."""
    if mask == 0:
        raise ValueError("the empty subset has no moment")
    total = Fraction(0)
    for w, vals in cell_groups(sys):
        prod = Fraction(1)
        m = mask
        while m:
            low = m & -m
            prod *= vals[low.bit_length() - 1]
            m ^= low
        total += w * prod
    return total


def moment(sys: BoundedSystem, mask: int) -> Fraction:
    """Exact moment E[prod_{j in A} phi_j], domain normalized to measure 1."""
    return raw_moment(sys, mask) / sys.domain_end


def moment_table(sys: BoundedSystem, family: SubsetFamily) -> MomentTable:
    """All moments of the family, computed with shared subset products."""
    if family.n != sys.n:
        raise ValueError("family size does not match the system")
    masks = family.sorted_masks()
    totals = {m: Fraction(0) for m in masks}
    for w, vals in cell_groups(sys):
        sp = SubsetProducts(vals)
        for m in masks:
            totals[m] += w * sp.product(m)
    end = sys.domain_end
    return MomentTable(sys.n, {m: t / end for m, t in totals.items()})


def _cap_products(bounds: Sequence[Bounds], masks: Iterable[int]) -> dict[int, Fraction]:
    sp = SubsetProducts([b.cap for b in bounds])
    return {m: sp.product(m) for m in masks}


def mult_error_family(sys: BoundedSystem, family: SubsetFamily) -> Fraction:
    """Cap-weighted absolute moment sum over an arbitrary subset family."""
    table = moment_table(sys, family)
    caps = _cap_products(sys.bounds, family.masks)
    return sum(
        (abs(m) / caps[mask] for mask, m in table.entries.items()),
        Fraction(0),
    )


def mult_error(sys: BoundedSystem, d: int) -> Fraction:
    """The d-multiplicative error: sum over nonempty A with |A| <= d of
    |E prod_{j in A} phi_j| / prod_{j in A} cap_j.  Zero iff every such
    moment vanishes."""
    if not 1 <= d <= sys.n:
        raise ValueError(f"d must lie in 1..{sys.n}")
    return mult_error_family(sys, SubsetFamily.up_to(sys.n, d))


def is_d_multiplicative(sys: BoundedSystem, d: int) -> bool:
    """True iff every mixed moment over subsets of size <= d is exactly 0."""
    if not 1 <= d <= sys.n:
        raise ValueError(f"d must lie in 1..{sys.n}")
    table = moment_table(sys, SubsetFamily.up_to(sys.n, d))
    return all(m == 0 for m in table.entries.values())


# -- moment-killing extension --------------------------------------------


def extend_to_multiplicative(sys: BoundedSystem, family: SubsetFamily) -> BoundedSystem:
    """Extend the domain from [0, 1) to [0, 1 + mu) so that every subset in
    the family has raw integral exactly zero, without touching values on
    [0, 1) or leaving the bounds.

    For each subset A with nonzero moment m_A, an interval of length
    |m_A| / prod_{j in A} cap_j is appended, split into 2^(|A|-1) equal
    cells.  Each non-distinguished member of A takes cap_j times an
    alternating sign pattern (a distinct dyadic pattern per member), the
    last member of A takes sigma * cap * (product of the other patterns)
    with sigma = -sign(m_A), and members outside A are 0 there.  The
    product over A is then constant sigma * prod caps on the interval and
    cancels m_A; every other subset in the family picks up nothing, because
    a proper subset of the patterns integrates to zero and any subset with
    a member outside A meets a zero factor.  Subsets are processed from
    largest to smallest, so the appended mass is exactly the family's
    multiplicative error.
    """
    if family.n != sys.n:
        raise ValueError("family size does not match the system")
    if sys.domain_end != 1:
        raise ValueError("extension is defined for systems on [0, 1)")
    n = sys.n
    caps = [b.cap for b in sys.bounds]

    # Raw moments over [0,1); appending for a set A never disturbs the
    # moment of any other set in the family, so one upfront pass suffices.
    table = moment_table(sys, family)

    order = sorted(family.masks, key=lambda m: (-m.bit_count(), m))
    segments: list[list[tuple[Fraction, Fraction]]] = [[] for _ in range(n)]
    appended = Fraction(0)

    for mask in order:
        m_a = table.entries[mask]
        if m_a == 0:
            continue
        idxs = members_of(mask)  # 1-based, ascending
        q = len(idxs)
        cap_prod = Fraction(1)
        for k in idxs:
            cap_prod *= caps[k - 1]
        length = abs(m_a) / cap_prod
        cells = 1 << (q - 1)
        cell_w = length / cells
        sigma = -1 if m_a > 0 else 1
        appended += length

        for c in range(cells):
            # sign pattern for the i-th non-distinguished member: bit i of c
            signs = [1 - 2 * ((c >> i) & 1) for i in range(q - 1)]
            prod_signs = 1
            for s in signs:
                prod_signs *= s
            for k in range(1, n + 1):
                if k not in idxs:
                    segments[k - 1].append((cell_w, Fraction(0)))
            for i, k in enumerate(idxs[:-1]):
                segments[k - 1].append((cell_w, signs[i] * caps[k - 1]))
            k_last = idxs[-1]
            segments[k_last - 1].append(
                (cell_w, sigma * prod_signs * caps[k_last - 1])
            )

    if appended == 0:
        return sys

    new_end = Fraction(1) + appended
    new_members = []
    for k, f in enumerate(sys.members):
        bps = list(f.breakpoints)
        vals = list(f.values)
        pos = Fraction(1)
        for w, v in segments[k]:
            pos += w
            bps.append(pos)
            vals.append(v)
        # guard against accumulated-width drift (exact arithmetic: never fires)
        assert pos == new_end
        new_members.append(StepFn(new_end, tuple(bps), tuple(vals)))
    return BoundedSystem(tuple(new_members), sys.bounds)


# -- two-valued independence ---------------------------------------------


def _two_values(f: StepFn) -> tuple[Fraction, Fraction]:
    distinct = sorted(set(f.values))
    if len(distinct) != 2:
        raise ValueError(f"member takes {len(distinct)} distinct values, need exactly 2")
    if 0 in distinct:
        raise ValueError("two-valued independence test requires nonzero values")
    return distinct[0], distinct[1]


def check_two_valued_independence(sys: BoundedSystem, d: int) -> bool:
    """Exact d-independence test for systems whose members each take exactly
    two nonzero values: every joint level set over every subset of at most
    d members must have measure equal to the product of the marginals."""
    if not 1 <= d <= sys.n:
        raise ValueError(f"d must lie in 1..{sys.n}")
    n = sys.n
    pairs = [_two_values(f) for f in sys.members]
    end = sys.domain_end

    groups = cell_groups(sys)
    marginals: list[dict[Fraction, Fraction]] = []
    for k in range(n):
        meas: dict[Fraction, Fraction] = {pairs[k][0]: Fraction(0), pairs[k][1]: Fraction(0)}
        for w, vals in groups:
            meas[vals[k]] += w
        marginals.append({v: m / end for v, m in meas.items()})

    for size in range(2, d + 1):
        for idxs in combinations(range(n), size):
            joint: dict[tuple[Fraction, ...], Fraction] = {}
            for w, vals in groups:
                key = tuple(vals[k] for k in idxs)
                joint[key] = joint.get(key, Fraction(0)) + w
            for assignment in product(*(pairs[k] for k in idxs)):
                expected = Fraction(1)
                for k, v in zip(idxs, assignment):
                    expected *= marginals[k][v]
                actual = joint.get(assignment, Fraction(0)) / end
                if actual != expected:
                    return False
    return True


# -- the mean-zero two-valued product law ---------------------------------


@dataclass(frozen=True)
class LawAtom:
    """One outcome of a finite law: a value per member and its probability."""

    values: tuple[Fraction, ...]
    prob: Fraction


def canonical_independent_law(bounds: Sequence[Bounds]) -> tuple[LawAtom, ...]:
    """The unique independent mean-zero law with values in {lower_k, upper_k}:
    P(upper_k) = -lower_k / (upper_k - lower_k), P(lower_k) the complement;
    2^n product atoms."""
    choices = []
    for b in bounds:
        p_up = -b.lower / b.width
        choices.append(((b.upper, p_up), (b.lower, 1 - p_up)))
    atoms = []
    for combo in product(*choices):
        vals = tuple(v for v, _ in combo)
        prob = Fraction(1)
        for _, p in combo:
            prob *= p
        atoms.append(LawAtom(vals, prob))
    return tuple(atoms)
