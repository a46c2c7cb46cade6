"""Walsh functions, product systems, and chaos sums.

The Walsh system is numbered canonically: the binary digits of the index
name the Rademacher factors, w_n = prod r_{k+1} over the set bits k of n,
so the integer index doubles as the subset mask.  Chaos sums are finitely
supported coefficient families over subset masks, evaluated exactly per
cell either over the dyadic grid (Rademacher base) or over the common
refinement of an arbitrary bounded base system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .extremal import OuterConvex
from .stepfn import StepFn, as_rational, p_norm, refine_common, sup_norm
from .systems import (
    BoundedSystem,
    Bounds,
    SubsetProducts,
    members_of,
    mult_error,
)


def rademacher(k: int) -> StepFn:
    """r_k: 2^k equal pieces alternating +1, -1, starting +1."""
    if k < 1:
        raise ValueError("Rademacher index must be >= 1")
    m = 1 << k
    bps = tuple(Fraction(i, m) for i in range(m + 1))
    vals = tuple(Fraction(1 - 2 * (i & 1)) for i in range(m))
    return StepFn(Fraction(1), bps, vals)


def rademacher_system(n: int) -> BoundedSystem:
    """(r_1, ..., r_n) with bounds [-1, 1]."""
    b = Bounds(Fraction(-1), Fraction(1))
    return BoundedSystem(tuple(rademacher(k) for k in range(1, n + 1)), (b,) * n)


@dataclass(frozen=True)
class WalshIndex:
    """Dyadic decomposition of a Walsh index: n = sum 2^{k_i} with
    k_1 < ... < k_d; the power rho(n) = d is the order of w_n."""

    n: int
    exponents: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("Walsh index must be >= 1")
        if sum(1 << k for k in self.exponents) != self.n or len(set(self.exponents)) != len(
            self.exponents
        ):
            raise ValueError("exponents must be the binary decomposition of n")
        object.__setattr__(self, "exponents", tuple(sorted(self.exponents)))

    @property
    def power(self) -> int:
        return len(self.exponents)


def walsh_decompose(n: int) -> WalshIndex:
    """Binary decomposition of n; rho(n) is the popcount."""
    if n < 1:
        raise ValueError("Walsh index must be >= 1")
    return WalshIndex(n, tuple(k for k in range(n.bit_length()) if (n >> k) & 1))


def rho(n: int) -> int:
    """Number of binary ones of n: the order of the Walsh function w_n."""
    if n < 1:
        raise ValueError("rho is defined for n >= 1")
    return n.bit_count()


def _walsh_sign(cell: int, mask: int, levels: int) -> int:
    """Sign of w_mask on dyadic cell ``cell`` of 2^levels equal cells.

    Bit k of the mask is the factor r_{k+1}, whose sign on the cell is
    read off bit (levels - 1 - k) of the cell index.
    """
    acc = 0
    m = mask
    while m:
        k = (m & -m).bit_length() - 1
        acc ^= (cell >> (levels - 1 - k)) & 1
        m &= m - 1
    return 1 - 2 * acc


def walsh(n: int) -> StepFn:
    """w_n under the canonical numeration; w_0 is the constant 1."""
    if n < 0:
        raise ValueError("Walsh index must be >= 0")
    if n == 0:
        return StepFn.constant(1)
    levels = n.bit_length()
    cells = 1 << levels
    bps = tuple(Fraction(i, cells) for i in range(cells + 1))
    vals = tuple(Fraction(_walsh_sign(i, n, levels)) for i in range(cells))
    return StepFn(Fraction(1), bps, vals)


def product_member(base: BoundedSystem, mask: int) -> StepFn:
    """phi_A = prod_{k in A} phi_k, exact."""
    if mask == 0:
        raise ValueError("the empty subset has no product member")
    if mask >> base.n:
        raise ValueError(f"mask {mask} references members beyond {base.n}")
    idxs = members_of(mask)
    out = base.members[idxs[0] - 1]
    for k in idxs[1:]:
        out = out * base.members[k - 1]
    return out


@dataclass(frozen=True)
class ChaosSum:
    """sum_A b_A phi_A over distinct nonempty subset masks of order <= order,
    with shared-dimension coefficient vectors.  ``base`` is either a
    BoundedSystem or an integer n standing for the Rademacher system
    r_1..r_n."""

    base: Union[BoundedSystem, int]
    terms: tuple[tuple[int, tuple[Fraction, ...]], ...]
    order: int

    def __post_init__(self) -> None:
        n = self.base if isinstance(self.base, int) else self.base.n
        if n < 1:
            raise ValueError("base must have at least one member")
        if self.order < 1:
            raise ValueError("order cap must be >= 1")
        full = (1 << n) - 1
        seen = set()
        dim = None
        coerced = []
        for mask, coeff in self.terms:
            if mask == 0:
                raise ValueError("chaos terms need nonempty masks")
            if mask & ~full:
                raise ValueError(f"mask {mask} references members beyond {n}")
            if mask in seen:
                raise ValueError(f"duplicate mask {mask}")
            if mask.bit_count() > self.order:
                raise ValueError(f"mask {mask} exceeds the order cap {self.order}")
            seen.add(mask)
            vec = tuple(as_rational(c) for c in coeff)
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise ValueError("coefficient vectors must share a dimension")
            if not vec:
                raise ValueError("coefficient vectors must be nonempty")
            coerced.append((mask, vec))
        object.__setattr__(self, "terms", tuple(coerced))

    @property
    def n_members(self) -> int:
        return self.base if isinstance(self.base, int) else self.base.n

    @property
    def dim(self) -> int:
        return len(self.terms[0][1]) if self.terms else 1


def _dyadic_cells(terms, levels: int) -> list[tuple[Fraction, ...]]:
    """Per-cell coefficient sums of a Rademacher-based chaos sum on the
    dyadic grid with 2^levels cells; one tuple per coordinate is built by
    the caller from the returned per-cell vectors."""
    dim = len(terms[0][1])
    cells = 1 << levels
    out = []
    for i in range(cells):
        acc = [Fraction(0)] * dim
        for mask, coeff in terms:
            s = _walsh_sign(i, mask, levels)
            if s > 0:
                for c in range(dim):
                    acc[c] += coeff[c]
            else:
                for c in range(dim):
                    acc[c] -= coeff[c]
        out.append(tuple(acc))
    return out


def chaos_eval(s: ChaosSum) -> tuple[StepFn, ...]:
    """The chaos sum as exact step functions, one per coordinate."""
    dim = s.dim
    if not s.terms:
        return tuple(StepFn.constant(0) for _ in range(dim))
    if isinstance(s.base, int):
        levels = max(mask.bit_length() for mask, _ in s.terms)
        cells = _dyadic_cells(s.terms, levels)
        m = len(cells)
        bps = tuple(Fraction(i, m) for i in range(m + 1))
        return tuple(
            StepFn(Fraction(1), bps, tuple(cell[c] for cell in cells))
            for c in range(dim)
        )
    part = refine_common(s.base.members)
    bps = part.breakpoints
    out_vals: list[list[Fraction]] = [[] for _ in range(dim)]
    for j in range(part.n_cells):
        products = SubsetProducts(tuple(col[j] for col in part.values))
        acc = [Fraction(0)] * dim
        for mask, coeff in s.terms:
            p = products.product(mask)
            for c in range(dim):
                acc[c] += coeff[c] * p
        for c in range(dim):
            out_vals[c].append(acc[c])
    return tuple(
        StepFn(part.domain_end, bps, tuple(vals)) for vals in out_vals
    )


def second_moment(f: StepFn) -> Fraction:
    """Exact E[f^2] with the domain normalized to measure one."""
    total = Fraction(0)
    for lo, hi, v in f.pieces():
        total += v * v * (hi - lo)
    return total / f.domain_end


@dataclass(frozen=True)
class ChaosBoundReport:
    """One hypercontractive comparison ||S||_p <= (p-1)^{d/2} ||S||_2."""

    p: float
    d: int
    lhs: float
    rhs: float
    slack: float
    passed: bool
    tol: float
    details: dict


def bonami_kiener_check(s: ChaosSum, p: float, tol: float = 1e-9) -> ChaosBoundReport:
    """Check the order-d hypercontractive bound for a pure chaos sum of
    order d: every mask must have exactly d elements and coefficients must
    be scalar.  For a general (non-Rademacher) base the check additionally
    requires ||phi_k||_inf <= 1 for every member and an exactly vanishing
    d-multiplicative error; the comparison against the coefficient l2 norm
    (the Rademacher right side) is reported alongside in ``details``."""
    if p <= 2:
        raise ValueError("p must exceed 2")
    if not s.terms:
        raise ValueError("empty chaos sum")
    if s.dim != 1:
        raise ValueError("hypercontractivity check expects scalar coefficients")
    orders = {mask.bit_count() for mask, _ in s.terms}
    if len(orders) != 1:
        raise ValueError("mixed chaos orders; all masks must share one size")
    d = orders.pop()
    details: dict = {}
    if isinstance(s.base, BoundedSystem):
        if any(sup_norm(f) > 1 for f in s.base.members):
            raise ValueError("base members must satisfy ||phi||_inf <= 1")
        mu = mult_error(s.base, d)
        if mu != 0:
            raise ValueError(
                "base must be exactly d-multiplicative (mu_d = 0) for this bound"
            )
        details["mu_d"] = "0"

    f = chaos_eval(s)[0]
    lhs = p_norm(f, p)
    l2 = math.sqrt(float(second_moment(f)))
    factor = (p - 1.0) ** (d / 2.0)
    rhs = factor * l2
    coeff_l2 = math.sqrt(
        float(sum((c[0] * c[0] for _, c in s.terms), Fraction(0)))
    )
    details.update(
        {
            "l2": l2,
            "coeff_l2": coeff_l2,
            "rhs_coeff_side": factor * coeff_l2,
            "factor": factor,
        }
    )
    slack = rhs - lhs
    return ChaosBoundReport(
        p=float(p),
        d=d,
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        passed=slack >= -tol,
        tol=tol,
        details=details,
    )


def max_partial_sum(
    s: ChaosSum, order: Sequence[int], vector_norm: float = math.inf
) -> StepFn:
    """x -> max over prefixes of |sum_{k <= m} b_k phi_{A_k}(x)|, exact.

    ``order`` is a permutation of the masks of s.  Vector-valued sums are
    reduced with the 1- or inf-norm before the running maximum (both stay
    rational); the 2-norm would leave the rationals and is rejected.
    """
    masks = [mask for mask, _ in s.terms]
    if sorted(order) != sorted(masks):
        raise ValueError("order must be a permutation of the chaos masks")
    if s.dim > 1 and vector_norm not in (1, math.inf):
        raise ValueError("vector reduction must use the 1- or inf-norm to stay exact")
    coeff_by_mask = dict(s.terms)
    ordered_terms = [(mask, coeff_by_mask[mask]) for mask in order]

    if isinstance(s.base, int):
        levels = max(mask.bit_length() for mask in masks)
        cells = 1 << levels
        widths = [Fraction(1, cells)] * cells
        value_vectors = [
            tuple(
                Fraction(_walsh_sign(i, 1 << k, levels))
                for k in range(levels)
            )
            for i in range(cells)
        ]
        end = Fraction(1)
        bps = tuple(Fraction(i, cells) for i in range(cells + 1))
    else:
        part = refine_common(s.base.members)
        value_vectors = [
            tuple(col[j] for col in part.values) for j in range(part.n_cells)
        ]
        end = part.domain_end
        bps = part.breakpoints

    dim = s.dim
    out = []
    for vec in value_vectors:
        products = SubsetProducts(vec)
        running = [Fraction(0)] * dim
        best = Fraction(0)
        for mask, coeff in ordered_terms:
            p = products.product(mask)
            for c in range(dim):
                running[c] += coeff[c] * p
            if dim == 1:
                size = abs(running[0])
            elif vector_norm == 1:
                size = sum((abs(v) for v in running), Fraction(0))
            else:
                size = max(abs(v) for v in running)
            if size > best:
                best = size
        out.append(best)
    return StepFn(end, bps, tuple(out))


@dataclass(frozen=True)
class WalshComparisonReport:
    """E[Phi(|S_phi|)] against (1 + mu_d) E[Phi(|S_w|)] for the same
    coefficients over a bounded base and over the Rademacher system, with
    the optional maximal-function variant."""

    mu: Fraction
    lhs: float
    rhs: float
    slack: float
    lhs_maximal: Optional[float]
    rhs_maximal: Optional[float]
    slack_maximal: Optional[float]
    passed: bool
    tol: float


def _expected_outer_abs(f: StepFn, outer: OuterConvex) -> Union[Fraction, float]:
    rows = [(hi - lo, outer(abs(v))) for lo, hi, v in f.pieces()]
    if all(isinstance(v, Fraction) for _, v in rows):
        total = Fraction(0)
        for w, v in rows:
            total += w * v
        return total / f.domain_end
    return math.fsum(float(w) * float(v) for w, v in rows) / float(f.domain_end)


def walsh_comparison_check(
    base: BoundedSystem,
    terms: Sequence[tuple[int, Sequence]],
    outer: OuterConvex,
    d: int,
    order: Optional[Sequence[int]] = None,
    tol: float = 1e-12,
) -> WalshComparisonReport:
    """Compare a chaos sum over ``base`` with the same-coefficient Walsh
    sum: E[Phi(|sum b_A phi_A|)] <= (1 + mu_d(base)) E[Phi(|sum b_A w_A|)],
    and the analogous bound for maximal partial sums when ``order`` is
    given.  Scalar coefficients only; members must satisfy
    ||phi_k||_inf <= 1 and masks must have order <= d."""
    if any(sup_norm(f) > 1 for f in base.members):
        raise ValueError("base members must satisfy ||phi||_inf <= 1")
    s_base = ChaosSum(base, tuple((m, tuple(c)) for m, c in terms), d)
    if s_base.dim != 1:
        raise ValueError("scalar coefficients expected")
    s_rad = ChaosSum(base.n, s_base.terms, d)
    mu = mult_error(base, d)
    factor = 1 + mu

    lhs = _expected_outer_abs(chaos_eval(s_base)[0], outer)
    rhs = _expected_outer_abs(chaos_eval(s_rad)[0], outer)
    slack = _scaled_slack(factor, rhs, lhs)
    ok = _ge_with_tol(slack, tol)

    lhs_max = rhs_max = slack_max = None
    if order is not None:
        fm_base = max_partial_sum(s_base, order)
        fm_rad = max_partial_sum(s_rad, order)
        lhs_max = _expected_outer_abs(fm_base, outer)
        rhs_max = _expected_outer_abs(fm_rad, outer)
        slack_max = _scaled_slack(factor, rhs_max, lhs_max)
        ok = ok and _ge_with_tol(slack_max, tol)

    return WalshComparisonReport(
        mu=mu,
        lhs=float(lhs),
        rhs=float(rhs),
        slack=float(slack),
        lhs_maximal=None if lhs_max is None else float(lhs_max),
        rhs_maximal=None if rhs_max is None else float(rhs_max),
        slack_maximal=None if slack_max is None else float(slack_max),
        passed=ok,
        tol=tol,
    )


def _scaled_slack(factor: Fraction, rhs, lhs):
    if isinstance(rhs, Fraction) and isinstance(lhs, Fraction):
        return factor * rhs - lhs
    return float(factor) * float(rhs) - float(lhs)


def _ge_with_tol(slack, tol: float) -> bool:
    if isinstance(slack, Fraction):
        return slack >= -Fraction(tol)
    return slack >= -tol
