"""Extremal two-valued couplings and separately-convex test functions.

``extremalize`` replaces every member of a bounded system by a function
taking only the two boundary values, splitting each constancy interval at
one exact rational point, so that every mixed moment of every subset is
preserved exactly and every separately-convex expectation weakly increases.

Test functions are built as outer(max_j ||P_j(t)||_p) from multilinear
quasi-polynomials P_j.  Every outer function in the family is convex and
nondecreasing on [0, infinity), which is what makes the composite convex in
each coordinate separately; that is the only property the comparison
theorems use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .stepfn import RationalLike, StepFn, as_rational, refine_common
from .systems import (
    BoundedSystem,
    LawAtom,
    SubsetFamily,
    SubsetProducts,
    canonical_independent_law,
    cell_groups,
    extend_to_multiplicative,
    mult_error,
)

Number = Union[Fraction, float]


# -- outer convex functions ----------------------------------------------


@dataclass(frozen=True)
class PowerOuter:
    """t -> t^q on [0, inf), q >= 1.  Exact on rationals when q is an
    integer."""

    exponent: Fraction

    def __post_init__(self) -> None:
        q = as_rational(self.exponent)
        if q < 1:
            raise ValueError("power outer needs exponent >= 1")
        object.__setattr__(self, "exponent", q)

    def __call__(self, x: Number) -> Number:
        q = self.exponent
        if isinstance(x, Fraction) and q.denominator == 1:
            return x ** int(q)
        return float(x) ** float(q)


@dataclass(frozen=True)
class ExpOuter:
    """t -> exp(c t) with c >= 0.  (c < 0 would break monotonicity and with
    it separate convexity of the composite.)"""

    rate: Fraction

    def __post_init__(self) -> None:
        c = as_rational(self.rate)
        if c < 0:
            raise ValueError("exp outer needs a nonnegative rate")
        object.__setattr__(self, "rate", c)

    def __call__(self, x: Number) -> float:
        return math.exp(float(self.rate) * float(x))


@dataclass(frozen=True)
class HingeOuter:
    """t -> max(t - a, 0); exact on rationals."""

    shift: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "shift", as_rational(self.shift))

    def __call__(self, x: Number) -> Number:
        if isinstance(x, Fraction):
            d = x - self.shift
            return d if d > 0 else Fraction(0)
        d = float(x) - float(self.shift)
        return d if d > 0 else 0.0


@dataclass(frozen=True)
class ComboOuter:
    """Nonnegative affine combination c0 + sum w_i * outer_i, w_i >= 0."""

    parts: tuple[tuple[Fraction, "OuterConvex"], ...]
    constant: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        parts = tuple((as_rational(w), o) for w, o in self.parts)
        const = as_rational(self.constant)
        if const < 0 or any(w < 0 for w, _ in parts):
            raise ValueError("combination weights must be nonnegative")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "constant", const)

    def __call__(self, x: Number) -> Number:
        acc: Number = self.constant
        for w, outer in self.parts:
            term = outer(x)
            if isinstance(acc, Fraction) and isinstance(term, Fraction):
                acc = acc + w * term
            else:
                acc = float(acc) + float(w) * float(term)
        return acc


OuterConvex = Union[PowerOuter, ExpOuter, HingeOuter, ComboOuter]


# -- quasi-polynomials and convex specs ----------------------------------


@dataclass(frozen=True)
class QuasiPolynomial:
    """Multilinear map P(t) = sum_A x_A prod_{k in A} t_k with vector
    coefficients x_A; ``terms`` pairs a nonempty subset mask with a
    coefficient vector of length out_dim."""

    n: int
    out_dim: int
    terms: tuple[tuple[int, tuple[Fraction, ...]], ...]

    def __post_init__(self) -> None:
        if self.n < 1 or self.out_dim < 1:
            raise ValueError("need n >= 1 and out_dim >= 1")
        full = (1 << self.n) - 1
        seen = set()
        coerced = []
        for mask, coeff in self.terms:
            if mask == 0 or mask & ~full:
                raise ValueError(f"bad subset mask {mask}")
            if mask in seen:
                raise ValueError(f"duplicate subset mask {mask}")
            seen.add(mask)
            vec = tuple(as_rational(c) for c in coeff)
            if len(vec) != self.out_dim:
                raise ValueError("coefficient vectors must share out_dim")
            coerced.append((mask, vec))
        object.__setattr__(self, "terms", tuple(coerced))

    def eval_with(self, products: SubsetProducts) -> tuple[Fraction, ...]:
        out = [Fraction(0)] * self.out_dim
        for mask, coeff in self.terms:
            p = products.product(mask)
            for i, c in enumerate(coeff):
                out[i] += c * p
        return tuple(out)


def _vector_norm(vec: Sequence[Fraction], p: Union[Fraction, float]) -> Number:
    if len(vec) == 1:
        return abs(vec[0])
    if p == math.inf:
        return max(abs(v) for v in vec)
    if p == 1:
        return sum((abs(v) for v in vec), Fraction(0))
    if p == 2:
        return math.sqrt(float(sum((v * v for v in vec), Fraction(0))))
    pf = float(p)
    return math.fsum(float(abs(v)) ** pf for v in vec) ** (1.0 / pf)


@dataclass(frozen=True)
class ConvexSpec:
    """G(t) = outer(max_j ||P_j(t)||_p): convex in each coordinate
    separately, nonnegative, and exactly evaluable whenever the norm and
    the outer function stay rational."""

    polys: tuple[QuasiPolynomial, ...]
    norm: Union[Fraction, float]
    outer: OuterConvex

    def __post_init__(self) -> None:
        if not self.polys:
            raise ValueError("need at least one quasi-polynomial")
        n = self.polys[0].n
        if any(p.n != n for p in self.polys):
            raise ValueError("quasi-polynomials must share n")
        norm = self.norm
        if norm != math.inf:
            norm = as_rational(norm)
            if norm < 1:
                raise ValueError("norm index must be >= 1 (or inf)")
        object.__setattr__(self, "norm", norm)

    @property
    def n(self) -> int:
        return self.polys[0].n


def eval_convex(g: ConvexSpec, t: Sequence[RationalLike]) -> Number:
    """Evaluate G at a rational point; exact when all ingredients allow."""
    point = tuple(as_rational(x) for x in t)
    if len(point) != g.n:
        raise ValueError(f"expected {g.n} coordinates, got {len(point)}")
    return _eval_convex_products(g, SubsetProducts(point))


def _eval_convex_products(g: ConvexSpec, products: SubsetProducts) -> Number:
    inner: Number = Fraction(0)
    for poly in g.polys:
        v = _vector_norm(poly.eval_with(products), g.norm)
        if isinstance(inner, Fraction) and isinstance(v, Fraction):
            inner = max(inner, v)
        else:
            inner = max(float(inner), float(v))
    return g.outer(inner)


def _accumulate(weighted: list[tuple[Fraction, Number]], measure: Fraction) -> Number:
    if all(isinstance(v, Fraction) for _, v in weighted):
        total = Fraction(0)
        for w, v in weighted:
            total += w * v
        return total / measure
    return math.fsum(float(w) * float(v) for w, v in weighted) / float(measure)


def expected_convex(sys: BoundedSystem, g: ConvexSpec) -> Number:
    """E[G(phi_1, ..., phi_n)], exact in the cell partition; floating only
    where the outer function or the norm demands it."""
    return expected_convex_many(sys, [g])[0]


def expected_convex_many(sys: BoundedSystem, specs: Sequence[ConvexSpec]) -> list[Number]:
    """Evaluate several G's against one system, sharing the cell partition
    and the per-cell subset products across specs."""
    for g in specs:
        if g.n != sys.n:
            raise ValueError("spec arity does not match the system")
    groups = cell_groups(sys)
    per_spec: list[list[tuple[Fraction, Number]]] = [[] for _ in specs]
    for w, vals in groups:
        products = SubsetProducts(vals)
        for i, g in enumerate(specs):
            per_spec[i].append((w, _eval_convex_products(g, products)))
    return [_accumulate(rows, sys.domain_end) for rows in per_spec]


def expected_convex_law(atoms: Sequence[LawAtom], g: ConvexSpec) -> Number:
    """E[G] under a finite atomic law."""
    return expected_convex_law_many(atoms, [g])[0]


def expected_convex_law_many(
    atoms: Sequence[LawAtom], specs: Sequence[ConvexSpec]
) -> list[Number]:
    """Evaluate several G's under one finite atomic law, sharing the
    per-atom subset products across specs."""
    per_spec: list[list[tuple[Fraction, Number]]] = [[] for _ in specs]
    for atom in atoms:
        products = SubsetProducts(tuple(atom.values))
        for i, g in enumerate(specs):
            per_spec[i].append((atom.prob, _eval_convex_products(g, products)))
    return [_accumulate(rows, Fraction(1)) for rows in per_spec]


# -- extremalization ------------------------------------------------------


@dataclass(frozen=True)
class StageRecord:
    """Audit record of one member's pass: how many constancy intervals it
    saw and the exact split point chosen in each."""

    member: int  # 1-based
    cells_before: int
    c_points: tuple[Fraction, ...]


@dataclass(frozen=True)
class ExtremalizationTrace:
    stages: tuple[StageRecord, ...]
    result: BoundedSystem


def extremalize(sys: BoundedSystem) -> tuple[BoundedSystem, ExtremalizationTrace]:
    """Replace each member by a {lower, upper}-valued function, splitting
    every constancy interval [alpha, beta) at

        c = (upper*alpha - lower*beta)/(upper - lower)
            + (upper - lower)^{-1} * integral_alpha^beta f,

    i.e. at relative width (v - lower)/(upper - lower) for the interval's
    value v: the unique point that preserves the interval's mean while
    moving the value to the boundary.  Preserves every mixed subset moment
    exactly and never decreases any separately-convex expectation.  Members
    are processed first to last; a split landing on an interval endpoint
    drops the empty part, so two-valued inputs pass through unchanged.
    """
    part = refine_common(sys.members)
    n = sys.n
    widths = part.widths()
    cells: list[tuple[Fraction, list[Fraction]]] = [
        (widths[j], [col[j] for col in part.values]) for j in range(part.n_cells)
    ]

    stages = []
    for k in range(n):
        lo = sys.bounds[k].lower
        up = sys.bounds[k].upper
        inv_width = 1 / (up - lo)
        ratio_memo: dict[Fraction, Fraction] = {}
        new_cells: list[tuple[Fraction, list[Fraction]]] = []
        c_points = []
        position = Fraction(0)
        for w, vals in cells:
            v = vals[k]
            if v == up or v == lo:
                # already at a boundary: degenerate split at an endpoint
                c_points.append(position + (w if v == up else Fraction(0)))
                new_cells.append((w, vals))
                position += w
                continue
            ratio = ratio_memo.get(v)
            if ratio is None:
                ratio = (v - lo) * inv_width
                ratio_memo[v] = ratio
            w1 = w * ratio
            c_points.append(position + w1)
            hi_vals = vals.copy()
            hi_vals[k] = up
            lo_vals = vals.copy()
            lo_vals[k] = lo
            new_cells.append((w1, hi_vals))
            new_cells.append((w - w1, lo_vals))
            position += w
        stages.append(StageRecord(k + 1, len(cells), tuple(c_points)))
        cells = new_cells

    breakpoints = [Fraction(0)]
    pos = Fraction(0)
    for w, _ in cells:
        pos += w
        breakpoints.append(pos)
    breakpoints[-1] = sys.domain_end  # exact by construction
    members = tuple(
        StepFn(sys.domain_end, tuple(breakpoints), tuple(vals[k] for _, vals in cells))
        for k in range(n)
    )
    out = BoundedSystem(members, sys.bounds)
    return out, ExtremalizationTrace(tuple(stages), out)


def extremal_pipeline(sys: BoundedSystem, d: int) -> BoundedSystem:
    """Extend to kill all moments of order <= d, compress the extended
    domain back to [0, 1), then extremalize: the output is two-valued,
    d-multiplicative, and d-independent."""
    if not 1 <= d <= sys.n:
        raise ValueError(f"d must lie in 1..{sys.n}")
    extended = extend_to_multiplicative(sys, SubsetFamily.up_to(sys.n, d))
    if extended.domain_end != 1:
        from .stepfn import rescale_domain

        members = tuple(rescale_domain(f, Fraction(1)) for f in extended.members)
        extended = BoundedSystem(members, sys.bounds)
    out, _ = extremalize(extended)
    return out


# -- the domination report ------------------------------------------------


@dataclass(frozen=True)
class ConvexDominationReport:
    """Both sides of E[G(phi)] <= (1 + mu_d) E[G(xi)].

    The product-law comparison takes xi from the unique independent
    mean-zero two-valued law; it is the asserted inequality when d = n.
    For d < n a d-independent comparison sequence is not unique, so the
    report also carries the pipeline comparison, where xi is the
    d-multiplicative two-valued system built by extension + extremalization
    (always valid); the product-law side is then informational and may be
    negative.  ``passed`` requires the product-law check, plus the pipeline
    check when d < n.
    """

    n: int
    d: int
    tol: float
    lhs: Number
    mu: Fraction
    rhs_product_law: Number
    slack_product_law: Number
    product_law_ok: bool
    rhs_pipeline: Optional[Number]
    slack_pipeline: Optional[Number]
    pipeline_ok: Optional[bool]
    passed: bool


def _slack_ok(slack: Number, tol: float) -> bool:
    if isinstance(slack, Fraction):
        return slack >= -Fraction(tol)
    return slack >= -tol


def verify_convex_domination(
    sys: BoundedSystem, g: ConvexSpec, d: int, tol: float = 1e-12
) -> ConvexDominationReport:
    """Check E[G(phi)] <= (1 + mu_d) E[G(xi)] against the canonical product
    law, and additionally against the pipeline coupling when d < n."""
    return verify_convex_domination_many(sys, [g], d, tol)[0]


def verify_convex_domination_many(
    sys: BoundedSystem, specs: Sequence[ConvexSpec], d: int, tol: float = 1e-12
) -> list[ConvexDominationReport]:
    """As verify_convex_domination, batched: mu, the canonical law, the
    pipeline system, and the per-cell subset products are all shared
    across the specs."""
    for g in specs:
        if g.n != sys.n:
            raise ValueError("spec arity does not match the system")
    if not 1 <= d <= sys.n:
        raise ValueError(f"d must lie in 1..{sys.n}")
    lhs_all = expected_convex_many(sys, specs)
    mu = mult_error(sys, d)
    law = canonical_independent_law(sys.bounds)
    rhs_law_all = expected_convex_law_many(law, specs)
    if d < sys.n:
        xi = extremal_pipeline(sys, d)
        rhs_pipe_all: Sequence[Optional[Number]] = expected_convex_many(xi, specs)
    else:
        rhs_pipe_all = [None] * len(specs)

    reports = []
    for lhs, rhs_law, rhs_pipe in zip(lhs_all, rhs_law_all, rhs_pipe_all):
        slack_law = _combine_slack(mu, rhs_law, lhs)
        law_ok = _slack_ok(slack_law, tol)
        slack_pipe = pipe_ok = None
        if rhs_pipe is not None:
            slack_pipe = _combine_slack(mu, rhs_pipe, lhs)
            pipe_ok = _slack_ok(slack_pipe, tol)
        passed = law_ok and (pipe_ok if pipe_ok is not None else True)
        reports.append(
            ConvexDominationReport(
                n=sys.n,
                d=d,
                tol=tol,
                lhs=lhs,
                mu=mu,
                rhs_product_law=rhs_law,
                slack_product_law=slack_law,
                product_law_ok=law_ok,
                rhs_pipeline=rhs_pipe,
                slack_pipeline=slack_pipe,
                pipeline_ok=pipe_ok,
                passed=passed,
            )
        )
    return reports


def _combine_slack(mu: Fraction, rhs: Number, lhs: Number) -> Number:
    if isinstance(rhs, Fraction) and isinstance(lhs, Fraction):
        return (1 + mu) * rhs - lhs
    return (1.0 + float(mu)) * float(rhs) - float(lhs)
