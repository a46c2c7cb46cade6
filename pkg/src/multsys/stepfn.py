"""Exact step functions on a half-open interval [0, L).

A step function is piecewise constant with rational breakpoints and rational
values, right-continuous (the value on [t_{i-1}, t_i) is v_i), and kept in a
canonical form with no two adjacent pieces carrying the same value.  All
arithmetic on breakpoints, values, and integrals is exact; floating point
enters only through fractional powers in ``p_norm``.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterator, Sequence, Union

RationalLike = Union[Fraction, int, str, float, Rational]


def as_rational(x: RationalLike) -> Fraction:
    """Coerce ints, 'p/q' strings, Rationals, and (exact binary) floats."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rational values")
    if isinstance(x, (int, str, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational number")


@dataclass(frozen=True)
class StepFn:
    """Canonical piecewise-constant function on [0, domain_end).

    ``breakpoints`` runs 0 = t_0 < t_1 < ... < t_m = domain_end and
    ``values`` holds v_1..v_m with v_i taken on [t_{i-1}, t_i).
    Construction coerces all inputs to ``Fraction``, validates monotonicity,
    and merges adjacent equal values, so equality of instances is equality
    of functions.
    """

    domain_end: Fraction
    breakpoints: tuple[Fraction, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        end = as_rational(self.domain_end)
        bps = tuple(as_rational(b) for b in self.breakpoints)
        vals = tuple(as_rational(v) for v in self.values)
        if end <= 0:
            raise ValueError("domain_end must be positive")
        if len(bps) < 2 or bps[0] != 0 or bps[-1] != end:
            raise ValueError("breakpoints must run from 0 to domain_end")
        for a, b in zip(bps, bps[1:]):
            if a >= b:
                raise ValueError("breakpoints must be strictly increasing")
        if len(vals) != len(bps) - 1:
            raise ValueError(
                f"{len(bps) - 1} intervals but {len(vals)} values"
            )
        # Canonicalize: merge adjacent intervals sharing a value.
        merged_b = [bps[0]]
        merged_v: list[Fraction] = []
        for i, v in enumerate(vals):
            if merged_v and merged_v[-1] == v:
                merged_b[-1] = bps[i + 1]
            else:
                merged_b.append(bps[i + 1])
                merged_v.append(v)
        object.__setattr__(self, "domain_end", end)
        object.__setattr__(self, "breakpoints", tuple(merged_b))
        object.__setattr__(self, "values", tuple(merged_v))

    # -- basic structure ------------------------------------------------

    @property
    def n_pieces(self) -> int:
        return len(self.values)

    def pieces(self) -> Iterator[tuple[Fraction, Fraction, Fraction]]:
        """Yield (lo, hi, value) for each piece."""
        for i, v in enumerate(self.values):
            yield self.breakpoints[i], self.breakpoints[i + 1], v

    def __call__(self, x: RationalLike) -> Fraction:
        return value_at(self, x)

    # -- operator sugar (delegates to the module-level operations) ------

    def __add__(self, other: "StepFn") -> "StepFn":
        return add(self, other)

    def __sub__(self, other: "StepFn") -> "StepFn":
        return add(self, scale(other, -1))

    def __mul__(self, other: "StepFn") -> "StepFn":
        return multiply(self, other)

    def __neg__(self) -> "StepFn":
        return scale(self, -1)

    @staticmethod
    def constant(value: RationalLike, domain_end: RationalLike = 1) -> "StepFn":
        end = as_rational(domain_end)
        return StepFn(end, (Fraction(0), end), (as_rational(value),))


def make_step(
    domain_end: RationalLike,
    breakpoints: Sequence[RationalLike],
    values: Sequence[RationalLike],
) -> StepFn:
    """Build a canonical StepFn; breakpoints must be bracketed by 0 and
    domain_end, with one value per interval."""
    return StepFn(as_rational(domain_end), tuple(breakpoints), tuple(values))


def value_at(f: StepFn, x: RationalLike) -> Fraction:
    """Right-continuous evaluation; x must lie in [0, domain_end)."""
    xr = as_rational(x)
    if not (0 <= xr < f.domain_end):
        raise ValueError(f"{xr} outside [0, {f.domain_end})")
    # rightmost breakpoint <= x indexes the containing piece
    i = bisect_right(f.breakpoints, xr) - 1
    return f.values[i]


def decompose(f: StepFn) -> tuple[Fraction, tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Inverse of make_step on canonical functions."""
    return f.domain_end, f.breakpoints, f.values


@dataclass(frozen=True)
class CommonPartition:
    """Joint constancy intervals of several step functions on one domain.

    ``values[i][j]`` is the value of function i on cell j; cells are the
    half-open intervals between consecutive ``breakpoints``.
    """

    domain_end: Fraction
    breakpoints: tuple[Fraction, ...]
    values: tuple[tuple[Fraction, ...], ...]

    @property
    def n_cells(self) -> int:
        return len(self.breakpoints) - 1

    def widths(self) -> tuple[Fraction, ...]:
        return tuple(
            b - a for a, b in zip(self.breakpoints, self.breakpoints[1:])
        )

    def iter_cells(self) -> Iterator[tuple[Fraction, tuple[Fraction, ...]]]:
        """Yield (width, per-function value vector) for each cell."""
        for j in range(self.n_cells):
            w = self.breakpoints[j + 1] - self.breakpoints[j]
            yield w, tuple(vals[j] for vals in self.values)


def refine_common(fs: Sequence[StepFn]) -> CommonPartition:
    """Coarsest partition on which every input is constant."""
    if not fs:
        raise ValueError("need at least one function")
    end = fs[0].domain_end
    for f in fs:
        if f.domain_end != end:
            raise ValueError("mismatched domains")
    merged = sorted(set().union(*(f.breakpoints for f in fs)))
    per_fn: list[tuple[Fraction, ...]] = []
    for f in fs:
        vals = []
        i = 0
        for lo in merged[:-1]:
            # advance to the piece of f containing [lo, next)
            while f.breakpoints[i + 1] <= lo:
                i += 1
            vals.append(f.values[i])
        per_fn.append(tuple(vals))
    return CommonPartition(end, tuple(merged), tuple(per_fn))


def _binary_on_refinement(f: StepFn, g: StepFn, op) -> StepFn:
    part = refine_common([f, g])
    vals = [op(a, b) for a, b in zip(part.values[0], part.values[1])]
    return StepFn(part.domain_end, part.breakpoints, tuple(vals))


def multiply(f: StepFn, g: StepFn) -> StepFn:
    """Exact pointwise product."""
    return _binary_on_refinement(f, g, lambda a, b: a * b)


def add(f: StepFn, g: StepFn) -> StepFn:
    """Exact pointwise sum."""
    return _binary_on_refinement(f, g, lambda a, b: a + b)


def scale(f: StepFn, c: RationalLike) -> StepFn:
    """Exact scalar multiple."""
    cr = as_rational(c)
    return StepFn(f.domain_end, f.breakpoints, tuple(cr * v for v in f.values))


def integral(f: StepFn) -> Fraction:
    """Exact integral over [0, domain_end); the expectation when the
    domain has measure one."""
    total = Fraction(0)
    for lo, hi, v in f.pieces():
        total += v * (hi - lo)
    return total


def sup_norm(f: StepFn) -> Fraction:
    """Exact essential supremum of |f|."""
    return max(abs(v) for v in f.values)


def p_norm(f: StepFn, p: float) -> float:
    """(E |f|^p)^(1/p) with the domain normalized to measure one.

    The piece decomposition is exact; powers and the final root are
    floating point.
    """
    pf = float(p)
    if pf < 1:
        raise ValueError("p must be at least 1")
    terms = [
        float(abs(v)) ** pf * float((hi - lo) / f.domain_end)
        for lo, hi, v in f.pieces()
    ]
    return math.fsum(terms) ** (1.0 / pf)


def tail_measure(f: StepFn, lam: RationalLike) -> Fraction:
    """Exact measure of the level set {x : f(x) > lam}."""
    lr = as_rational(lam)
    total = Fraction(0)
    for lo, hi, v in f.pieces():
        if v > lr:
            total += hi - lo
    return total


def restrict(f: StepFn, end: RationalLike) -> StepFn:
    """Restriction of f to [0, end) for 0 < end <= domain_end."""
    er = as_rational(end)
    if not (0 < er <= f.domain_end):
        raise ValueError("end must lie in (0, domain_end]")
    bps = [Fraction(0)]
    vals = []
    for lo, hi, v in f.pieces():
        if lo >= er:
            break
        bps.append(min(hi, er))
        vals.append(v)
    return StepFn(er, tuple(bps), tuple(vals))


def rescale_domain(f: StepFn, new_end: RationalLike) -> StepFn:
    """Affine change of variables x -> x * (domain_end / new_end): the
    function g(y) = f(y * domain_end / new_end) on [0, new_end).

    Preserves every normalized moment and every level-set proportion.
    """
    er = as_rational(new_end)
    if er <= 0:
        raise ValueError("new_end must be positive")
    ratio = er / f.domain_end
    return StepFn(er, tuple(b * ratio for b in f.breakpoints), f.values)
