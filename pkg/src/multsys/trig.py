"""Trigonometric polynomials, Orlicz norms, and Dirichlet kernels.

Frequencies decompose dyadically: cos 2*pi*n(x+a) with n = sum 2^{k_i}
splits into 2^{rho(n)-1} signed products of sines and cosines at the
frequencies 2^{k_i}, all sharing the phase a.  That decomposition links a
cosine sum to the Walsh sum with the same coefficients, which is what the
Orlicz-norm comparison checks here exercise.  Integrals of trigonometric
expressions use composite Gauss panels scaled to the highest frequency;
step-function integrands are always handled exactly elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .chaos import _walsh_sign, rho
from .stepfn import StepFn, sup_norm

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(20)


# -- trigonometric polynomials ---------------------------------------------


@dataclass(frozen=True)
class TrigTerm:
    freq: int
    phase: float
    coeff: float

    def __post_init__(self) -> None:
        if self.freq < 1:
            raise ValueError("frequencies must be positive integers")
        if not (math.isfinite(self.phase) and math.isfinite(self.coeff)):
            raise ValueError("phase and coefficient must be finite")
        object.__setattr__(self, "phase", float(self.phase))
        object.__setattr__(self, "coeff", float(self.coeff))


@dataclass(frozen=True)
class TrigPoly:
    """sum_n b_n cos(2 pi n (x + x_n)) with distinct integer frequencies."""

    terms: tuple[TrigTerm, ...]

    def __post_init__(self) -> None:
        terms = tuple(
            t if isinstance(t, TrigTerm) else TrigTerm(*t) for t in self.terms
        )
        freqs = [t.freq for t in terms]
        if len(set(freqs)) != len(freqs):
            raise ValueError("frequencies must be distinct")
        object.__setattr__(self, "terms", terms)

    @property
    def max_freq(self) -> int:
        return max((t.freq for t in self.terms), default=1)

    @property
    def sup_bound(self) -> float:
        return math.fsum(abs(t.coeff) for t in self.terms)

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        out = np.zeros_like(xs)
        for t in self.terms:
            out += t.coeff * np.cos(2.0 * np.pi * t.freq * (xs + t.phase))
        return out if out.shape else float(out)


# -- product decomposition --------------------------------------------------


@dataclass(frozen=True)
class TrigFactor:
    """sin or cos evaluated at 2*pi * 2^exponent * (x + phase)."""

    kind: str  # "sin" | "cos"
    exponent: int
    phase: float

    def __post_init__(self) -> None:
        if self.kind not in ("sin", "cos"):
            raise ValueError("factor kind must be 'sin' or 'cos'")
        if self.exponent < 0:
            raise ValueError("exponent must be nonnegative")

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        arg = 2.0 * np.pi * (1 << self.exponent) * (xs + self.phase)
        return np.sin(arg) if self.kind == "sin" else np.cos(arg)


@dataclass(frozen=True)
class ProductTerm:
    """coeff * product of factors; coefficients stay in {-1, +1} (times a
    dyadic factor where a caller scales them)."""

    coeff: Fraction
    factors: tuple[TrigFactor, ...]

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        out = np.full_like(xs, float(self.coeff))
        for f in self.factors:
            out *= f(xs)
        return out if out.shape else float(out)


def cos_product_decomposition(n: int, alpha: float) -> list[ProductTerm]:
    """Write cos 2*pi*n(x+alpha) as a signed sum of exactly 2^(rho(n)-1)
    products of sin/cos factors at the dyadic frequencies 2^{k_i} of n:
    the real part of prod_i exp(i theta_i) expanded over even-size sine
    subsets, every factor sharing the phase alpha."""
    if n < 1:
        raise ValueError("frequency must be >= 1")
    exponents = [k for k in range(n.bit_length()) if (n >> k) & 1]
    d = len(exponents)
    out = []
    for subset in range(1 << d):
        size = subset.bit_count()
        if size % 2:
            continue
        sign = Fraction(-1 if (size // 2) % 2 else 1)
        factors = tuple(
            TrigFactor(
                "sin" if (subset >> i) & 1 else "cos",
                exponents[i],
                alpha,
            )
            for i in range(d)
        )
        out.append(ProductTerm(sign, factors))
    assert len(out) == 1 << (d - 1)
    return out


# -- quadrature --------------------------------------------------------------


def _gauss_on_edges(f: Callable, edges: np.ndarray) -> float:
    mid = (edges[:-1] + edges[1:]) / 2.0
    half = (edges[1:] - edges[:-1]) / 2.0
    xs = (mid[:, None] + half[:, None] * _GAUSS_NODES[None, :]).ravel()
    vals = np.asarray(f(xs), dtype=float).reshape(-1, len(_GAUSS_NODES))
    return float(np.sum(vals @ _GAUSS_WEIGHTS * half))


def _panel_integral(f: Callable, panels: int) -> float:
    return _gauss_on_edges(f, np.linspace(0.0, 1.0, panels + 1))


def quadrature(
    f: Callable,
    tol: float,
    max_freq: int = 1,
    max_panels: int = 1 << 18,
) -> float:
    """Integrate a bounded vectorized integrand over [0, 1): composite
    20-point Gauss panels, at least 64 per unit of the highest frequency,
    doubled until two successive estimates agree within tol/2."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    panels = max(64, 64 * max(1, int(max_freq)))
    prev = _panel_integral(f, panels)
    while True:
        panels *= 2
        if panels > max_panels:
            raise RuntimeError(
                f"quadrature did not reach tol={tol} within {max_panels} panels"
            )
        cur = _panel_integral(f, panels)
        if abs(cur - prev) < tol / 2.0:
            return cur
        prev = cur


# -- Young functions and the Luxemburg norm ----------------------------------


@dataclass(frozen=True)
class PowerYoung:
    """t^p with p > 1."""

    p: float

    def __post_init__(self) -> None:
        if not self.p > 1:
            raise ValueError("power Young function needs p > 1")
        object.__setattr__(self, "p", float(self.p))

    def value(self, t: float) -> float:
        return t ** self.p

    def value_np(self, t: np.ndarray) -> np.ndarray:
        return t ** self.p

    def inverse_at_one(self) -> float:
        return 1.0


@dataclass(frozen=True)
class TLogYoung:
    """t * log(1 + t)."""

    def value(self, t: float) -> float:
        return t * math.log1p(t)

    def value_np(self, t: np.ndarray) -> np.ndarray:
        return t * np.log1p(t)

    def inverse_at_one(self) -> float:
        return _bisect_inverse(self.value, 1.0)


@dataclass(frozen=True)
class ExpYoung:
    """exp(t) - 1 - t."""

    def value(self, t: float) -> float:
        return math.expm1(t) - t

    def value_np(self, t: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.expm1(t) - t

    def inverse_at_one(self) -> float:
        return _bisect_inverse(self.value, 1.0)


@dataclass(frozen=True)
class ComboYoung:
    """Nonnegative combination sum w_i Phi_i with at least one positive
    weight."""

    parts: tuple[tuple[float, "YoungFn"], ...]

    def __post_init__(self) -> None:
        parts = tuple((float(w), p) for w, p in self.parts)
        if not parts or any(w < 0 for w, _ in parts) or all(w == 0 for w, _ in parts):
            raise ValueError("weights must be nonnegative with at least one positive")
        object.__setattr__(self, "parts", parts)

    def value(self, t: float) -> float:
        return math.fsum(w * p.value(t) for w, p in self.parts)

    def value_np(self, t: np.ndarray) -> np.ndarray:
        out = np.zeros_like(t)
        for w, p in self.parts:
            out += w * p.value_np(t)
        return out

    def inverse_at_one(self) -> float:
        return _bisect_inverse(self.value, 1.0)


YoungFn = Union[PowerYoung, TLogYoung, ExpYoung, ComboYoung]


def _bisect_inverse(fn: Callable[[float], float], target: float) -> float:
    """Solve fn(t) = target for an increasing fn with fn(0) = 0."""
    hi = 1.0
    while fn(hi) < target:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("Young inverse bracket not found")
    lo = 0.0
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if fn(mid) < target:
            lo = mid
        else:
            hi = mid
    return hi


class _SampledIntegrand:
    """|f| frozen on a fixed composite Gauss grid so every bisection step
    of the Luxemburg norm reuses the same samples."""

    def __init__(self, f: Callable, max_freq: int, tol: float, probe_scales: Sequence[float], phi: YoungFn):
        panels = max(64, 64 * max(1, int(max_freq)))
        self._build(f, panels)
        while panels < (1 << 18):
            coarse = [self._g(phi, s) for s in probe_scales]
            self._build(f, panels * 2)
            fine = [self._g(phi, s) for s in probe_scales]
            panels *= 2
            if all(
                abs(a - b) < tol / 4.0
                for a, b in zip(coarse, fine)
                if math.isfinite(a) and math.isfinite(b)
            ):
                break

    def _build(self, f: Callable, panels: int) -> None:
        edges = np.linspace(0.0, 1.0, panels + 1)
        mid = (edges[:-1] + edges[1:]) / 2.0
        half = (edges[1:] - edges[:-1]) / 2.0
        xs = (mid[:, None] + half[:, None] * _GAUSS_NODES[None, :]).ravel()
        self.samples = np.abs(np.asarray(f(xs), dtype=float))
        self.weights = (half[:, None] * _GAUSS_WEIGHTS[None, :]).ravel()

    def _g(self, phi: YoungFn, lam: float) -> float:
        with np.errstate(over="ignore", invalid="ignore"):
            vals = phi.value_np(self.samples / lam)
        return float(np.dot(np.nan_to_num(vals, nan=np.inf, posinf=np.inf), self.weights))


def luxemburg_norm(
    f: Union[StepFn, TrigPoly, Callable],
    phi: YoungFn,
    tol: float = 1e-9,
) -> float:
    """inf{lambda > 0 : integral of Phi(|f|/lambda) <= 1} by bisection.

    Step functions integrate exactly per cell (Phi evaluated in floating
    point); trigonometric integrands are sampled once on a grid fine enough
    for the target tolerance and reused across bisection steps.
    """
    value, _ = luxemburg_norm_traced(f, phi, tol)
    return value


def luxemburg_norm_traced(
    f: Union[StepFn, TrigPoly, Callable],
    phi: YoungFn,
    tol: float = 1e-9,
) -> tuple[float, list[tuple[float, float]]]:
    """As luxemburg_norm, also returning the bisection trace of
    (lambda, integral) pairs in evaluation order."""
    if isinstance(f, StepFn):
        sup = float(sup_norm(f))
        cells = [
            (float((hi - lo) / f.domain_end), float(abs(v)))
            for lo, hi, v in f.pieces()
        ]

        def g(lam: float) -> float:
            return math.fsum(w * phi.value(a / lam) for w, a in cells)

    else:
        sup = float(getattr(f, "sup_bound"))
        max_freq = int(getattr(f, "max_freq", 1))
        if sup == 0.0:
            return 0.0, []
        inv1 = phi.inverse_at_one()
        hi0 = sup / inv1 + 1.0
        sampled = _SampledIntegrand(
            f, max_freq, tol, probe_scales=[hi0 / 2.0, hi0 / 16.0], phi=phi
        )

        def g(lam: float) -> float:
            return sampled._g(phi, lam)

    if sup == 0.0:
        return 0.0, []
    inv1 = phi.inverse_at_one()
    hi = sup / inv1 + 1.0
    lo = 0.0
    trace: list[tuple[float, float]] = []
    for _ in range(60):
        if hi - lo <= tol * max(lo, tol):
            break
        mid = (lo + hi) / 2.0
        if mid <= 0.0:
            break
        val = g(mid)
        trace.append((mid, val))
        if val <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi, trace


# -- Dirichlet kernels --------------------------------------------------------


def _require_power_of_two(n_terms: int) -> int:
    if n_terms < 1 or n_terms & (n_terms - 1):
        raise ValueError("kernel length must be a power of two")
    return n_terms.bit_length() - 1


def dirichlet_T(n_terms: int) -> TrigPoly:
    """Trigonometric Dirichlet polynomial sum_{k=1}^{N} cos 2 pi k x,
    N a power of two."""
    _require_power_of_two(n_terms)
    return TrigPoly(tuple(TrigTerm(k, 0.0, 1.0) for k in range(1, n_terms + 1)))


def _parity(arr: np.ndarray) -> np.ndarray:
    v = arr.astype(np.int64)
    for shift in (32, 16, 8, 4, 2, 1):
        v = v ^ (v >> shift)
    return v & 1


def dirichlet_W(n_terms: int) -> StepFn:
    """Walsh Dirichlet polynomial sum_{k=1}^{N} w_k as an exact step
    function, N a power of two."""
    _require_power_of_two(n_terms)
    levels = n_terms.bit_length()  # w_N = r_{levels} needs 2^levels cells
    cells = 1 << levels
    idx = np.arange(cells, dtype=np.int64)
    totals = np.zeros(cells, dtype=np.int64)
    for k in range(1, n_terms + 1):
        rev = 0
        for bit in range(levels):
            if (k >> bit) & 1:
                rev |= 1 << (levels - 1 - bit)
        totals += 1 - 2 * _parity(idx & rev)
    bps = tuple(Fraction(i, cells) for i in range(cells + 1))
    return StepFn(Fraction(1), bps, tuple(Fraction(int(t)) for t in totals))


def dirichlet_kernel_callable(n_terms: int) -> Callable:
    """Closed-form evaluator of the trigonometric Dirichlet polynomial:
    sin(pi N x) cos(pi (N+1) x) / sin(pi x), vectorized."""

    def kernel(x):
        xs = np.asarray(x, dtype=float)
        s = np.sin(np.pi * xs)
        num = np.sin(np.pi * n_terms * xs) * np.cos(np.pi * (n_terms + 1) * xs)
        safe = np.where(np.abs(s) < 1e-14, 1.0, s)
        return np.where(np.abs(s) < 1e-14, float(n_terms), num / safe)

    kernel.max_freq = n_terms
    kernel.sup_bound = float(n_terms)
    return kernel


def _dirichlet_l1(n_terms: int, tol: float) -> float:
    """L1 norm of the length-N trigonometric Dirichlet polynomial.  The
    closed form sin(pi N x) cos(pi (N+1) x) / sin(pi x) changes sign only
    at x = j/N and x = (2j+1)/(2(N+1)), so integrating Gauss panels
    between consecutive zeros keeps every panel smooth; uniform panels
    stall against the kinks of the absolute value."""
    kern = dirichlet_kernel_callable(n_terms)
    cuts = {0.0, 1.0}
    cuts.update(j / n_terms for j in range(1, n_terms))
    cuts.update((2 * j + 1) / (2.0 * (n_terms + 1)) for j in range(n_terms + 1))
    base = np.array(sorted(cuts))

    def estimate(per_lobe: int) -> float:
        if per_lobe == 1:
            edges = base
        else:
            grid = np.linspace(0.0, 1.0, per_lobe + 1)[:-1]
            widths = np.diff(base)
            inner = (base[:-1, None] + widths[:, None] * grid[None, :]).ravel()
            edges = np.append(inner, base[-1])
        return _gauss_on_edges(lambda x: np.abs(kern(x)), edges)

    prev = estimate(1)
    per_lobe = 2
    while per_lobe <= 64:
        cur = estimate(per_lobe)
        if abs(cur - prev) < tol / 2.0:
            return cur
        prev = cur
        per_lobe *= 2
    raise RuntimeError(f"Dirichlet L1 norm did not reach tol={tol}")


@dataclass(frozen=True)
class DirichletRow:
    n: int
    norm_t: float
    norm_w: float
    ratio: float


def dirichlet_table(max_n: int, tol: float = 1e-7) -> list[DirichletRow]:
    """L1 norms of the trigonometric and Walsh Dirichlet polynomials of
    length 2^n for n = 1..max_n, with their ratio.  The Walsh norm is
    computed exactly; the trigonometric norm by quadrature of the closed
    form."""
    rows = []
    for n in range(1, max_n + 1):
        length = 1 << n
        norm_t = _dirichlet_l1(length, tol)
        w = dirichlet_W(length)
        norm_w_exact = sum(
            (abs(v) * (hi - lo) for lo, hi, v in w.pieces()), Fraction(0)
        )
        norm_w = float(norm_w_exact)
        rows.append(DirichletRow(n, norm_t, norm_w, norm_t / norm_w))
    return rows


# -- inequality checks --------------------------------------------------------


def _walsh_mirror(poly: TrigPoly) -> StepFn:
    """The Walsh sum with the same coefficients: sum b_n w_n, exact."""
    if not poly.terms:
        return StepFn.constant(0)
    levels = max(t.freq.bit_length() for t in poly.terms)
    cells = 1 << levels
    masks = [(t.freq, Fraction(t.coeff)) for t in poly.terms]
    vals = []
    for i in range(cells):
        acc = Fraction(0)
        for mask, b in masks:
            acc += b * _walsh_sign(i, mask, levels)
        vals.append(acc)
    bps = tuple(Fraction(i, cells) for i in range(cells + 1))
    return StepFn(Fraction(1), bps, tuple(vals))


def _walsh_mirror_maximal(poly: TrigPoly) -> StepFn:
    """max over frequency-ordered prefixes of |sum b_n w_n|, exact."""
    terms = sorted(poly.terms, key=lambda t: t.freq)
    if not terms:
        return StepFn.constant(0)
    levels = max(t.freq.bit_length() for t in terms)
    cells = 1 << levels
    vals = []
    for i in range(cells):
        running = Fraction(0)
        best = Fraction(0)
        for t in terms:
            running += Fraction(t.coeff) * _walsh_sign(i, t.freq, levels)
            if abs(running) > best:
                best = abs(running)
        vals.append(best)
    bps = tuple(Fraction(i, cells) for i in range(cells + 1))
    return StepFn(Fraction(1), bps, tuple(vals))


class _MaximalTrig:
    """x -> max over frequency-ordered prefixes of |partial cosine sums|."""

    def __init__(self, poly: TrigPoly):
        self.terms = sorted(poly.terms, key=lambda t: t.freq)
        self.max_freq = poly.max_freq
        self.sup_bound = poly.sup_bound

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        running = np.zeros_like(xs)
        best = np.zeros_like(xs)
        for t in self.terms:
            running = running + t.coeff * np.cos(2.0 * np.pi * t.freq * (xs + t.phase))
            np.maximum(best, np.abs(running), out=best)
        return best


@dataclass(frozen=True)
class OrliczComparisonReport:
    """Luxemburg norms of a cosine sum against 2^{d-1} times the norms of
    its Walsh mirror, in the plain and maximal-function variants."""

    d: int
    factor: float
    lhs: float
    rhs: float
    slack: float
    lhs_maximal: Optional[float]
    rhs_maximal: Optional[float]
    slack_maximal: Optional[float]
    passed: bool
    tol: float


def cos_walsh_orlicz_check(
    poly: TrigPoly,
    phi: YoungFn,
    d: int,
    tol: float = 1e-6,
    maximal: bool = False,
) -> OrliczComparisonReport:
    """Check ||sum b_n cos 2 pi n(x + x_n)||_Phi <= 2^{d-1} ||sum b_n w_n||_Phi
    for polynomials whose frequencies all have rho(n) <= d; optionally the
    same bound for maximal partial sums in increasing frequency order."""
    if d < 1:
        raise ValueError("d must be >= 1")
    for t in poly.terms:
        if rho(t.freq) > d:
            raise ValueError(f"frequency {t.freq} has rho > {d}")
    factor = float(2 ** (d - 1))
    lhs = luxemburg_norm(poly, phi, tol) if poly.terms else 0.0
    rhs = luxemburg_norm(_walsh_mirror(poly), phi, tol)
    slack = factor * rhs - lhs
    ok = slack >= -tol

    lhs_max = rhs_max = slack_max = None
    if maximal:
        lhs_max = (
            luxemburg_norm(_MaximalTrig(poly), phi, tol) if poly.terms else 0.0
        )
        rhs_max = luxemburg_norm(_walsh_mirror_maximal(poly), phi, tol)
        slack_max = factor * rhs_max - lhs_max
        ok = ok and slack_max >= -tol

    return OrliczComparisonReport(
        d=d,
        factor=factor,
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        lhs_maximal=lhs_max,
        rhs_maximal=rhs_max,
        slack_maximal=slack_max,
        passed=ok,
        tol=tol,
    )


@dataclass(frozen=True)
class PowerNormReport:
    """||P||_p against 2^{d-1} (p-1)^{d/2} ||P||_2 for pure-order cosine
    sums."""

    d: int
    p: float
    lhs: float
    l2: float
    rhs: float
    slack: float
    passed: bool
    tol: float


def cos_power_norm_check(
    poly: TrigPoly, p: float, d: int, tol: float = 1e-6
) -> PowerNormReport:
    """Check ||P||_p <= 2^{d-1} (p-1)^{d/2} ||P||_2 where every frequency
    of P has rho(n) = d exactly and p > 2.  The 2-norm comes from
    orthogonality (half the coefficient square sum); the p-norm from
    quadrature."""
    if p <= 2:
        raise ValueError("p must exceed 2")
    if d < 1:
        raise ValueError("d must be >= 1")
    for t in poly.terms:
        if rho(t.freq) != d:
            raise ValueError(f"frequency {t.freq} has rho != {d}")
    l2 = math.sqrt(0.5 * math.fsum(t.coeff ** 2 for t in poly.terms))
    if l2 == 0.0:
        return PowerNormReport(d, float(p), 0.0, 0.0, 0.0, 0.0, True, tol)
    integral_p = quadrature(
        lambda x: np.abs(poly(x)) ** float(p), tol, max_freq=poly.max_freq
    )
    lhs = integral_p ** (1.0 / float(p))
    rhs = (2.0 ** (d - 1)) * (float(p) - 1.0) ** (d / 2.0) * l2
    slack = rhs - lhs
    return PowerNormReport(
        d=d,
        p=float(p),
        lhs=lhs,
        l2=l2,
        rhs=rhs,
        slack=slack,
        passed=slack >= -tol,
        tol=tol,
    )
