"""Reproducible corpora and named verification suites.

Generators build systems, convex specifications, chaos sums, and lacunary
cosine polynomials from a seeded RNG; every suite derives child seeds
arithmetically from one root seed so a run is reproducible from a single
integer.  Each check becomes a VerificationReport carrying both sides of
the inequality it tested, the slack, and a digest of the inputs; wall time
is recorded alongside but never enters the digest.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .chaos import (
    ChaosSum,
    bonami_kiener_check,
    rademacher_system,
    rho,
)
from .extremal import (
    ComboOuter,
    ConvexSpec,
    HingeOuter,
    OuterConvex,
    PowerOuter,
    QuasiPolynomial,
    extremal_pipeline,
    verify_convex_domination_many,
)
from .serialize import digest, jsonable
from .stepfn import StepFn, add, tail_measure
from .systems import (
    Bounds,
    BoundedSystem,
    SubsetFamily,
    check_two_valued_independence,
    extend_to_multiplicative,
    is_d_multiplicative,
    moment_table,
    mult_error,
    mult_error_family,
)
from .trig import PowerYoung, TrigPoly, TrigTerm, cos_power_norm_check, cos_walsh_orlicz_check


# -- deterministic randomness -------------------------------------------------


def seeded_rng(*parts) -> random.Random:
    """An RNG seeded from a string key, stable across runs and processes."""
    return random.Random(":".join(str(p) for p in parts))


def child_seed(seed: int, index: int) -> int:
    return seed * 1_000_003 + index


def rand_rational(
    rng: random.Random, lo: Fraction, hi: Fraction, max_den: int
) -> Fraction:
    """A rational in [lo, hi] with denominator at most max_den."""
    q = rng.randint(1, max_den)
    lo_num = math.ceil(lo * q)
    hi_num = math.floor(hi * q)
    if lo_num > hi_num:
        q = max_den
        lo_num = math.ceil(lo * q)
        hi_num = math.floor(hi * q)
        if lo_num > hi_num:
            raise ValueError(f"no rational with denominator <= {max_den} in [{lo}, {hi}]")
    return Fraction(rng.randint(lo_num, hi_num), q)


# -- generators ----------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorConfig:
    """Parameters for the corpus generators; unused fields are ignored by
    kinds that do not need them."""

    kind: str
    n: int = 3
    seed: int = 0
    pieces: int = 8
    denominator: int = 64
    magnitude_low: Fraction = Fraction(1, 4)
    magnitude_high: Fraction = Fraction(1)
    perturbation: Fraction = Fraction(1, 10)
    terms: int = 5
    max_freq: int = 64
    rho_max: int = 2

    KINDS = ("rademacher", "haar-martingale", "perturbed-multiplicative", "random-step")


def _random_bounds(rng: random.Random, cfg: GeneratorConfig) -> Bounds:
    lo = rand_rational(rng, cfg.magnitude_low, cfg.magnitude_high, 8)
    up = rand_rational(rng, cfg.magnitude_low, cfg.magnitude_high, 8)
    return Bounds(-lo, up)


def _random_step_member(rng: random.Random, cfg: GeneratorConfig, b: Bounds) -> StepFn:
    pieces = rng.randint(1, cfg.pieces)
    cuts = sorted(rng.sample(range(1, cfg.denominator), pieces - 1)) if pieces > 1 else []
    bps = [Fraction(0)] + [Fraction(c, cfg.denominator) for c in cuts] + [Fraction(1)]
    vals = [rand_rational(rng, b.lower, b.upper, 64) for _ in range(pieces)]
    return StepFn(Fraction(1), tuple(bps), tuple(vals))


def _haar_martingale(rng: random.Random, cfg: GeneratorConfig) -> BoundedSystem:
    """Member k refines the dyadic atoms of level k-1 with a balanced +/- a
    split on each atom, so every conditional mean vanishes and every mixed
    moment over distinct members is exactly zero."""
    members = []
    bounds = []
    for k in range(1, cfg.n + 1):
        atoms = 1 << (k - 1)
        bps = tuple(Fraction(i, 2 * atoms) for i in range(2 * atoms + 1))
        vals: list[Fraction] = []
        top = Fraction(0)
        for _ in range(atoms):
            a = rand_rational(rng, cfg.magnitude_low, cfg.magnitude_high, 16)
            top = max(top, a)
            vals.extend((a, -a))
        members.append(StepFn(Fraction(1), bps, tuple(vals)))
        bounds.append(Bounds(-top, top))
    return BoundedSystem(tuple(members), tuple(bounds))


def _perturbed_multiplicative(cfg: GeneratorConfig) -> BoundedSystem:
    """phi_k = (1 - eps) r_k + eps on bands [-1, 1]: every member takes the
    two values {2 eps - 1, 1}, each first-order moment is exactly eps (so
    mu_1 = n eps with unit caps), and mixed moments over distinct members
    factor to eps^|A|."""
    eps = Fraction(cfg.perturbation)
    if not 0 < eps < Fraction(1, 2):
        raise ValueError("perturbation must lie in (0, 1/2)")
    members = []
    for k in range(1, cfg.n + 1):
        cells = 1 << k
        bps = tuple(Fraction(i, cells) for i in range(cells + 1))
        vals = tuple(
            Fraction(1) if i % 2 == 0 else 2 * eps - 1 for i in range(cells)
        )
        members.append(StepFn(Fraction(1), bps, vals))
    bounds = tuple(Bounds(Fraction(-1), Fraction(1)) for _ in range(cfg.n))
    return BoundedSystem(tuple(members), bounds)


def generate(cfg: GeneratorConfig) -> BoundedSystem:
    """Build a deterministic system of the requested kind."""
    rng = seeded_rng("multsys", cfg.kind, cfg.seed)
    if cfg.kind == "rademacher":
        return rademacher_system(cfg.n)
    if cfg.kind == "haar-martingale":
        return _haar_martingale(rng, cfg)
    if cfg.kind == "perturbed-multiplicative":
        return _perturbed_multiplicative(cfg)
    if cfg.kind == "random-step":
        bounds = tuple(_random_bounds(rng, cfg) for _ in range(cfg.n))
        members = tuple(_random_step_member(rng, cfg, b) for b in bounds)
        return BoundedSystem(members, bounds)
    raise ValueError(f"unknown generator kind {cfg.kind!r}")


def generate_lacunary_trig(cfg: GeneratorConfig) -> TrigPoly:
    """A cosine polynomial with distinct frequencies of bounded dyadic
    support (rho <= rho_max), random coefficients in [-2, 2] bounded away
    from zero, and random phases."""
    rng = seeded_rng("multsys", "lacunary-trig", cfg.seed)
    pool = [m for m in range(1, cfg.max_freq + 1) if rho(m) <= cfg.rho_max]
    count = min(cfg.terms, len(pool))
    freqs = sorted(rng.sample(pool, count))
    terms = []
    for f in freqs:
        mag = rng.uniform(0.25, 2.0)
        sign = rng.choice((-1.0, 1.0))
        terms.append(TrigTerm(f, rng.random(), sign * mag))
    return TrigPoly(tuple(terms))


def random_system(rng: random.Random, n_max: int = 6, pieces_max: int = 8) -> BoundedSystem:
    cfg = GeneratorConfig(
        kind="random-step",
        n=rng.randint(1, n_max),
        pieces=pieces_max,
        seed=rng.randrange(1 << 30),
    )
    return generate(cfg)


def random_convex_spec(rng: random.Random, n: int) -> ConvexSpec:
    """A random G that the exact evaluation path fully supports: one or two
    multilinear maps, scalar or 2-vector coefficients, a rational-exact
    norm, and a power / hinge / combination outer function."""
    polys = []
    for _ in range(rng.randint(1, 2)):
        dim = 1 if rng.random() < 0.75 else 2
        n_terms = rng.randint(1, 3)
        all_masks = list(range(1, 1 << n))
        masks = rng.sample(all_masks, min(n_terms, len(all_masks)))
        terms = tuple(
            (
                m,
                tuple(
                    rand_rational(rng, Fraction(-2), Fraction(2), 16)
                    for _ in range(dim)
                ),
            )
            for m in masks
        )
        polys.append(QuasiPolynomial(n, dim, terms))
    dims = {p.out_dim for p in polys}
    if dims == {1}:
        norm = rng.choice([Fraction(1), Fraction(2), math.inf])
    else:
        norm = rng.choice([Fraction(1), math.inf])
    outer = _random_outer(rng)
    return ConvexSpec(tuple(polys), norm, outer)


def _random_outer(rng: random.Random) -> OuterConvex:
    roll = rng.random()
    if roll < 0.5:
        return PowerOuter(Fraction(rng.choice([1, 2, 3, 4])))
    if roll < 0.8:
        return HingeOuter(rand_rational(rng, Fraction(0), Fraction(2), 4))
    return ComboOuter(
        (
            (rand_rational(rng, Fraction(1, 4), Fraction(2), 4), PowerOuter(Fraction(2))),
            (rand_rational(rng, Fraction(0), Fraction(1), 4), HingeOuter(Fraction(1, 2))),
        ),
        rand_rational(rng, Fraction(0), Fraction(1), 4),
    )


def random_chaos_sum(rng: random.Random, n_vars: int, d: int, n_terms: int) -> ChaosSum:
    """A pure order-d Rademacher chaos with scalar rational coefficients."""
    from itertools import combinations

    pool = [sum(1 << i for i in idxs) for idxs in combinations(range(n_vars), d)]
    masks = rng.sample(pool, min(n_terms, len(pool)))
    terms = tuple(
        (m, (rand_rational(rng, Fraction(-2), Fraction(2), 16),)) for m in masks
    )
    return ChaosSum(n_vars, terms, d)


# -- reports -------------------------------------------------------------------


@dataclass(frozen=True)
class VerificationReport:
    """One executed check: the two sides of its inequality, the slack
    (rhs - lhs, possibly scaled, >= -tol to pass), a digest of the inputs,
    and the wall time.  The digest never covers timing."""

    check: str
    digest: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    tol: float
    details: dict
    timing_s: float


@dataclass(frozen=True)
class SuiteResult:
    name: str
    seed: int
    n_checks: int
    n_passed: int
    passed: bool
    timing_s: float
    reports: tuple[VerificationReport, ...]


def _report(
    check: str,
    payload,
    lhs,
    rhs,
    slack,
    passed: bool,
    tol: float,
    details: dict,
    started: float,
) -> VerificationReport:
    return VerificationReport(
        check=check,
        digest=digest(payload),
        lhs=float(lhs),
        rhs=float(rhs),
        slack=float(slack),
        passed=bool(passed),
        tol=tol,
        details=jsonable(details),
        timing_s=time.perf_counter() - started,
    )


# -- individual checks -----------------------------------------------------


def azuma_check(
    sys: BoundedSystem, lam: Fraction, tol: float = 1e-12
) -> VerificationReport:
    """Tail of the member sum against the sub-Gaussian envelope:
    P(sum phi_k > lambda) <= (1 + mu_n) exp(-2 lambda^2 / sum (B_k - A_k)^2).
    The left side is an exact measure; only the exponential is floating."""
    started = time.perf_counter()
    lam = Fraction(lam)
    total = sys.members[0]
    for m in sys.members[1:]:
        total = add(total, m)
    lhs = tail_measure(total, lam) / sys.domain_end
    mu = mult_error(sys, sys.n)
    denom = sum((b.width ** 2 for b in sys.bounds), Fraction(0))
    rhs = (1 + float(mu)) * math.exp(float(-2 * lam * lam / denom))
    slack = rhs - float(lhs)
    return _report(
        check="azuma",
        payload={"system": sys, "lambda": lam},
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        passed=slack >= -tol,
        tol=tol,
        details={"n": sys.n, "lambda": lam, "mu": mu, "squared_width_sum": denom},
        started=started,
    )


def extension_check(
    sys: BoundedSystem, family: SubsetFamily, tol: float = 0.0
) -> VerificationReport:
    """Extend, then confirm: every family moment is exactly zero, the
    original values are untouched, the appended values respect the bounds,
    and the domain grew by exactly the prior multiplicative error."""
    started = time.perf_counter()
    ext = extend_to_multiplicative(sys, family)
    table = moment_table(ext, family)
    worst = max((abs(v) for v in table.entries.values()), default=Fraction(0))
    mu_before = mult_error_family(sys, family)
    grew_right = ext.domain_end == 1 + mu_before
    prefix_ok = all(
        _restrict_equal(e, o) for e, o in zip(ext.members, sys.members)
    )
    passed = worst == 0 and grew_right and prefix_ok
    return _report(
        check="extension",
        payload={"system": sys, "family": sorted(family.masks)},
        lhs=worst,
        rhs=0,
        slack=-worst,
        passed=passed,
        tol=tol,
        details={
            "n": sys.n,
            "masks": len(family.masks),
            "domain_end": ext.domain_end,
            "mu_family": mu_before,
            "prefix_intact": prefix_ok,
        },
        started=started,
    )


def _restrict_equal(extended: StepFn, original: StepFn) -> bool:
    from .stepfn import restrict

    return restrict(extended, original.domain_end) == original


def pipeline_check(sys: BoundedSystem, d: int) -> VerificationReport:
    """Run extension + extremalization at order d and confirm the output is
    two-valued, exactly d-multiplicative, and exactly d-independent."""
    started = time.perf_counter()
    xi = extremal_pipeline(sys, d)
    mult_ok = is_d_multiplicative(xi, d)
    indep_ok = check_two_valued_independence(xi, d)
    two_valued = all(len({v for v in m.values}) <= 2 for m in xi.members)
    mu_after = mult_error(xi, d)
    passed = mult_ok and indep_ok and two_valued
    return _report(
        check="pipeline",
        payload={"system": sys, "d": d},
        lhs=mu_after,
        rhs=0,
        slack=-mu_after,
        passed=passed,
        tol=0.0,
        details={
            "n": sys.n,
            "d": d,
            "multiplicative": mult_ok,
            "independent": indep_ok,
            "two_valued": two_valued,
        },
        started=started,
    )


# -- suites --------------------------------------------------------------------


def _scaled(count: int, scale: float) -> int:
    return max(1, math.ceil(count * scale))


def suite_extension(seed: int = 0, scale: float = 1.0) -> list[VerificationReport]:
    """Moment-killing extensions over a mixed corpus: random families on
    random systems must zero out exactly."""
    reports = []
    for i in range(_scaled(500, scale)):
        rng = seeded_rng("multsys", "suite-extension", child_seed(seed, i))
        sys = random_system(rng)
        roll = rng.random()
        if roll < 0.6:
            fam = SubsetFamily.up_to(sys.n, rng.randint(1, sys.n))
        elif roll < 0.8:
            fam = SubsetFamily.exactly(sys.n, rng.randint(1, sys.n))
        else:
            fam = SubsetFamily.full(sys.n)
        reports.append(extension_check(sys, fam))
    return reports


def suite_theorem1(seed: int = 0, scale: float = 1.0) -> list[VerificationReport]:
    """Convex domination over random systems and specs; d = n half the
    time, d < n otherwise (which adds the pipeline comparison)."""
    reports = []
    for i in range(_scaled(500, scale)):
        rng = seeded_rng("multsys", "suite-theorem1", child_seed(seed, i))
        sys = random_system(rng)
        d = sys.n if rng.random() < 0.5 or sys.n == 1 else rng.randint(1, sys.n - 1)
        specs = [random_convex_spec(rng, sys.n) for _ in range(20)]
        started = time.perf_counter()
        results = verify_convex_domination_many(sys, specs, d)
        slacks = [float(r.slack_product_law) for r in results]
        slacks += [
            float(r.slack_pipeline) for r in results if r.slack_pipeline is not None
        ]
        worst = min(slacks)
        passed = all(r.passed for r in results)
        reports.append(
            _report(
                check="theorem1",
                payload={"system": sys, "d": d, "specs": len(specs)},
                lhs=max(float(r.lhs) for r in results),
                rhs=max(float(r.rhs_product_law) for r in results),
                slack=worst,
                passed=passed,
                tol=results[0].tol,
                details={
                    "n": sys.n,
                    "d": d,
                    "specs": len(specs),
                    "mu": results[0].mu,
                    "pipeline_checked": d < sys.n,
                },
                started=started,
            )
        )
    return reports


def suite_extremal(seed: int = 0, scale: float = 1.0) -> list[VerificationReport]:
    """Extension + extremalization pipelines must land on two-valued,
    d-multiplicative, d-independent systems."""
    reports = []
    for i in range(_scaled(200, scale)):
        rng = seeded_rng("multsys", "suite-extremal", child_seed(seed, i))
        sys = random_system(rng)
        d = rng.randint(1, sys.n)
        reports.append(pipeline_check(sys, d))
    return reports


def suite_chaos(seed: int = 0, scale: float = 1.0) -> list[VerificationReport]:
    """Hypercontractive bounds for pure Rademacher chaos, plus comparison
    checks on pipeline-produced multiplicative bases."""
    reports = []
    for i in range(_scaled(500, scale)):
        rng = seeded_rng("multsys", "suite-chaos", child_seed(seed, i))
        d = rng.choice([2, 3])
        n_vars = rng.randint(d + 1, 10)
        s = random_chaos_sum(rng, n_vars, d, rng.randint(1, 6))
        p = rng.choice([3.0, 4.0, 6.0])
        started = time.perf_counter()
        rep = bonami_kiener_check(s, p)
        reports.append(
            _report(
                check="chaos",
                payload={"chaos": {"n": n_vars, "d": d, "terms": s.terms}, "p": p},
                lhs=rep.lhs,
                rhs=rep.rhs,
                slack=rep.slack,
                passed=rep.passed,
                tol=rep.tol,
                details={"n": n_vars, "d": d, "p": p, **rep.details},
                started=started,
            )
        )
    for i in range(_scaled(100, scale)):
        rng = seeded_rng("multsys", "suite-chaos-base", child_seed(seed, i))
        d = rng.choice([2, 3])
        n_vars = rng.randint(d, 5)
        base = extremal_pipeline(random_system_unit(rng, n_vars), d)
        s = random_chaos_base_sum(rng, base, d)
        p = rng.choice([3.0, 4.0, 6.0])
        started = time.perf_counter()
        rep = bonami_kiener_check(s, p)
        reports.append(
            _report(
                check="chaos-base",
                payload={"system": base, "terms": s.terms, "p": p},
                lhs=rep.lhs,
                rhs=rep.rhs,
                slack=rep.slack,
                passed=rep.passed,
                tol=rep.tol,
                details={"n": n_vars, "d": d, "p": p, **rep.details},
                started=started,
            )
        )
    return reports


def random_system_unit(rng: random.Random, n: int) -> BoundedSystem:
    """A random system with every |value| <= 1 (bound magnitudes in
    [1/4, 1]), suitable as a chaos base after the pipeline."""
    cfg = GeneratorConfig(kind="random-step", n=n, seed=rng.randrange(1 << 30))
    return generate(cfg)


def random_chaos_base_sum(rng: random.Random, base: BoundedSystem, d: int) -> ChaosSum:
    from itertools import combinations

    pool = [sum(1 << i for i in idxs) for idxs in combinations(range(base.n), d)]
    masks = rng.sample(pool, min(rng.randint(1, 4), len(pool)))
    terms = tuple(
        (m, (rand_rational(rng, Fraction(-2), Fraction(2), 16),)) for m in masks
    )
    return ChaosSum(base, terms, d)


def suite_trig(seed: int = 0, scale: float = 1.0) -> list[VerificationReport]:
    """Orlicz-norm comparisons of lacunary cosine polynomials against their
    Walsh mirrors, plus p-norm bounds for pure-order polynomials."""
    reports = []
    for i in range(_scaled(100, scale)):
        rng = seeded_rng("multsys", "suite-trig", child_seed(seed, i))
        cfg = GeneratorConfig(
            kind="lacunary-trig",
            seed=child_seed(seed, i),
            terms=rng.randint(2, 6),
            rho_max=2,
        )
        poly = generate_lacunary_trig(cfg)
        p = rng.choice([2.0, 4.0])
        phi = PowerYoung(p)
        maximal = rng.random() < 0.3
        started = time.perf_counter()
        rep = cos_walsh_orlicz_check(poly, phi, d=2, maximal=maximal)
        reports.append(
            _report(
                check="trig-orlicz",
                payload={"poly": poly, "p": p, "maximal": maximal},
                lhs=rep.lhs,
                rhs=rep.factor * rep.rhs,
                slack=rep.slack,
                passed=rep.passed,
                tol=rep.tol,
                details={
                    "terms": len(poly.terms),
                    "p": p,
                    "maximal": maximal,
                    "slack_maximal": rep.slack_maximal,
                },
                started=started,
            )
        )
    for i in range(_scaled(25, scale)):
        rng = seeded_rng("multsys", "suite-trig-power", child_seed(seed, i))
        d = 2
        pool = [m for m in range(1, 65) if rho(m) == d]
        freqs = rng.sample(pool, rng.randint(1, 5))
        poly = TrigPoly(
            tuple(
                TrigTerm(f, rng.random(), rng.uniform(-2.0, 2.0)) for f in sorted(freqs)
            )
        )
        p = rng.choice([4.0, 6.0])
        started = time.perf_counter()
        rep = cos_power_norm_check(poly, p, d)
        reports.append(
            _report(
                check="trig-power",
                payload={"poly": poly, "p": p, "d": d},
                lhs=rep.lhs,
                rhs=rep.rhs,
                slack=rep.slack,
                passed=rep.passed,
                tol=rep.tol,
                details={"terms": len(poly.terms), "p": p, "d": d, "l2": rep.l2},
                started=started,
            )
        )
    return reports


def suite_azuma(seed: int = 0, scale: float = 1.0) -> list[VerificationReport]:
    """Sub-Gaussian tail bounds at lambda = c sqrt(n) for c in
    {1/4, 1/2, 1, 2} over random systems."""
    reports = []
    for i in range(_scaled(200, scale)):
        rng = seeded_rng("multsys", "suite-azuma", child_seed(seed, i))
        sys = random_system(rng)
        c = rng.choice([Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(2)])
        lam = Fraction(float(c) * math.sqrt(sys.n)).limit_denominator(10 ** 6)
        reports.append(azuma_check(sys, lam))
    return reports


SUITES: dict[str, Callable[..., list[VerificationReport]]] = {
    "extension": suite_extension,
    "theorem1": suite_theorem1,
    "extremal": suite_extremal,
    "chaos": suite_chaos,
    "trig": suite_trig,
    "azuma": suite_azuma,
}


def run_suite(
    name: str, seed: int = 0, out: Optional[str] = None, scale: float = 1.0
) -> SuiteResult:
    """Run one named suite ("all" chains every suite) and fold its reports
    into a summary; the full per-check report list is written to ``out`` as
    JSON when a path is given."""
    started = time.perf_counter()
    if name == "all":
        reports: list[VerificationReport] = []
        for key in SUITES:
            reports.extend(SUITES[key](seed=seed, scale=scale))
    elif name in SUITES:
        reports = SUITES[name](seed=seed, scale=scale)
    else:
        raise ValueError(
            f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all']}"
        )
    n_passed = sum(1 for r in reports if r.passed)
    result = SuiteResult(
        name=name,
        seed=seed,
        n_checks=len(reports),
        n_passed=n_passed,
        passed=n_passed == len(reports),
        timing_s=time.perf_counter() - started,
        reports=tuple(reports),
    )
    if out is not None:
        import json

        with open(out, "w", encoding="utf-8") as fh:
            json.dump(jsonable(result), fh, indent=2)
    return result
