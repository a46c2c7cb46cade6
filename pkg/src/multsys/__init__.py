"""Exact arithmetic for multiplicative systems of bounded step functions.

The package models random variables as step functions on [0, 1) with
rational breakpoints and values, so moments, multiplicative errors,
moment-killing extensions, extremal two-valued couplings, and convex
domination checks all evaluate exactly; floating point enters only through
transcendental outer functions, Orlicz-norm bisection, and trigonometric
quadrature.
"""

from .stepfn import (
    StepFn,
    as_rational,
    add,
    decompose,
    make_step,
    multiply,
    p_norm,
    refine_common,
    rescale_domain,
    restrict,
    scale,
    sup_norm,
    tail_measure,
    value_at,
)
from .systems import (
    Bounds,
    BoundedSystem,
    LawAtom,
    MomentTable,
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
from .extremal import (
    ComboOuter,
    ConvexSpec,
    ConvexDominationReport,
    ExpOuter,
    ExtremalizationTrace,
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
from .chaos import (
    ChaosBoundReport,
    ChaosSum,
    WalshComparisonReport,
    bonami_kiener_check,
    chaos_eval,
    max_partial_sum,
    product_member,
    rademacher,
    rademacher_system,
    rho,
    walsh,
    walsh_comparison_check,
    walsh_decompose,
)
from .trig import (
    ComboYoung,
    DirichletRow,
    ExpYoung,
    OrliczComparisonReport,
    PowerNormReport,
    PowerYoung,
    TLogYoung,
    TrigPoly,
    TrigTerm,
    cos_power_norm_check,
    cos_product_decomposition,
    cos_walsh_orlicz_check,
    dirichlet_T,
    dirichlet_W,
    dirichlet_table,
    luxemburg_norm,
    quadrature,
)
from .harness import (
    GeneratorConfig,
    SuiteResult,
    VerificationReport,
    azuma_check,
    extension_check,
    generate,
    generate_lacunary_trig,
    pipeline_check,
    run_suite,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
