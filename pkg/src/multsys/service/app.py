"""FastAPI application wrapping the library.

Every endpoint takes and returns JSON with rationals as "p/q" strings.
Domain violations (bad bounds, mismatched arities, unknown kinds) surface
as HTTP 400 with a plain-text detail.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..chaos import (
    bonami_kiener_check,
    chaos_eval,
    max_partial_sum,
    walsh_comparison_check,
)
from ..extremal import extremal_pipeline, extremalize, verify_convex_domination
from ..harness import GeneratorConfig, azuma_check, generate, generate_lacunary_trig, run_suite
from ..serialize import (
    chaos_from_dict,
    convex_from_dict,
    jsonable,
    outer_from_dict,
    parse_rational,
    parse_young_text,
    rational_str,
    step_to_dict,
    system_from_dict,
    system_to_dict,
    trig_from_dict,
    young_from_dict,
)
from ..stepfn import p_norm, sup_norm
from ..systems import (
    extend_to_multiplicative,
    moment_table,
    mult_error,
    mult_error_family,
    parse_family,
)
from ..trig import cos_power_norm_check, cos_walsh_orlicz_check, dirichlet_table
from .models import (
    AzumaRequest,
    ChaosCheckRequest,
    ChaosCompareRequest,
    ChaosMaximalRequest,
    DirichletRequest,
    ErrorRequest,
    ExtendRequest,
    ExtremalizeRequest,
    GenerateRequest,
    HealthResponse,
    MomentsRequest,
    PipelineRequest,
    SuiteRequest,
    TrigOrliczRequest,
    TrigPowerRequest,
    VerifyRequest,
)


def create_app() -> FastAPI:
    app = FastAPI(title="multsys", version=__version__)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/systems/error")
    def systems_error(req: ErrorRequest) -> dict:
        sys = system_from_dict(req.system.to_payload())
        if req.family is not None:
            fam = parse_family(req.family, sys.n)
            mu = mult_error_family(sys, fam)
            scope = {"family": req.family, "masks": len(fam.masks)}
        else:
            d = req.d if req.d is not None else sys.n
            mu = mult_error(sys, d)
            scope = {"d": d}
        return {"mu": rational_str(mu), "mu_float": float(mu), "n": sys.n, **scope}

    @app.post("/systems/extend")
    def systems_extend(req: ExtendRequest) -> dict:
        sys = system_from_dict(req.system.to_payload())
        fam = parse_family(req.family, sys.n)
        ext = extend_to_multiplicative(sys, fam)
        return {
            "system": system_to_dict(ext),
            "domain_end": rational_str(ext.domain_end),
            "mu_family": rational_str(mult_error_family(sys, fam)),
        }

    @app.post("/systems/moments")
    def systems_moments(req: MomentsRequest) -> dict:
        sys = system_from_dict(req.system.to_payload())
        fam = parse_family(req.family, sys.n)
        table = moment_table(sys, fam)
        from ..systems import members_of

        return {
            "n": sys.n,
            "moments": [
                {"members": list(members_of(mask)), "value": rational_str(v)}
                for mask, v in sorted(table.entries.items())
            ],
        }

    @app.post("/extremal/extremalize")
    def extremal_run(req: ExtremalizeRequest) -> dict:
        sys = system_from_dict(req.system.to_payload())
        xi, trace = extremalize(sys)
        return {
            "system": system_to_dict(xi),
            "stages": [
                {
                    "member": st.member,
                    "cells_before": st.cells_before,
                    "c_points": [rational_str(c) for c in st.c_points],
                }
                for st in trace.stages
            ],
        }

    @app.post("/extremal/pipeline")
    def extremal_pipe(req: PipelineRequest) -> dict:
        sys = system_from_dict(req.system.to_payload())
        xi = extremal_pipeline(sys, req.d)
        return {"system": system_to_dict(xi), "d": req.d}

    @app.post("/verify/theorem1")
    def verify_theorem1(req: VerifyRequest) -> dict:
        sys = system_from_dict(req.system.to_payload())
        spec = convex_from_dict(req.spec, n=sys.n)
        report = verify_convex_domination(sys, spec, req.d, req.tol)
        return jsonable(report)

    @app.post("/chaos/check")
    def chaos_check(req: ChaosCheckRequest) -> dict:
        s = chaos_from_dict(req.chaos.to_payload())
        report = bonami_kiener_check(s, req.p, req.tol)
        return jsonable(report)

    @app.post("/chaos/maximal")
    def chaos_maximal(req: ChaosMaximalRequest) -> dict:
        s = chaos_from_dict(req.chaos.to_payload())
        masks = [mask for mask, _ in s.terms]
        if req.order is None:
            order = masks
        else:
            if sorted(req.order) != list(range(1, len(masks) + 1)):
                raise ValueError(
                    "order must be a permutation of the 1-based term positions"
                )
            order = [masks[i - 1] for i in req.order]
        import math

        norm = math.inf if req.vector_norm in ("inf", "oo") else parse_rational(req.vector_norm)
        maximal = max_partial_sum(s, order, vector_norm=norm)
        plain = chaos_eval(s)
        return {
            "maximal": step_to_dict(maximal),
            "sup": rational_str(sup_norm(maximal)),
            "l2": p_norm(maximal, 2),
            "plain_l2": [p_norm(f, 2) for f in plain],
        }

    @app.post("/chaos/compare")
    def chaos_compare(req: ChaosCompareRequest) -> dict:
        base = system_from_dict(req.system.to_payload())
        terms = [
            (sum(1 << (k - 1) for k in t.mask), tuple(parse_rational(c) for c in t.coeff))
            for t in req.terms
        ]
        outer = outer_from_dict(req.outer)
        order = None
        if req.order is not None:
            masks = [m for m, _ in terms]
            if sorted(req.order) != list(range(1, len(masks) + 1)):
                raise ValueError(
                    "order must be a permutation of the 1-based term positions"
                )
            order = [masks[i - 1] for i in req.order]
        report = walsh_comparison_check(base, terms, outer, req.d, order=order, tol=req.tol)
        return jsonable(report)

    @app.post("/trig/x19")
    def trig_x19(req: TrigOrliczRequest) -> dict:
        poly = trig_from_dict(req.poly.model_dump())
        young = (
            parse_young_text(req.young)
            if isinstance(req.young, str)
            else young_from_dict(req.young)
        )
        report = cos_walsh_orlicz_check(poly, young, req.d, req.tol, req.maximal)
        return jsonable(report)

    @app.post("/trig/x21")
    def trig_x21(req: TrigPowerRequest) -> dict:
        poly = trig_from_dict(req.poly.model_dump())
        report = cos_power_norm_check(poly, req.p, req.d, req.tol)
        return jsonable(report)

    @app.post("/trig/dirichlet")
    def trig_dirichlet(req: DirichletRequest) -> dict:
        if not 1 <= req.max_n <= 12:
            raise ValueError("max_n must lie in 1..12")
        rows = dirichlet_table(req.max_n, req.tol)
        return {"rows": jsonable(rows)}

    @app.post("/generate")
    def generate_endpoint(req: GenerateRequest) -> dict:
        cfg = GeneratorConfig(
            kind=req.kind,
            n=req.n,
            seed=req.seed,
            pieces=req.pieces,
            denominator=req.denominator,
            magnitude_low=parse_rational(req.magnitude_low),
            magnitude_high=parse_rational(req.magnitude_high),
            perturbation=parse_rational(req.perturbation),
            terms=req.terms,
            max_freq=req.max_freq,
            rho_max=req.rho_max,
        )
        if req.kind == "lacunary-trig":
            poly = generate_lacunary_trig(cfg)
            return {"poly": jsonable({"terms": [
                {"freq": t.freq, "phase": t.phase, "coeff": t.coeff}
                for t in poly.terms
            ]})}
        sys = generate(cfg)
        return {"system": system_to_dict(sys)}

    @app.post("/azuma")
    def azuma(req: AzumaRequest) -> dict:
        sys = system_from_dict(req.system.to_payload())
        lam = parse_rational(req.lam)
        if lam <= 0:
            raise ValueError("lambda must be positive")
        report = azuma_check(sys, lam, req.tol)
        return jsonable(report)

    @app.post("/suite/run")
    def suite_run(req: SuiteRequest) -> dict:
        result = run_suite(req.name, seed=req.seed, scale=req.scale)
        payload = jsonable(result)
        if not req.include_reports:
            payload.pop("reports")
        return payload

    return app


app = create_app()
