"""Pydantic envelopes for the HTTP API.

The numeric leaves are strings like "3/4" (or plain numbers); the codecs
in ``multsys.serialize`` turn the validated envelopes into core objects.
Variant-shaped leaves (outer convex functions, Young functions) stay as
free dicts and are validated by their parsers.
"""

from __future__ import annotations

from typing import Any, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

RatValue = Union[str, int, float]


class StepFnModel(BaseModel):
    domain_end: RatValue
    breakpoints: list[RatValue]
    values: list[RatValue]


class BoundsModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    lower: RatValue = Field(alias="A")
    upper: RatValue = Field(alias="B")


class SystemModel(BaseModel):
    members: list[StepFnModel]
    bounds: list[BoundsModel]

    def to_payload(self) -> dict:
        return {
            "members": [m.model_dump() for m in self.members],
            "bounds": [
                {"A": b.lower, "B": b.upper} for b in self.bounds
            ],
        }


class ErrorRequest(BaseModel):
    system: SystemModel
    d: Optional[int] = None
    family: Optional[str] = None


class ExtendRequest(BaseModel):
    system: SystemModel
    family: str


class MomentsRequest(BaseModel):
    system: SystemModel
    family: str = "all"


class ExtremalizeRequest(BaseModel):
    system: SystemModel


class PipelineRequest(BaseModel):
    system: SystemModel
    d: int


class VerifyRequest(BaseModel):
    system: SystemModel
    spec: dict
    d: int
    tol: float = 1e-12


class ChaosTermModel(BaseModel):
    mask: list[int]
    coeff: list[RatValue]


class ChaosModel(BaseModel):
    base: Union[str, SystemModel, None] = "rademacher"
    n: Optional[int] = None
    order: Optional[int] = None
    terms: list[ChaosTermModel]

    def to_payload(self) -> dict:
        base: Any = self.base
        if isinstance(base, SystemModel):
            base = base.to_payload()
        return {
            "base": base,
            "n": self.n,
            "order": self.order,
            "terms": [t.model_dump() for t in self.terms],
        }


class ChaosCheckRequest(BaseModel):
    chaos: ChaosModel
    p: float
    tol: float = 1e-9


class ChaosMaximalRequest(BaseModel):
    chaos: ChaosModel
    order: Optional[list[int]] = None  # 1-based positions into terms
    vector_norm: str = "inf"


class ChaosCompareRequest(BaseModel):
    system: SystemModel
    terms: list[ChaosTermModel]
    outer: dict
    d: int
    order: Optional[list[int]] = None
    tol: float = 1e-12


class TrigTermModel(BaseModel):
    freq: int
    phase: float = 0.0
    coeff: float


class TrigPolyModel(BaseModel):
    terms: list[TrigTermModel]


class TrigOrliczRequest(BaseModel):
    poly: TrigPolyModel
    young: Union[str, dict]
    d: int
    tol: float = 1e-6
    maximal: bool = False


class TrigPowerRequest(BaseModel):
    poly: TrigPolyModel
    p: float
    d: int
    tol: float = 1e-6


class DirichletRequest(BaseModel):
    max_n: int
    tol: float = 1e-7


class GenerateRequest(BaseModel):
    kind: str
    n: int = 3
    seed: int = 0
    pieces: int = 8
    denominator: int = 64
    magnitude_low: RatValue = "1/4"
    magnitude_high: RatValue = "1"
    perturbation: RatValue = "1/10"
    terms: int = 5
    max_freq: int = 64
    rho_max: int = 2


class AzumaRequest(BaseModel):
    system: SystemModel
    lam: RatValue = Field(alias="lambda")
    tol: float = 1e-12

    model_config = ConfigDict(populate_by_name=True)


class SuiteRequest(BaseModel):
    name: str
    seed: int = 0
    scale: float = 1.0
    include_reports: bool = True


class HealthResponse(BaseModel):
    status: str
    version: str
