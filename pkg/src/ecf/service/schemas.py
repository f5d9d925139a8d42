"""Request and response bodies for the HTTP endpoints.

Shapes and basic ranges are checked here by pydantic; everything deeper
(model strings, sample contents, experiment semantics) is validated by the
library and surfaces as a structured error payload.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class TheoryRequest(BaseModel):
    model: str
    p: float = Field(gt=0.0, lt=1.0)
    include_split_point: bool = False
    bracket: tuple[float, float] | None = None


class SplitPointInfo(BaseModel):
    p0: float
    split_value: float
    b_at_p0: float
    derivative_residual: float
    roots: list[float]


class TheoryResponse(BaseModel):
    model: str
    p: float
    quantile: float
    mu_lower: float
    mu_upper: float
    G: float
    B: float
    g_prime: float
    sigma: float
    split_point: SplitPointInfo | None = None


class CurveRequest(BaseModel):
    values: list[float] = Field(min_length=2)


class CurveResponse(BaseModel):
    n: int
    k: list[int]
    p: list[float]
    g: list[float]
    crossing_k: int
    p_hat: float
    split_value: float
    left_size: int
    right_size: int


class SplitRequest(BaseModel):
    values: list[float] = Field(min_length=2)


class SplitResponse(BaseModel):
    n: int
    k_star: int
    p_n: float
    split_value: float
    left_size: int
    right_size: int


class SimulateRequest(BaseModel):
    model: str
    p: float = Field(gt=0.0, lt=1.0)
    n: int = Field(ge=10)
    replicates: int = Field(ge=10)
    seed: int = Field(ge=0)


class SimulateResponse(BaseModel):
    model: str
    experiment: str
    p: float
    n: int
    replicates: int
    seed: int
    mean: float
    variance: float
    theoretical_sigma: float
    ks_statistic: float | None = None
    ks_pvalue: float | None = None
    tn_values: list[float]
    wall_time: float


class CovGridRequest(BaseModel):
    model: str
    grid: list[float] = Field(min_length=1)
    n: int = Field(ge=10)
    replicates: int = Field(ge=100)
    seed: int = Field(ge=0)


class CovGridResponse(BaseModel):
    model: str
    grid: list[float]
    n: int
    replicates: int
    seed: int
    empirical: list[list[float]]
    theoretical: list[list[float]]
    max_abs_error: float
    min_eigenvalue: float
    wall_time: float


class HealthResponse(BaseModel):
    status: str
    version: str
