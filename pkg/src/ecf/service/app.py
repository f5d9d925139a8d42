"""FastAPI service exposing the toolkit.

Run it with ``uvicorn ecf.service.app:app``.  The bundled command line
client speaks to the same app in process, so every computation is
available with or without a server.

Error contract: domain problems (bad model strings, malformed samples,
out-of-range levels, invalid request shapes) return 400 with a ``usage``
payload; valid requests whose computation fails numerically (no crossing
in the bracket, vanishing density, quadrature cap) return 422 with a
``numerical`` payload.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..asymptotics import asymptotic_variance
from ..empirical import SortedSample, ecf_curve, two_cluster_split
from ..errors import DomainError, EcfError, NumericalError
from ..models import find_split_point, parse_model
from ..simulate import SimConfig, simulate_cov_grid, simulate_tn
from . import schemas

app = FastAPI(
    title="ecf service",
    description="Empirical cross-over function computations over HTTP.",
    version=__version__,
)


def _error_body(kind: str, message: str) -> dict:
    return {"detail": {"kind": kind, "message": message}}


@app.exception_handler(DomainError)
async def _domain_error(request: Request, exc: DomainError) -> JSONResponse:
    return JSONResponse(status_code=400, content=_error_body("usage", str(exc)))


@app.exception_handler(NumericalError)
async def _numerical_error(request: Request, exc: NumericalError) -> JSONResponse:
    return JSONResponse(status_code=422, content=_error_body("numerical", str(exc)))


@app.exception_handler(EcfError)
async def _other_ecf_error(request: Request, exc: EcfError) -> JSONResponse:
    return JSONResponse(status_code=400, content=_error_body("usage", str(exc)))


@app.exception_handler(RequestValidationError)
async def _request_validation(request: Request, exc: RequestValidationError) -> JSONResponse:
    first = exc.errors()[0] if exc.errors() else {}
    where = ".".join(str(part) for part in first.get("loc", ()) if part != "body")
    message = first.get("msg", "invalid request")
    text = f"{where}: {message}" if where else message
    return JSONResponse(status_code=400, content=_error_body("usage", text))


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)


@app.post("/theory", response_model=schemas.TheoryResponse, response_model_exclude_none=True)
def theory(req: schemas.TheoryRequest) -> schemas.TheoryResponse:
    model = parse_model(req.model)
    split_info = None
    if req.include_split_point:
        bracket = req.bracket if req.bracket is not None else (0.01, 0.99)
        found = find_split_point(model, bracket)
        split_info = schemas.SplitPointInfo(
            p0=found.p0,
            split_value=found.split_value,
            b_at_p0=found.b_at_p0,
            derivative_residual=found.derivative_residual,
            roots=list(found.roots),
        )
    return schemas.TheoryResponse(
        model=req.model,
        p=req.p,
        quantile=float(model.quantile(req.p)),
        mu_lower=model.lower_mean(req.p),
        mu_upper=model.upper_mean(req.p),
        G=model.crossover(req.p),
        B=model.split_function(req.p),
        g_prime=model.crossover_slope(req.p),
        sigma=asymptotic_variance(model, req.p),
        split_point=split_info,
    )


@app.post("/curve", response_model=schemas.CurveResponse)
def curve(req: schemas.CurveRequest) -> schemas.CurveResponse:
    sample = SortedSample(req.values)
    result = ecf_curve(sample)
    cut = two_cluster_split(sample)
    return schemas.CurveResponse(
        n=result.n,
        k=list(range(1, result.n)),
        p=[k / result.n for k in range(1, result.n)],
        g=result.g.tolist(),
        crossing_k=result.crossing_k,
        p_hat=result.p_hat,
        split_value=cut.split_value,
        left_size=int(cut.left.size),
        right_size=int(cut.right.size),
    )


@app.post("/split", response_model=schemas.SplitResponse)
def split(req: schemas.SplitRequest) -> schemas.SplitResponse:
    sample = SortedSample(req.values)
    cut = two_cluster_split(sample)
    return schemas.SplitResponse(
        n=sample.n,
        k_star=cut.k_star,
        p_n=cut.p_n,
        split_value=cut.split_value,
        left_size=int(cut.left.size),
        right_size=int(cut.right.size),
    )


def _simulate_response(config: SimConfig) -> schemas.SimulateResponse:
    report = simulate_tn(config)
    return schemas.SimulateResponse(
        model=config.model,
        experiment=config.experiment,
        p=float(config.p),
        n=config.n,
        replicates=config.replicates,
        seed=config.seed,
        mean=report.mean,
        variance=report.variance,
        theoretical_sigma=report.theoretical_sigma,
        ks_statistic=report.ks_statistic,
        ks_pvalue=report.ks_pvalue,
        tn_values=report.tn_values.tolist(),
        wall_time=report.wall_time,
    )


@app.post("/simulate", response_model=schemas.SimulateResponse)
def simulate(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
    config = SimConfig(
        model=req.model,
        n=req.n,
        replicates=req.replicates,
        seed=req.seed,
        experiment="tn_summary",
        p=req.p,
    )
    return _simulate_response(config)


@app.post("/kstest", response_model=schemas.SimulateResponse)
def kstest(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
    config = SimConfig(
        model=req.model,
        n=req.n,
        replicates=req.replicates,
        seed=req.seed,
        experiment="ks_normality",
        p=req.p,
    )
    return _simulate_response(config)


@app.post("/covgrid", response_model=schemas.CovGridResponse)
def covgrid(req: schemas.CovGridRequest) -> schemas.CovGridResponse:
    config = SimConfig(
        model=req.model,
        n=req.n,
        replicates=req.replicates,
        seed=req.seed,
        experiment="cov_grid",
        grid=tuple(req.grid),
    )
    result = simulate_cov_grid(config)
    return schemas.CovGridResponse(
        model=config.model,
        grid=list(result.grid),
        n=config.n,
        replicates=config.replicates,
        seed=config.seed,
        empirical=result.empirical.tolist(),
        theoretical=result.theoretical.matrix.tolist(),
        max_abs_error=result.max_abs_error,
        min_eigenvalue=result.theoretical.min_eigenvalue(),
        wall_time=result.wall_time,
    )
