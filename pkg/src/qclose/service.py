"""FastAPI service wrapping the experiment runner and distance utilities.

The CLI is a thin client of this app; it can also be served standalone
with uvicorn.  Error mapping: parameter/structural problems → 400,
capacity limits → 409.
"""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .distributions import Distribution, l1_distance, l2_distance
from .errors import CapacityError, ParameterError, StructuralError
from .experiment import (
    ExperimentConfig,
    ResultRecord,
    fit_scaling,
    run_experiment,
)

app = FastAPI(title="qclose", version=__version__)


@app.exception_handler(ParameterError)
@app.exception_handler(StructuralError)
async def _bad_request(request: Request, exc: Exception) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.exception_handler(CapacityError)
async def _capacity(request: Request, exc: CapacityError) -> JSONResponse:
    return JSONResponse(status_code=409, content={"detail": str(exc)})


class ExperimentRequest(BaseModel):
    mode: Literal["l2", "equality", "l1", "classical_l2", "lemma_check", "qae_envelope"]
    n: int | None = None
    family: str = "bump_pair"
    target_distance: float | None = None
    epsilon: float | None = None
    nu: float = 1.0
    t_rule: Literal["proof", "algorithm"] = "proof"
    repeats: int = 15
    backend: Literal["subspace_exact", "dense_qpe"] = "subspace_exact"
    style: Literal["mirror", "permuted"] = "mirror"
    trials: int = 1
    seed: int = 0
    amplitude: float | None = None
    grover_power: int | None = None
    samples: int | None = None
    dist_p: list[str] | None = Field(default=None, description="probabilities as decimal strings")
    dist_q: list[str] | None = None

    def to_config(self) -> ExperimentConfig:
        data = self.model_dump()
        for key in ("dist_p", "dist_q"):
            if data[key] is not None:
                data[key] = tuple(float(x) for x in data[key])
        return ExperimentConfig.from_dict(data)


class ExperimentResponse(BaseModel):
    record: dict


class DistanceRequest(BaseModel):
    p: list[str]
    q: list[str]


class DistanceResponse(BaseModel):
    l1: float
    l2: float


class FitRequest(BaseModel):
    records: list[dict]
    x_axis: Literal["inv_eps", "inv_nu_eps", "sqrt_n_over_eps"]


class FitResponse(BaseModel):
    slope: float
    intercept: float
    r_squared: float


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.get("/version")
def version() -> dict:
    return {"version": __version__}


@app.post("/experiments/run", response_model=ExperimentResponse)
def experiments_run(req: ExperimentRequest) -> ExperimentResponse:
    record = run_experiment(req.to_config())
    return ExperimentResponse(record=record.to_dict())


@app.post("/distances", response_model=DistanceResponse)
def distances(req: DistanceRequest) -> DistanceResponse:
    p = Distribution(tuple(float(x) for x in req.p))
    q = Distribution(tuple(float(x) for x in req.q))
    return DistanceResponse(l1=l1_distance(p, q), l2=l2_distance(p, q))


@app.post("/fits", response_model=FitResponse)
def fits(req: FitRequest) -> FitResponse:
    records = [ResultRecord.from_dict(r) for r in req.records]
    fit = fit_scaling(records, req.x_axis)
    return FitResponse(slope=fit.slope, intercept=fit.intercept, r_squared=fit.r_squared)
