"""HTTP front end wrapping the simulator.

Every endpoint takes a raw config mapping, validates it server-side, and
returns full reports; clients (the bundled CLI included) render files from
the JSON payloads. Config violations come back as 400 with one
``{field, reason}`` entry per problem.
"""

from __future__ import annotations

from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__, engine
from .domain import SCENARIOS, validate_config
from .errors import ConfigError

app = FastAPI(title="satreuse", version=__version__)


class ConfigRequest(BaseModel):
    config: dict = Field(default_factory=dict)


class SweepRequest(ConfigRequest):
    param: Literal["tau", "th_co"]
    values: list[float]


class CompareRequest(ConfigRequest):
    scenarios: list[str] = Field(default_factory=lambda: list(SCENARIOS))


class MetricsOut(BaseModel):
    scenario: str
    n: int
    seed: int
    completion_time_s: float
    reuse_rate: float
    cpu_occupancy: float
    reuse_accuracy: float
    data_transfer_mb: float
    total_cost_s: float


class RunResponse(BaseModel):
    metrics: MetricsOut
    report: dict


class SweepEntry(BaseModel):
    param: str
    value: float
    metrics: MetricsOut
    report: dict


class SweepResponse(BaseModel):
    entries: list[SweepEntry]


class CompareResponse(BaseModel):
    runs: list[RunResponse]


class ValidateResponse(BaseModel):
    config: dict


class HealthResponse(BaseModel):
    status: str
    version: str


def _config_error(exc: ConfigError) -> HTTPException:
    detail = {"errors": [{"field": f, "reason": r} for f, r in exc.errors]}
    return HTTPException(status_code=400, detail=detail)


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/config/validate", response_model=ValidateResponse)
def validate(req: ConfigRequest) -> ValidateResponse:
    try:
        cfg = validate_config(req.config)
    except ConfigError as exc:
        raise _config_error(exc)
    return ValidateResponse(config=cfg.model_dump(mode="json"))


def _run_response(report: engine.RunReport) -> RunResponse:
    return RunResponse(metrics=MetricsOut(**report.metrics_row()),
                       report=report.to_dict())


@app.post("/simulations/run", response_model=RunResponse)
def run_simulation(req: ConfigRequest) -> RunResponse:
    try:
        report = engine.run(req.config)
    except ConfigError as exc:
        raise _config_error(exc)
    return _run_response(report)


@app.post("/simulations/sweep", response_model=SweepResponse)
def run_sweep(req: SweepRequest) -> SweepResponse:
    try:
        results = engine.run_sweep(req.config, req.param, req.values)
    except ConfigError as exc:
        raise _config_error(exc)
    entries = [
        SweepEntry(param=req.param, value=value,
                   metrics=MetricsOut(**report.metrics_row()),
                   report=report.to_dict())
        for value, report in results
    ]
    return SweepResponse(entries=entries)


@app.post("/simulations/compare", response_model=CompareResponse)
def run_compare(req: CompareRequest) -> CompareResponse:
    unknown = [s for s in req.scenarios if s not in SCENARIOS]
    if unknown:
        raise HTTPException(
            status_code=400,
            detail={"errors": [{"field": "scenarios",
                                "reason": f"unknown scenario(s): {', '.join(unknown)}"}]},
        )
    try:
        reports = engine.run_compare(req.config, req.scenarios)
    except ConfigError as exc:
        raise _config_error(exc)
    return CompareResponse(runs=[_run_response(r) for r in reports])
