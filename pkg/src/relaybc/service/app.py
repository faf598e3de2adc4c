"""FastAPI application wrapping the solver and the experiment harness."""

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import ConfigError, RelayBcError
from . import api
from .schemas import (
    ExperimentRequest,
    ExperimentResponse,
    HealthResponse,
    PresetInfo,
    SolveRequest,
    SolveResponse,
)

app = FastAPI(
    title="relaybc",
    version=__version__,
    description=(
        "Joint source precoding and relay beamforming designs for MIMO "
        "relaying broadcast channels, plus a seeded Monte-Carlo sweep runner."
    ),
)


@app.get("/health", response_model=HealthResponse)
def health():
    return api.health()


@app.get("/presets", response_model=list[PresetInfo])
def list_presets():
    return api.list_presets()


@app.get("/presets/{name}", response_model=ExperimentRequest)
def get_preset(name: str):
    try:
        return api.get_preset(name)
    except ConfigError as exc:
        raise HTTPException(status_code=404, detail=str(exc)) from exc


@app.post("/solve", response_model=SolveResponse)
def solve(request: SolveRequest):
    try:
        return api.solve(request)
    except RelayBcError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.post("/experiments/run", response_model=ExperimentResponse)
def run_experiment(request: ExperimentRequest):
    try:
        return api.run(request)
    except RelayBcError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
