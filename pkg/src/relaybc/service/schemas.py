"""Request/response models for the HTTP service (and the local client)."""

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field

SchemeName = Literal["wmmse", "mrc_mrt", "mrc_rzf"]


class SystemConfigModel(BaseModel):
    """Antennas, geometry and priorities of one relaying cell."""

    M: int = Field(ge=1)
    K: int = Field(ge=1)
    N: list[int]
    weights: Optional[list[float]] = None
    tau: float = 3.0
    pos_bs: float = 0.0
    pos_relay: float = 0.5
    pos_users: Optional[list[float]] = None
    half_duplex_rate_factor: bool = False


class SolveRequest(BaseModel):
    """Solve one seeded channel realization with one scheme."""

    config: SystemConfigModel
    snr_db: float
    seed: int = 0
    scheme: SchemeName = "wmmse"
    tol: float = Field(default=1e-6, gt=0)
    max_iters: int = Field(default=500, ge=1)


class TraceEntryModel(BaseModel):
    iteration: int
    objective: float
    weighted_sum_rate: float
    source_power: float
    relay_power: float
    lam: float
    mu: float


class SolveResponse(BaseModel):
    scheme: SchemeName
    seed: int
    rates: list[float]
    sum_rate: float
    objective: float
    iterations: int
    converged: bool
    source_power: float
    relay_power: float
    trace: list[TraceEntryModel]


class ExperimentRequest(BaseModel):
    """Monte-Carlo sweep description; mirrors the YAML spec files."""

    kind: Literal["convergence", "snr_sweep", "position_sweep"]
    config: SystemConfigModel
    snr_db: Union[float, list[float]]
    positions: Optional[list[float]] = None
    realizations: int = Field(ge=1)
    base_seed: int = 0
    schemes: list[SchemeName] = ["wmmse", "mrc_mrt", "mrc_rzf"]
    tol: float = Field(default=1e-6, gt=0)
    max_iters: int = Field(default=500, ge=1)
    parallelism: int = Field(default=1, ge=1)
    output: str = ""
    description: str = ""


class ResultRowModel(BaseModel):
    kind: str
    sweep_value: float
    scheme: str
    realization: int
    seed: int
    sum_rate: float
    iterations: int
    converged: bool
    wall_time: float
    failed: bool
    error: str


class SummaryRowModel(BaseModel):
    kind: str
    sweep_value: float
    scheme: str
    realizations_ok: int
    realizations_failed: int
    mean_sum_rate: float
    stderr_sum_rate: float


class ExperimentResponse(BaseModel):
    rows: list[ResultRowModel]
    summary: list[SummaryRowModel]
    # convergence experiments attach one trace per realization index
    traces: dict[str, list[TraceEntryModel]] = {}


class PresetInfo(BaseModel):
    name: str
    kind: str
    description: str


class HealthResponse(BaseModel):
    status: str
    version: str
