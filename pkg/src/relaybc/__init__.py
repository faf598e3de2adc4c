"""Joint source precoding and relay beamforming for MIMO relaying
broadcast channels with direct links, plus a Monte-Carlo experiment
harness, HTTP service and CLI."""

__version__ = "0.1.0"

from .channel import ChannelSet, SystemConfig, generate_channels, snr_to_powers
from .driver import SCHEMES, SolverResult, TraceRecord, run_algorithm1, run_baseline, run_scheme
from .errors import (
    BracketFailure,
    ConfigError,
    DegenerateChannel,
    DimensionMismatch,
    EmptyInput,
    FactorizationFailure,
    GeometryError,
    RelayBcError,
)
from .wmmse import DesignState, MseReport

__all__ = [
    "ChannelSet",
    "SystemConfig",
    "generate_channels",
    "snr_to_powers",
    "SCHEMES",
    "SolverResult",
    "TraceRecord",
    "run_algorithm1",
    "run_baseline",
    "run_scheme",
    "DesignState",
    "MseReport",
    "BracketFailure",
    "ConfigError",
    "DegenerateChannel",
    "DimensionMismatch",
    "EmptyInput",
    "FactorizationFailure",
    "GeometryError",
    "RelayBcError",
    "__version__",
]
