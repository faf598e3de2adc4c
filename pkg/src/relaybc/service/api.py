"""Service handlers shared by the FastAPI app and the local CLI client.

Each handler takes a request model and returns a response model, so the
CLI can call them in-process with exactly the payloads the HTTP
endpoints accept.
"""

from dataclasses import asdict

from .. import __version__, presets
from ..channel import SystemConfig, generate_channels, snr_to_powers
from ..driver import run_scheme
from ..experiments import run_experiment, spec_from_dict
from ..wmmse import relay_gram, relay_power, source_power
from .schemas import (
    ExperimentRequest,
    ExperimentResponse,
    HealthResponse,
    PresetInfo,
    ResultRowModel,
    SolveResponse,
    SummaryRowModel,
    TraceEntryModel,
)


def _system_config(model, snr_db):
    ps, pr = snr_to_powers(snr_db)
    return SystemConfig(
        M=model.M,
        K=model.K,
        N=tuple(model.N),
        ps=ps,
        pr=pr,
        weights=None if model.weights is None else tuple(model.weights),
        tau=model.tau,
        pos_bs=model.pos_bs,
        pos_relay=model.pos_relay,
        pos_users=None if model.pos_users is None else tuple(model.pos_users),
        half_duplex_rate_factor=model.half_duplex_rate_factor,
    )


def experiment_spec(request):
    """ExperimentSpec for an ExperimentRequest."""
    data = {
        "kind": request.kind,
        "config": request.config.model_dump(exclude_none=True),
        "snr_db": request.snr_db,
        "realizations": request.realizations,
        "base_seed": request.base_seed,
        "schemes": list(request.schemes),
        "tol": request.tol,
        "max_iters": request.max_iters,
        "output": request.output,
        "description": request.description,
    }
    if request.positions is not None:
        data["positions"] = list(request.positions)
    return spec_from_dict(data)


def _trace_models(trace):
    return [TraceEntryModel(**asdict(record)) for record in trace]


def health():
    return HealthResponse(status="ok", version=__version__)


def list_presets():
    return [PresetInfo(**info) for info in presets.list_presets()]


def get_preset(name):
    return ExperimentRequest.model_validate(presets.preset_dict(name))


def solve(request):
    """Run one scheme on one seeded realization and report the design."""
    config = _system_config(request.config, request.snr_db)
    ch = generate_channels(config, request.seed)
    result = run_scheme(config, ch, request.scheme, tol=request.tol, max_iters=request.max_iters)
    precoders = result.state.precoders
    return SolveResponse(
        scheme=request.scheme,
        seed=request.seed,
        rates=[float(r) for r in result.report.rates],
        sum_rate=result.report.weighted_sum_rate,
        objective=result.report.objective,
        iterations=result.iterations_used,
        converged=result.converged,
        source_power=source_power(precoders),
        relay_power=relay_power(result.state.relay_bf, relay_gram(ch, precoders)),
        trace=_trace_models(result.trace),
    )


def run(request):
    """Run a full experiment request and return rows plus summary."""
    spec = experiment_spec(request)
    result = run_experiment(spec, parallelism=request.parallelism)
    return ExperimentResponse(
        rows=[ResultRowModel(**asdict(r)) for r in result.rows],
        summary=[SummaryRowModel(**asdict(s)) for s in result.summary],
        traces={
            str(idx): _trace_models(trace) for idx, trace in result.traces.items()
        },
    )
