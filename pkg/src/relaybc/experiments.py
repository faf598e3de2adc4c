"""Monte-Carlo experiment harness: sweeps, aggregation and CSV output.

An experiment is a grid of (sweep value, realization, scheme) cells.
Realization r always uses seed base_seed + r, so results are bitwise
reproducible no matter how the cells are scheduled across workers.
"""

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

from .channel import SystemConfig, generate_channels, snr_to_powers
from .driver import SCHEMES, run_scheme
from .errors import ConfigError, EmptyInput

KINDS = ("convergence", "snr_sweep", "position_sweep")

ROW_FIELDS = (
    "kind",
    "sweep_value",
    "scheme",
    "realization",
    "seed",
    "sum_rate",
    "iterations",
    "converged",
    "wall_time",
    "failed",
    "error",
)

SUMMARY_FIELDS = (
    "kind",
    "sweep_value",
    "scheme",
    "realizations_ok",
    "realizations_failed",
    "mean_sum_rate",
    "stderr_sum_rate",
)

TRACE_FIELDS = (
    "iteration",
    "objective",
    "weighted_sum_rate",
    "source_power",
    "relay_power",
    "lambda",
    "mu",
)


@dataclass
class ExperimentSpec:
    """A full experiment description, loadable from a YAML mapping."""

    kind: str
    M: int
    K: int
    N: tuple
    snr_db: tuple            # sweep for snr_sweep, single value otherwise
    realizations: int
    base_seed: int
    schemes: tuple = SCHEMES
    positions: tuple = ()    # sweep for position_sweep only
    weights: tuple = None
    tau: float = 3.0
    pos_bs: float = 0.0
    pos_relay: float = 0.5
    pos_users: tuple = None
    half_duplex_rate_factor: bool = False
    tol: float = 1e-6
    max_iters: int = 500
    output: str = ""
    description: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if isinstance(self.snr_db, (int, float)):
            self.snr_db = (float(self.snr_db),)
        self.snr_db = tuple(float(v) for v in self.snr_db)
        self.positions = tuple(float(v) for v in self.positions)
        self.N = tuple(int(n) for n in self.N)
        if self.weights is not None:
            self.weights = tuple(float(w) for w in self.weights)
        if self.pos_users is not None:
            self.pos_users = tuple(float(p) for p in self.pos_users)
        self.schemes = tuple(self.schemes)
        if self.realizations < 1:
            raise ConfigError("need at least one realization")
        if not self.schemes:
            raise ConfigError("need at least one scheme")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ConfigError(f"unknown scheme {s!r}; expected a subset of {SCHEMES}")
        if self.kind == "position_sweep":
            if not self.positions:
                raise ConfigError("position_sweep needs a list of relay positions")
            if any(not (0.1 <= p <= 0.9) for p in self.positions):
                raise ConfigError("relay positions must lie in [0.1, 0.9]")
        elif self.positions:
            raise ConfigError(f"{self.kind} does not take a positions list")
        if self.kind != "snr_sweep" and len(self.snr_db) != 1:
            raise ConfigError(f"{self.kind} takes a single snr_db value")

    def sweep_values(self):
        if self.kind == "position_sweep":
            return self.positions
        return self.snr_db

    def config_for(self, sweep_value):
        """SystemConfig for one sweep cell."""
        if self.kind == "position_sweep":
            snr_db, pos_relay = self.snr_db[0], float(sweep_value)
        else:
            snr_db, pos_relay = float(sweep_value), self.pos_relay
        ps, pr = snr_to_powers(snr_db)
        return SystemConfig(
            M=self.M,
            K=self.K,
            N=self.N,
            ps=ps,
            pr=pr,
            weights=self.weights,
            tau=self.tau,
            pos_bs=self.pos_bs,
            pos_relay=pos_relay,
            pos_users=self.pos_users,
            half_duplex_rate_factor=self.half_duplex_rate_factor,
        )


def spec_from_dict(data):
    """Build an ExperimentSpec from a YAML-style mapping.

    The antenna/geometry fields live under a nested ``config`` section;
    everything else sits at the top level.
    """
    data = dict(data)
    cfg = dict(data.pop("config", {}))
    known = {
        "kind", "snr_db", "positions", "realizations", "base_seed", "schemes",
        "tol", "max_iters", "output", "description",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown experiment fields: {sorted(unknown)}")
    cfg_known = {
        "M", "K", "N", "weights", "tau", "pos_bs", "pos_relay", "pos_users",
        "half_duplex_rate_factor",
    }
    bad = set(cfg) - cfg_known
    if bad:
        raise ConfigError(f"unknown config fields: {sorted(bad)}")
    return ExperimentSpec(**cfg, **data)


@dataclass
class ResultRow:
    """One (sweep value, scheme, realization) outcome."""

    kind: str
    sweep_value: float
    scheme: str
    realization: int
    seed: int
    sum_rate: float
    iterations: int
    converged: bool
    wall_time: float
    failed: bool = False
    error: str = ""


@dataclass
class SummaryRow:
    kind: str
    sweep_value: float
    scheme: str
    realizations_ok: int
    realizations_failed: int
    mean_sum_rate: float
    stderr_sum_rate: float


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list
    summary: list
    traces: dict = field(default_factory=dict)  # realization -> TraceRecord list

    def empty_cells(self):
        """(sweep value, scheme) cells with zero successful realizations."""
        return [
            (s.sweep_value, s.scheme) for s in self.summary if s.realizations_ok == 0
        ]


def _run_cell(spec, cell):
    """Run every scheme for one (sweep value, realization) cell."""
    sweep_value, realization = cell
    seed = spec.base_seed + realization
    rows, traces = [], {}
    try:
        config = spec.config_for(sweep_value)
        ch = generate_channels(config, seed)
    except Exception as exc:  # noqa: BLE001 - a bad cell must not kill the sweep
        for scheme in spec.schemes:
            rows.append(
                ResultRow(
                    spec.kind, sweep_value, scheme, realization, seed,
                    math.nan, 0, False, 0.0, failed=True, error=str(exc),
                )
            )
        return rows, traces
    for scheme in spec.schemes:
        start = time.perf_counter()
        try:
            result = run_scheme(config, ch, scheme, tol=spec.tol, max_iters=spec.max_iters)
            elapsed = time.perf_counter() - start
            rows.append(
                ResultRow(
                    spec.kind, sweep_value, scheme, realization, seed,
                    result.report.weighted_sum_rate, result.iterations_used,
                    result.converged, elapsed,
                )
            )
            if spec.kind == "convergence" and result.trace:
                traces[realization] = result.trace
        except Exception as exc:  # noqa: BLE001
            elapsed = time.perf_counter() - start
            rows.append(
                ResultRow(
                    spec.kind, sweep_value, scheme, realization, seed,
                    math.nan, 0, False, elapsed, failed=True, error=str(exc),
                )
            )
    return rows, traces


def run_experiment(spec, parallelism=1):
    """Run the full sweep grid and aggregate the rows.

    Per-cell errors are recorded on the row (failed flag) and never
    abort the sweep.  Rows come back sorted by (sweep value, scheme,
    realization) regardless of scheduling order.
    """
    values = spec.sweep_values()
    cells = [(sv, r) for sv in values for r in range(spec.realizations)]
    rows, traces = [], {}
    if parallelism > 1 and len(cells) > 1:
        chunk = max(1, len(cells) // (parallelism * 8))
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            for cell_rows, cell_traces in pool.map(
                partial(_run_cell, spec), cells, chunksize=chunk
            ):
                rows.extend(cell_rows)
                traces.update(cell_traces)
    else:
        for cell in cells:
            cell_rows, cell_traces = _run_cell(spec, cell)
            rows.extend(cell_rows)
            traces.update(cell_traces)

    value_order = {v: i for i, v in enumerate(values)}
    scheme_order = {s: i for i, s in enumerate(spec.schemes)}
    rows.sort(
        key=lambda r: (value_order[r.sweep_value], scheme_order[r.scheme], r.realization)
    )
    return ExperimentResult(spec, rows, summarize(rows), traces)


def summarize(rows):
    """Mean and standard error of the sum-rate per (sweep value, scheme).

    Failed rows are excluded from the statistics but counted.
    """
    if not rows:
        raise EmptyInput("no rows to summarize")
    groups = {}
    for row in rows:
        groups.setdefault((row.kind, row.sweep_value, row.scheme), []).append(row)
    summary = []
    for (kind, sweep_value, scheme), members in groups.items():
        ok = [r.sum_rate for r in members if not r.failed]
        n = len(ok)
        if n == 0:
            mean = stderr = math.nan
        else:
            mean = math.fsum(ok) / n
            if n > 1:
                # shifted-data form: exact zero for identical samples
                dev = [x - ok[0] for x in ok]
                var = max(
                    (math.fsum(d * d for d in dev) - math.fsum(dev) ** 2 / n) / (n - 1),
                    0.0,
                )
                stderr = math.sqrt(var / n)
            else:
                stderr = 0.0
        summary.append(
            SummaryRow(kind, sweep_value, scheme, n, len(members) - n, mean, stderr)
        )
    return summary


# ---------------------------------------------------------------------------
# CSV output (12 significant digits, fixed column order)
# ---------------------------------------------------------------------------

def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_rows_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ROW_FIELDS)
        for row in rows:
            writer.writerow([_fmt(getattr(row, f)) for f in ROW_FIELDS])


def write_summary_csv(summary, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_FIELDS)
        for row in summary:
            writer.writerow([_fmt(getattr(row, f)) for f in SUMMARY_FIELDS])


def write_trace_csv(trace, path):
    attrs = ("iteration", "objective", "weighted_sum_rate", "source_power",
             "relay_power", "lam", "mu")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_FIELDS)
        for record in trace:
            writer.writerow([_fmt(getattr(record, a)) for a in attrs])
