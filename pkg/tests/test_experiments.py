import csv
import math

import numpy as np
import pytest

from relaybc.errors import ConfigError, EmptyInput
from relaybc.experiments import (
    ExperimentSpec,
    ResultRow,
    _run_cell,
    run_experiment,
    spec_from_dict,
    summarize,
    write_rows_csv,
    write_summary_csv,
    write_trace_csv,
)
from relaybc import presets


def _tiny_spec(**overrides):
    base = dict(
        kind="snr_sweep",
        M=2,
        K=1,
        N=(1,),
        snr_db=(0.0,),
        realizations=1,
        base_seed=0,
        schemes=("wmmse",),
        tol=1e-4,
        max_iters=30,
    )
    base.update(overrides)
    return ExperimentSpec(**base)


def test_spec_validation():
    with pytest.raises(ConfigError):
        _tiny_spec(kind="bogus")
    with pytest.raises(ConfigError):
        _tiny_spec(realizations=0)
    with pytest.raises(ConfigError):
        _tiny_spec(schemes=("nope",))
    with pytest.raises(ConfigError):
        _tiny_spec(kind="position_sweep")  # missing positions
    with pytest.raises(ConfigError):
        _tiny_spec(kind="position_sweep", positions=(0.05,), snr_db=10.0)
    with pytest.raises(ConfigError):
        _tiny_spec(positions=(0.5,))  # positions only valid for position sweeps
    with pytest.raises(ConfigError):
        _tiny_spec(kind="convergence", snr_db=(1.0, 2.0))


def test_spec_from_dict_round_trip():
    data = {
        "kind": "position_sweep",
        "config": {"M": 4, "K": 2, "N": [1, 1], "tau": 3.0},
        "snr_db": 20.0,
        "positions": [0.3, 0.6],
        "realizations": 2,
        "base_seed": 42,
        "schemes": ["wmmse", "mrc_mrt"],
    }
    spec = spec_from_dict(data)
    assert spec.sweep_values() == (0.3, 0.6)
    cfg = spec.config_for(0.6)
    assert cfg.pos_relay == 0.6
    assert cfg.ps == pytest.approx(100.0)
    with pytest.raises(ConfigError):
        spec_from_dict({**data, "bogus_field": 1})
    with pytest.raises(ConfigError):
        spec_from_dict({**data, "config": {**data["config"], "bad": 1}})


def test_minimal_sweep_one_row():
    result = run_experiment(_tiny_spec())
    assert len(result.rows) == 1
    row = result.rows[0]
    assert row.scheme == "wmmse"
    assert row.seed == 0
    assert not row.failed
    assert row.sum_rate > 0


def test_rows_cover_grid_and_are_sorted():
    spec = _tiny_spec(snr_db=(0.0, 10.0), realizations=3, schemes=("wmmse", "mrc_mrt"))
    result = run_experiment(spec)
    assert len(result.rows) == 2 * 3 * 2
    keys = [(r.sweep_value, r.scheme, r.realization) for r in result.rows]
    order = {0.0: 0, 10.0: 1}
    scheme_order = {"wmmse": 0, "mrc_mrt": 1}
    sort_keys = [(order[v], scheme_order[s], r) for v, s, r in keys]
    assert sort_keys == sorted(sort_keys)
    # seeds follow base_seed + realization
    for row in result.rows:
        assert row.seed == spec.base_seed + row.realization


def test_parallel_matches_serial():
    spec = _tiny_spec(snr_db=(0.0, 5.0), realizations=4, schemes=("wmmse", "mrc_rzf"))
    serial = run_experiment(spec, parallelism=1)
    parallel = run_experiment(spec, parallelism=2)
    assert [r.sum_rate for r in serial.rows] == [r.sum_rate for r in parallel.rows]
    assert [r.seed for r in serial.rows] == [r.seed for r in parallel.rows]


def test_convergence_kind_collects_traces():
    spec = _tiny_spec(kind="convergence", snr_db=10.0, realizations=2)
    result = run_experiment(spec)
    assert set(result.traces) == {0, 1}
    assert all(len(t) >= 1 for t in result.traces.values())


def test_summarize_hand_values():
    row = dict(kind="snr_sweep", sweep_value=1.0, scheme="wmmse", realization=0,
               seed=0, iterations=1, converged=True, wall_time=0.0)
    single = [ResultRow(sum_rate=3.0, **row)]
    s = summarize(single)[0]
    assert s.mean_sum_rate == 3.0 and s.stderr_sum_rate == 0.0 and s.realizations_ok == 1

    two = [
        ResultRow(sum_rate=2.0, **row),
        ResultRow(sum_rate=4.0, **{**row, "realization": 1}),
    ]
    s = summarize(two)[0]
    assert s.mean_sum_rate == pytest.approx(3.0)
    assert s.stderr_sum_rate == pytest.approx(1.0)


def test_summarize_identical_reruns_have_zero_stderr():
    spec = _tiny_spec()
    rows = []
    for _ in range(50):
        cell_rows, _ = _run_cell(spec, (0.0, 5))
        rows.extend(cell_rows)
    s = summarize(rows)[0]
    assert s.realizations_ok == 50
    assert s.stderr_sum_rate == 0.0  # bitwise-identical reruns


def test_summarize_excludes_failed_rows():
    row = dict(kind="snr_sweep", sweep_value=1.0, scheme="wmmse", realization=0,
               seed=0, iterations=1, converged=True, wall_time=0.0)
    rows = [
        ResultRow(sum_rate=2.0, **row),
        ResultRow(sum_rate=math.nan, **{**row, "realization": 1}, failed=True, error="x"),
    ]
    s = summarize(rows)[0]
    assert s.realizations_ok == 1 and s.realizations_failed == 1
    assert s.mean_sum_rate == pytest.approx(2.0)
    with pytest.raises(EmptyInput):
        summarize([])


def test_summary_permutation_invariant():
    spec = _tiny_spec(realizations=5)
    result = run_experiment(spec)
    shuffled = list(reversed(result.rows))
    a = summarize(result.rows)[0]
    b = summarize(shuffled)[0]
    assert a.mean_sum_rate == b.mean_sum_rate
    assert a.stderr_sum_rate == b.stderr_sum_rate


def test_row_errors_do_not_abort_sweep(monkeypatch):
    import relaybc.experiments as exp

    real = exp.run_scheme

    def flaky(config, ch, scheme, tol, max_iters):
        if scheme == "mrc_mrt":
            raise RuntimeError("injected failure")
        return real(config, ch, scheme, tol=tol, max_iters=max_iters)

    monkeypatch.setattr(exp, "run_scheme", flaky)
    spec = _tiny_spec(schemes=("wmmse", "mrc_mrt"), realizations=2)
    result = run_experiment(spec)
    failed = [r for r in result.rows if r.failed]
    ok = [r for r in result.rows if not r.failed]
    assert len(failed) == 2 and all(r.scheme == "mrc_mrt" for r in failed)
    assert all("injected failure" in r.error for r in failed)
    assert len(ok) == 2
    empty = result.empty_cells()
    assert empty == [(0.0, "mrc_mrt")]


def test_csv_output_schema(tmp_path):
    spec = _tiny_spec(realizations=2, schemes=("wmmse", "mrc_rzf"))
    result = run_experiment(spec)
    rows_path = tmp_path / "rows.csv"
    summary_path = tmp_path / "summary.csv"
    write_rows_csv(result.rows, rows_path)
    write_summary_csv(result.summary, summary_path)

    with open(rows_path) as fh:
        reader = list(csv.reader(fh))
    assert reader[0] == [
        "kind", "sweep_value", "scheme", "realization", "seed", "sum_rate",
        "iterations", "converged", "wall_time", "failed", "error",
    ]
    assert len(reader) == 1 + len(result.rows)
    # sum-rates carry 12 significant digits
    sum_rate_text = reader[1][5]
    assert sum_rate_text == f"{result.rows[0].sum_rate:.12g}"

    with open(summary_path) as fh:
        srows = list(csv.reader(fh))
    assert srows[0] == [
        "kind", "sweep_value", "scheme", "realizations_ok", "realizations_failed",
        "mean_sum_rate", "stderr_sum_rate",
    ]


def test_trace_csv(tmp_path):
    spec = _tiny_spec(kind="convergence", snr_db=10.0)
    result = run_experiment(spec)
    path = tmp_path / "trace.csv"
    write_trace_csv(result.traces[0], path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == [
        "iteration", "objective", "weighted_sum_rate", "source_power",
        "relay_power", "lambda", "mu",
    ]
    assert len(rows) == 1 + len(result.traces[0])


def test_rerun_reproduces_sum_rates_bitwise():
    spec = _tiny_spec(snr_db=(0.0, 10.0), realizations=3, schemes=("wmmse", "mrc_mrt"))
    a = run_experiment(spec)
    b = run_experiment(spec)
    assert [r.sum_rate for r in a.rows] == [r.sum_rate for r in b.rows]


def test_presets_load_and_validate():
    names = [info["name"] for info in presets.list_presets()]
    assert "snr_sweep_full" in names
    assert "position_sweep_full" in names
    assert "convergence_full" in names
    for name in names:
        spec = presets.load_preset(name)
        assert spec.realizations >= 1
        assert spec.sweep_values()
    full = presets.load_preset("snr_sweep_full")
    assert full.M == 8 and full.K == 4 and full.realizations == 2000
    with pytest.raises(ConfigError):
        presets.load_preset("missing")
