"""Command-line client for the experiment service.

By default commands execute in-process through the same request and
response models the HTTP endpoints use; pass ``--server URL`` to talk
to a running service instead.
"""

import json
import pathlib
import sys

import click
import httpx
import yaml

from . import __version__
from .errors import RelayBcError
from .experiments import write_rows_csv, write_summary_csv, write_trace_csv
from .service import api
from .service.schemas import ExperimentRequest, ExperimentResponse, PresetInfo


class Client:
    """Thin dispatch layer: in-process handlers or a remote server."""

    def __init__(self, server=None):
        self.server = server.rstrip("/") if server else None

    def _get(self, path, model):
        resp = httpx.get(f"{self.server}{path}", timeout=60.0)
        resp.raise_for_status()
        data = resp.json()
        if isinstance(data, list):
            return [model.model_validate(item) for item in data]
        return model.model_validate(data)

    def list_presets(self):
        if self.server:
            return self._get("/presets", PresetInfo)
        return api.list_presets()

    def get_preset(self, name):
        if self.server:
            return self._get(f"/presets/{name}", ExperimentRequest)
        return api.get_preset(name)

    def run_experiment(self, request):
        if self.server:
            resp = httpx.post(
                f"{self.server}/experiments/run",
                json=request.model_dump(mode="json"),
                timeout=None,
            )
            resp.raise_for_status()
            return ExperimentResponse.model_validate(resp.json())
        return api.run(request)


def _load_request(client, spec):
    """Build an ExperimentRequest from a YAML file path or a preset name."""
    path = pathlib.Path(spec)
    if path.exists():
        data = yaml.safe_load(path.read_text())
        return ExperimentRequest.model_validate(data)
    return client.get_preset(spec)


def _print_summary(summary):
    header = f"{'sweep':>10}  {'scheme':<10} {'ok':>6} {'failed':>6}  {'mean sum-rate':>14}  {'stderr':>10}"
    click.echo(header)
    click.echo("-" * len(header))
    for row in summary:
        click.echo(
            f"{row.sweep_value:>10.4g}  {row.scheme:<10} {row.realizations_ok:>6}"
            f" {row.realizations_failed:>6}  {row.mean_sum_rate:>14.6g}  {row.stderr_sum_rate:>10.3g}"
        )


@click.group()
@click.version_option(version=__version__)
def main():
    """Sum-rate optimized source/relay designs and their Monte-Carlo sweeps."""


@main.command()
@click.argument("spec")
@click.option("--seed", type=int, default=None, help="Override the base seed.")
@click.option("--realizations", type=int, default=None, help="Override the realization count.")
@click.option("--out", type=click.Path(), default=None, help="Results CSV path.")
@click.option("--schemes", default=None, help="Comma-separated scheme subset.")
@click.option("--parallelism", type=int, default=1, show_default=True,
              help="Worker processes for the sweep.")
@click.option("--server", default=None, help="Run against a remote service URL.")
def run(spec, seed, realizations, out, schemes, parallelism, server):
    """Run an experiment from a YAML SPEC file or a preset name."""
    client = Client(server)
    try:
        request = _load_request(client, spec)
    except (RelayBcError, OSError, ValueError, yaml.YAMLError) as exc:
        raise click.ClickException(f"could not load experiment spec: {exc}")

    if seed is not None:
        request.base_seed = seed
    if realizations is not None:
        request.realizations = realizations
    if schemes is not None:
        request.schemes = [s.strip() for s in schemes.split(",") if s.strip()]
    request.parallelism = parallelism

    try:
        response = client.run_experiment(request)
    except RelayBcError as exc:
        raise click.ClickException(str(exc))

    out_path = pathlib.Path(out or request.output or "results.csv")
    stem = out_path.with_suffix("")
    write_rows_csv(response.rows, out_path)
    write_summary_csv(response.summary, pathlib.Path(f"{stem}_summary.csv"))
    written = [str(out_path), f"{stem}_summary.csv"]
    for idx, trace in sorted(response.traces.items(), key=lambda kv: int(kv[0])):
        trace_path = f"{stem}_trace_r{idx}.csv"
        write_trace_csv(trace, trace_path)
        written.append(trace_path)
    meta = {
        "version": __version__,
        "request": request.model_dump(mode="json"),
        "baseline_precoder": "scaled-identity",
    }
    meta_path = f"{stem}.meta.json"
    pathlib.Path(meta_path).write_text(json.dumps(meta, indent=2) + "\n")
    written.append(meta_path)

    _print_summary(response.summary)
    for path in written:
        click.echo(f"wrote {path}")

    empty = [(s.sweep_value, s.scheme) for s in response.summary if s.realizations_ok == 0]
    if empty:
        click.echo(f"error: no successful realizations for cells: {empty}", err=True)
        sys.exit(1)


@main.group()
def presets():
    """Inspect the committed experiment presets."""


@presets.command("list")
@click.option("--server", default=None, help="Query a remote service URL.")
def presets_list(server):
    """List available presets."""
    for info in Client(server).list_presets():
        click.echo(f"{info.name:<24} {info.kind:<16} {info.description}")


@presets.command("show")
@click.argument("name")
@click.option("--server", default=None, help="Query a remote service URL.")
def presets_show(name, server):
    """Print one preset as YAML (pipe into a file to customize it)."""
    try:
        request = Client(server).get_preset(name)
    except RelayBcError as exc:
        raise click.ClickException(str(exc))
    click.echo(yaml.safe_dump(request.model_dump(mode="json"), sort_keys=False).rstrip())


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Start the HTTP service."""
    import uvicorn

    uvicorn.run("relaybc.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
