"""Command-line client for the simulation service.

Every subcommand is a thin HTTP client: by default it mounts the service
in-process (no socket), or it targets a running server with ``--server``.
Outputs are rendered client-side from the JSON payloads, with fixed column
orders and fixed float formatting so identical invocations produce
byte-identical files.

Exit codes: 0 success, 1 configuration error, 2 I/O or transport error.
"""

from __future__ import annotations

import csv
import json
import os
import sys
from typing import Optional

import click
import httpx

METRIC_COLUMNS = [
    "scenario", "n", "seed", "completion_time_s", "reuse_rate",
    "cpu_occupancy", "reuse_accuracy", "data_transfer_mb", "total_cost_s",
]
COMPARE_COLUMNS = [
    "scenario", "completion_time_s", "reuse_rate", "cpu_occupancy",
    "reuse_accuracy", "data_transfer_mb",
]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2


class CliFailure(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message
        super().__init__(message)


def _client(server: Optional[str]) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
    # No server: mount the service in-process (same endpoints, no socket).
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service import app  # imported lazily; pulls in the full engine

    return TestClient(app)


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise CliFailure(EXIT_IO, f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise CliFailure(EXIT_CONFIG, f"config is not valid JSON: {exc}")
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot read config: {exc}")


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    try:
        response = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        raise CliFailure(EXIT_IO, f"transport error: {exc}")
    if response.status_code == 400 or response.status_code == 422:
        raise CliFailure(EXIT_CONFIG, _format_errors(response))
    if response.status_code != 200:
        raise CliFailure(EXIT_IO, f"server error {response.status_code}: {response.text}")
    return response.json()


def _format_errors(response: httpx.Response) -> str:
    try:
        detail = response.json()["detail"]
    except Exception:
        return f"invalid configuration: {response.text}"
    if isinstance(detail, dict) and "errors" in detail:
        parts = [f"{e['field']}: {e['reason']}" for e in detail["errors"]]
        return "invalid configuration: " + "; ".join(parts)
    return f"invalid configuration: {detail}"


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: str, columns: list[str], rows: list[dict]) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_fmt(row[c]) for c in columns])
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot write {path}: {exc}")


def _write_json(path: str, payload: dict) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot write {path}: {exc}")


def _write_events(path: str, report: dict) -> None:
    lines = []
    import hashlib

    for event in report["events"]:
        payload = json.dumps(event["payload"], sort_keys=True, separators=(",", ":"))
        digest = hashlib.sha256(payload.encode()).hexdigest()[:12]
        sat = event["satellite"]
        sat_s = f"{sat[0]},{sat[1]}" if sat else "-"
        lines.append(f"{event['time_s']:.9f}\t{event['kind']}\t{sat_s}\t{digest}")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines))
            if lines:
                fh.write("\n")
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot write {path}: {exc}")


def _ensure_outdir(out_dir: str) -> None:
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot create output directory: {exc}")


@click.group()
def main() -> None:
    """Satellite computation-reuse simulator."""


@main.command()
@click.option("--config", "-c", "config_path", required=True, help="JSON config file.")
@click.option("--out", "-o", "out_dir", required=True, help="Output directory.")
@click.option("--server", default=None, help="Base URL of a running service.")
def run(config_path: str, out_dir: str, server: Optional[str]) -> None:
    """Run one scenario; writes report.json, metrics.csv, events.log."""
    try:
        config = _load_config(config_path)
        _ensure_outdir(out_dir)
        with _client(server) as client:
            body = _post(client, "/simulations/run", {"config": config})
        _write_json(os.path.join(out_dir, "report.json"), body["report"])
        _write_csv(os.path.join(out_dir, "metrics.csv"), METRIC_COLUMNS,
                   [body["metrics"]])
        _write_events(os.path.join(out_dir, "events.log"), body["report"])
    except CliFailure as failure:
        click.echo(failure.message, err=True)
        sys.exit(failure.code)
    click.echo(f"wrote report.json, metrics.csv, events.log to {out_dir}")


@main.command()
@click.option("--config", "-c", "config_path", required=True)
@click.option("--param", required=True, type=click.Choice(["tau", "th_co"]))
@click.option("--values", required=True, help="Comma-separated values, e.g. 1,3,5.")
@click.option("--out", "-o", "out_dir", required=True)
@click.option("--server", default=None)
def sweep(config_path: str, param: str, values: str, out_dir: str,
          server: Optional[str]) -> None:
    """Sweep one parameter; writes sweep.csv (one row per value)."""
    try:
        config = _load_config(config_path)
        try:
            parsed = [float(v) for v in values.split(",") if v.strip()]
        except ValueError:
            raise CliFailure(EXIT_CONFIG, f"cannot parse sweep values: {values!r}")
        if not parsed:
            raise CliFailure(EXIT_CONFIG, "sweep needs at least one value")
        _ensure_outdir(out_dir)
        with _client(server) as client:
            body = _post(client, "/simulations/sweep",
                         {"config": config, "param": param, "values": parsed})
        rows = []
        for entry in body["entries"]:
            row = {"param": entry["param"], "value": entry["value"]}
            row.update(entry["metrics"])
            rows.append(row)
        _write_csv(os.path.join(out_dir, "sweep.csv"),
                   ["param", "value"] + METRIC_COLUMNS, rows)
    except CliFailure as failure:
        click.echo(failure.message, err=True)
        sys.exit(failure.code)
    click.echo(f"wrote sweep.csv to {out_dir}")


@main.command()
@click.option("--config", "-c", "config_path", required=True)
@click.option("--server", default=None)
def validate(config_path: str, server: Optional[str]) -> None:
    """Validate a config; prints the normalized document."""
    try:
        config = _load_config(config_path)
        with _client(server) as client:
            body = _post(client, "/config/validate", {"config": config})
    except CliFailure as failure:
        click.echo(failure.message, err=True)
        sys.exit(failure.code)
    click.echo(json.dumps(body["config"], sort_keys=True, indent=2))


@main.command()
@click.option("--config", "-c", "config_path", required=True)
@click.option("--scenarios", default="without_cr,srs_priority,slcr,sccr_init,sccr",
              help="Comma-separated scenario list.")
@click.option("--out", "-o", "out_dir", required=True)
@click.option("--server", default=None)
def compare(config_path: str, scenarios: str, out_dir: str,
            server: Optional[str]) -> None:
    """Run several scenarios on one workload; writes compare.csv."""
    try:
        config = _load_config(config_path)
        wanted = [s.strip() for s in scenarios.split(",") if s.strip()]
        if not wanted:
            raise CliFailure(EXIT_CONFIG, "compare needs at least one scenario")
        _ensure_outdir(out_dir)
        with _client(server) as client:
            body = _post(client, "/simulations/compare",
                         {"config": config, "scenarios": wanted})
        rows = [{c: run_["metrics"][c] for c in COMPARE_COLUMNS}
                for run_ in body["runs"]]
        _write_csv(os.path.join(out_dir, "compare.csv"), COMPARE_COLUMNS, rows)
    except CliFailure as failure:
        click.echo(failure.message, err=True)
        sys.exit(failure.code)
    click.echo(f"wrote compare.csv to {out_dir}")


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve(host: str, port: int) -> None:
    """Start the HTTP service."""
    import uvicorn

    uvicorn.run("satreuse.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
