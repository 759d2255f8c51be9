"""Command-line interface.

``validate``, ``score`` and ``serve`` work on local files; the query
commands (``heatmap``, ``benchmark``, ``forecast``, ``correlate``) are thin
clients against a running server. Exit codes: 0 ok, 1 validation problem,
2 I/O problem, 64 usage error.
"""

from __future__ import annotations

import csv
import io
import json
import sys

import click
import httpx

from .catalog import CatalogError, ValidationError, load_catalog, validate_catalog
from .snapshot import PipelineError, SnapshotStore, load_snapshot, run_pipeline, save_snapshot

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_USAGE = 64

DEFAULT_SERVER = "http://127.0.0.1:8000"

format_option = click.option(
    "--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
    show_default=True, help="output format")
server_option = click.option(
    "--server", default=DEFAULT_SERVER, show_default=True, envvar="THC_SERVER",
    help="base URL of a running thc server")


class QueryFailed(Exception):
    def __init__(self, exit_code: int, message: str):
        self.exit_code = exit_code
        super().__init__(message)


def _fetch(server: str, path: str, params: dict) -> dict:
    try:
        response = httpx.get(server.rstrip("/") + path, params=params, timeout=30.0)
    except httpx.HTTPError as exc:
        raise QueryFailed(EXIT_IO, f"cannot reach server {server}: {exc}") from exc
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise QueryFailed(EXIT_VALIDATION, f"server rejected request: {detail}")
    return response.json()


def _csv_line(writer_rows: list[list], header: list[str]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(writer_rows)
    return buffer.getvalue()


def _emit_json(payload) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


@click.group()
def cli() -> None:
    """Health scoring for IT operations data."""


@cli.command()
@click.option("--catalog", "catalog_path", required=True,
              type=click.Path(dir_okay=False))
def validate(catalog_path: str) -> None:
    """Check a catalog file; lists every violation."""
    with open(catalog_path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        catalog = load_catalog(text)
    except ValidationError as exc:
        click.echo(f"{len(exc.findings)} findings")
        for finding in exc.findings:
            click.echo(f"  [{finding.entity_id}/{finding.rule_id}] {finding.message}")
        sys.exit(EXIT_VALIDATION)
    report = validate_catalog(catalog)
    click.echo(f"{len(report.findings)} findings")


@cli.command()
@click.option("--data", "data_dir", required=True,
              type=click.Path(file_okay=False))
@click.option("--catalog", "catalog_path", required=True,
              type=click.Path(dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def score(data_dir: str, catalog_path: str, out_path: str) -> None:
    """Run the full pipeline and write a snapshot file."""
    snapshot = run_pipeline(data_dir, catalog_path)
    save_snapshot(snapshot, out_path)
    click.echo(
        f"snapshot written to {out_path}: {len(snapshot.accounts)} accounts, "
        f"{len(snapshot.periods)} months, {len(snapshot.kpi_scores)} KPI scores")


@cli.command()
@click.option("--account", required=True)
@click.option("--period", required=True)
@format_option
@server_option
def heatmap(account: str, period: str, fmt: str, server: str) -> None:
    """Drill-down health tree for an account and month."""
    tree = _fetch(server, f"/accounts/{account}/heatmap", {"period": period})
    if fmt == "json":
        _emit_json(tree)
        return
    rows: list[list] = []

    def walk(node: dict, path: str) -> None:
        label = f"{path}/{node['label']}" if path else node["label"]
        rows.append([label, node["score"], node["band"], node["trend"]])
        for child in node["children"]:
            walk(child, label)

    walk(tree, "")
    click.echo(_csv_line(rows, ["path", "score", "band", "trend"]), nl=False)


@cli.command()
@click.option("--kpi", required=True)
@click.option("--account", required=True)
@click.option("--period", required=True)
@format_option
@server_option
def benchmark(kpi: str, account: str, period: str, fmt: str, server: str) -> None:
    """Account score against the other accounts' min/median/max."""
    stats = _fetch(server, f"/kpis/{kpi}/benchmark",
                   {"account": account, "period": period})
    if fmt == "json":
        _emit_json(stats)
        return
    header = ["kpi_id", "period", "account_id", "account_value", "cohort_min",
              "cohort_median", "cohort_max", "cohort_size", "below_min"]
    click.echo(_csv_line([[stats[k] for k in header]], header), nl=False)


@cli.command()
@click.option("--kpi", required=True)
@click.option("--account", required=True)
@click.option("--method", type=click.Choice(["ma", "ar", "es"]), default="ma",
              show_default=True)
@click.option("--window", type=int, default=3, show_default=True,
              help="moving-average window")
@click.option("--order", type=int, default=1, show_default=True,
              help="autoregression order")
@click.option("--alpha", type=float, default=0.3, show_default=True,
              help="exponential smoothing factor")
@format_option
@server_option
def forecast(kpi: str, account: str, method: str, window: int, order: int,
             alpha: float, fmt: str, server: str) -> None:
    """Next month's predicted score with its backtest error."""
    result = _fetch(server, f"/kpis/{kpi}/forecast",
                    {"account": account, "method": method, "window": window,
                     "order": order, "alpha": alpha})
    if fmt == "json":
        _emit_json(result)
        return
    header = ["kpi_id", "account_id", "method", "predicted", "backtest_mae"]
    row = [result[k] if result[k] is not None else "" for k in header]
    click.echo(_csv_line([row], header), nl=False)


@cli.command()
@click.option("--account", required=True)
@click.option("--mode", type=click.Choice(["rsquared", "residual"]),
              default="rsquared", show_default=True)
@click.option("--window", type=int, default=6, show_default=True,
              help="months of history per series")
@format_option
@server_option
def correlate(account: str, mode: str, window: int, fmt: str, server: str) -> None:
    """Pairwise KPI correlations for an account."""
    payload = _fetch(server, f"/accounts/{account}/correlations",
                     {"mode": mode, "window": window})
    if fmt == "json":
        _emit_json(payload)
        return
    header = ["kpi_a", "kpi_b", "mode", "score", "strongly_related"]
    rows = [[c[k] for k in header] for c in payload["correlations"]]
    click.echo(_csv_line(rows, header), nl=False)


@cli.command()
@click.option("--snapshot", "snapshot_path", required=True,
              type=click.Path(dir_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(snapshot_path: str, host: str, port: int) -> None:
    """Serve a snapshot over HTTP."""
    import uvicorn

    from .api import create_app

    store = SnapshotStore(load_snapshot(snapshot_path))
    uvicorn.run(create_app(store), host=host, port=port, log_level="info")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_VALIDATION
    except click.exceptions.Abort:
        return EXIT_USAGE
    except QueryFailed as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    except (ValidationError, CatalogError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_VALIDATION
    except PipelineError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_IO
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_IO
    except SystemExit as exc:
        code = exc.code
        return int(code) if isinstance(code, int) else EXIT_OK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
