"""Command-line front end: a thin HTTP client of the opcert service.

Without ``--server`` the CLI talks to an in-process instance of the app over
an ASGI transport (full request/response semantics, no socket); with
``--server URL`` the same requests go to a remote service.

Exit codes: 0 = PositiveUpTo, 1 = NonPositive, 2 = usage/config error,
3 = engine failure.
"""

from __future__ import annotations

import asyncio
import base64
import json
import sys
from pathlib import Path

import click
import httpx

EXIT_POSITIVE = 0
EXIT_NON_POSITIVE = 1
EXIT_USAGE = 2
EXIT_ENGINE = 3


def _post(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            return client.post(path, json=payload)

    async def _go() -> httpx.Response:
        from .service.app import app
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport, base_url="http://opcert.local",
                                     timeout=None) as client:
            return await client.post(path, json=payload)

    return asyncio.run(_go())


def _body_or_exit(resp: httpx.Response) -> dict:
    if resp.status_code < 400:
        return resp.json()
    try:
        detail = resp.json().get("detail")
    except json.JSONDecodeError:
        detail = resp.text
    click.echo(f"error: {detail}", err=True)
    sys.exit(EXIT_USAGE if resp.status_code < 500 else EXIT_ENGINE)


def _load_config(path: str) -> dict:
    from pydantic import ValidationError

    from .config import load_config
    try:
        return load_config(path).model_dump()
    except (OSError, ValueError, ValidationError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_USAGE)


def _parse_range(text: str) -> tuple[float, float, int]:
    try:
        lo, hi, n = text.split(":")
        return float(lo), float(hi), int(n)
    except ValueError:
        raise click.UsageError(f"--range must be lo:hi:count, got {text!r}")


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        nx, np_ = text.split(":")
        return int(nx), int(np_)
    except ValueError:
        raise click.UsageError(f"--grid must be nx:np, got {text!r}")


server_option = click.option("--server", default=None, metavar="URL",
                             help="Base URL of a running opcert service "
                                  "(default: in-process engine).")
seed_option = click.option("--seed", default=0, show_default=True,
                           help="Recorded in output headers; the pipeline is deterministic.")


@click.group()
def main():
    """Positivity certification for trace-class integral operator kernels."""


@main.command("certify")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--depth", "-k", default=20, show_default=True,
              help="Test e_1..e_depth.")
@click.option("--engine", type=click.Choice(["auto", "band", "nystrom", "both"]),
              default="auto", show_default=True,
              help="Moment route; 'both' cross-validates the engines.")
@click.option("--tol", default=0.0, show_default=True,
              help="Extra sign tolerance added to per-entry error bars.")
@click.option("--grid-size", default=64, show_default=True,
              help="Nystrom quadrature size.")
@click.option("--out", type=click.Path(), default=None,
              help="Also write the certificate text to this file.")
@seed_option
@server_option
def certify_cmd(config, depth, engine, tol, grid_size, out, seed, server):
    """Certify the kernel in CONFIG up to the requested depth."""
    payload = {"kernel": _load_config(config), "depth": depth, "engine": engine,
               "grid_size": grid_size, "tol": tol}
    body = _body_or_exit(_post(server, "/certify", payload))
    click.echo(body["text"], nl=False)
    if out:
        Path(out).write_text(body["text"])
    sys.exit(EXIT_POSITIVE if body["verdict"] == "positive_up_to" else EXIT_NON_POSITIVE)


@main.command("sweep")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--param", required=True,
              help="Swept field: A,B,C,D,E, alpha2..gamma0, or inv_A.")
@click.option("--range", "range_", required=True, metavar="LO:HI:N",
              help="Sweep range and grid count.")
@click.option("--depth", "-k", default=20, show_default=True)
@click.option("--engine", type=click.Choice(["auto", "band", "nystrom", "both"]),
              default="auto", show_default=True)
@click.option("--tol", default=0.0, show_default=True)
@click.option("--grid-size", default=64, show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="CSV output path (default: stdout).")
@seed_option
@server_option
def sweep_cmd(config, param, range_, depth, engine, tol, grid_size, out, seed, server):
    """Sweep one parameter, emit per-point CSV and H_k interval summaries."""
    lo, hi, count = _parse_range(range_)
    payload = {"kernel": _load_config(config), "param": param, "lo": lo, "hi": hi,
               "count": count, "depth": depth, "engine": engine,
               "grid_size": grid_size, "tol": tol, "seed": seed}
    body = _body_or_exit(_post(server, "/sweep", payload))
    if out:
        Path(out).write_text(body["csv"])
        click.echo(body["summary"])
    else:
        click.echo(body["csv"], nl=False)
        click.echo(body["summary"], err=True)


@main.command("spectrum")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("-n", "--count", default=10, show_default=True,
              help="Number of eigenvalues to print.")
@server_option
def spectrum_cmd(config, count, server):
    """Print eps0, eps, r, s and the leading Gaussian eigenvalues as CSV."""
    payload = {"kernel": _load_config(config), "n": count}
    body = _body_or_exit(_post(server, "/spectrum", payload))
    click.echo(body["csv"], nl=False)


@main.command("wigner")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--grid", default="128:256", show_default=True, metavar="NX:NP",
              help="Phase-space grid dimensions.")
@click.option("--window", default=None, type=float,
              help="Half-width of the x window (default: auto from the kernel envelope).")
@click.option("--format", "fmt", type=click.Choice(["csv", "binary"]), default="csv",
              show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="Output path (default: stdout; binary to stdout is refused).")
@server_option
def wigner_cmd(config, grid, window, fmt, out, server):
    """Transform the kernel to W(x,p) and write it as CSV or binary."""
    nx, np_ = _parse_grid(grid)
    payload = {"kernel": _load_config(config), "n_x": nx, "n_p": np_,
               "window": window, "format": fmt}
    body = _body_or_exit(_post(server, "/wigner", payload))
    if fmt == "csv":
        if out:
            Path(out).write_text(body["csv"])
        else:
            click.echo(body["csv"], nl=False)
    else:
        raw = base64.b64decode(body["data_b64"])
        if not out:
            raise click.UsageError("--format binary requires --out")
        Path(out).write_bytes(raw)
    click.echo(f"integral={body['integral']:.12g} imag_residue={body['imag_residue']:.3g}",
               err=True)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve_cmd(host, port):
    """Run the opcert HTTP service."""
    import uvicorn
    uvicorn.run("opcert.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
