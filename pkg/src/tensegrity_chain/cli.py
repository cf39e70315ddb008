"""Command-line front end.

Usage:
    tb buckling --model model.json
    tb segment --model model.json --q-min -1 --q-max 1 --format csv
    tb landscape --model model.json --dx 0.1 --pair 1,4 --out results/
    tb sweep --model model.json --dx-max 0.5 --steps 21 --format svg --out results/

Exit codes: 0 success, 2 invalid model, 3 partial domain failure,
4 unreachable target, 5 numerical failure. ``TB_THREADS`` sets the number of
worker processes for sweeps.
"""

from __future__ import annotations

import csv
import functools
import json
import logging
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import plotting, report
from .chain import Deflection
from .equilibria import GridSpec, critical_cells
from .errors import ComplexSpectrum, SingularB, SpecError, SpectrumCountMismatch

log = logging.getLogger(__name__)

FORMATS = ("csv", "json", "svg")


def _load_spec(model_path, overrides) -> dict:
    try:
        if model_path is None:
            doc = {}
        elif model_path == "-":
            doc = json.load(sys.stdin)
        else:
            doc = json.loads(Path(model_path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError("$", f"cannot read model: {exc}") from exc
    if not isinstance(doc, dict):
        raise SpecError("$", "model must be a JSON object")
    return report.validate_model_spec(report.apply_overrides(doc, **overrides))


def model_options(f):
    @click.option("--model", "model_path", type=str, default=None, help="ModelSpec JSON file ('-' for stdin).")
    @click.option("--n", type=int, default=None, help="Override segment count.")
    @click.option("--a", type=float, default=None, help="Override triangle half-height.")
    @click.option("--b", type=float, default=None, help="Override triangle half-length.")
    @click.option("--k", type=float, default=None, help="Override spring stiffness.")
    @click.option("--L0", "L0", type=float, default=None, help="Override spring free length.")
    @click.option("--out", type=click.Path(file_okay=False), default=None, help="Directory for report files.")
    @click.option("--format", "fmt", type=click.Choice(FORMATS), default="json", show_default=True)
    @functools.wraps(f)
    def wrapper(model_path, n, a, b, k, L0, out, fmt, **kwargs):
        return f(model_path=model_path, overrides={"n": n, "a": a, "b": b, "k": k, "L0": L0}, out=out, fmt=fmt, **kwargs)

    return wrapper


def _emit(command, spec, params, result, t0, code, *, columns=None, rows=None, figure=None, out=None, fmt="json"):
    rep = report.make_report(command, spec, params, result, time.perf_counter() - t0, code)
    report.validate_report(rep)
    table = report.to_csv(columns, rows) if columns is not None else None
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        written = [out / f"{command}.json"]
        written[0].write_text(report.dumps(rep))
        if table is not None:
            written.append(out / f"{command}.csv")
            written[-1].write_text(table)
        if fmt == "svg" and figure is not None:
            written.append(out / f"{command}.svg")
            plotting.save(figure(), written[-1])
        for p in written:
            click.echo(str(p))
    elif fmt == "csv" and table is not None:
        click.echo(table, nl=False)
    elif fmt == "svg" and figure is not None:
        click.echo(plotting.svg_text(figure()), nl=False)
    else:
        click.echo(report.dumps(rep), nl=False)
    sys.exit(code)


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
@click.version_option(report.tool_version(), prog_name="tb")
@click.option("-v", "--verbose", count=True)
def main(verbose):
    """Stiffness, equilibria and buckling of dual-triangle tensegrity chains."""
    logging.basicConfig(level=logging.WARNING - 10 * verbose, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@model_options
@click.option("--q-min", type=float, default=-1.0, show_default=True)
@click.option("--q-max", type=float, default=1.0, show_default=True)
@click.option("--q-step", type=float, default=0.01, show_default=True)
@click.option("--segment", "segment_no", type=int, default=1, show_default=True, help="1-based segment number.")
def segment(model_path, overrides, out, fmt, q_min, q_max, q_step, segment_no):
    """Torque-angle and energy curves of one segment."""
    t0 = time.perf_counter()
    try:
        spec = _load_spec(model_path, overrides)
        if not 1 <= segment_no <= spec["n"]:
            raise SpecError("--segment", f"must be in 1..{spec['n']}")
        if not q_step > 0 or not q_max >= q_min:
            raise SpecError("--q-step", "need q_step > 0 and q_max >= q_min")
    except SpecError as exc:
        _fail(report.EXIT_SPEC, str(exc))
    model = report.model_from_spec(spec)
    count = int(np.floor((q_max - q_min) / q_step + 1e-9)) + 1
    qs = q_min + q_step * np.arange(count)
    result, rows, code = report.segment_table(model, qs, segment_no - 1)
    params = {"q_min": q_min, "q_max": q_max, "q_step": q_step, "segment": segment_no}
    _emit("segment", spec, params, result, t0, code, columns=report.SEGMENT_COLUMNS, rows=rows,
          figure=lambda: plotting.segment_figure([r for r in rows if r[-1] == "ok"]), out=out, fmt=fmt)


def _pair(value: str) -> tuple[int, int]:
    try:
        i, j = (int(v) for v in value.split(","))
    except ValueError as exc:
        raise SpecError("--pair", "expected two comma-separated joint numbers, e.g. 1,4") from exc
    if i == j or not (1 <= i <= 4 and 1 <= j <= 4):
        raise SpecError("--pair", "joint numbers must be distinct and in 1..4")
    return i - 1, j - 1


@main.command()
@model_options
@click.option("--dx", type=float, required=True, help="Axial deflection toward the base.")
@click.option("--dy", type=float, default=0.0, show_default=True)
@click.option("--pair", "pair_text", default="1,4", show_default=True, help="Free joint numbers.")
@click.option("--grid", "num", type=int, default=201, show_default=True)
@click.option("--lo", type=float, default=-np.pi / 2)
@click.option("--hi", type=float, default=np.pi / 2)
def landscape(model_path, overrides, out, fmt, dx, dy, pair_text, num, lo, hi):
    """Energy over two free joint angles (n = 4) and its critical points."""
    t0 = time.perf_counter()
    try:
        spec = _load_spec(model_path, overrides)
        if spec["n"] != 4:
            raise SpecError("$.n", "landscape needs n = 4")
        pair = _pair(pair_text)
        grid = GridSpec(lo, hi, num)
    except ValueError as exc:
        _fail(report.EXIT_SPEC, str(exc))
    except SpecError as exc:
        _fail(report.EXIT_SPEC, str(exc))
    model = report.model_from_spec(spec)
    target = Deflection(dx, dy)
    result, rows, land, code = report.landscape_table(model, target, pair, grid)
    if code == report.EXIT_UNREACHABLE:
        click.echo(f"error: deflection {tuple(target)} is not reachable on this grid", err=True)
    params = {"dx": dx, "dy": dy, "pair": [pair[0] + 1, pair[1] + 1], "grid": num, "lo": lo, "hi": hi}
    _emit("landscape", spec, params, result, t0, code, columns=report.LANDSCAPE_COLUMNS, rows=rows,
          figure=lambda: plotting.landscape_figure(land, critical_cells(land)), out=out, fmt=fmt)


def _read_path(path_file) -> list[tuple[float, float]]:
    try:
        with open(path_file, newline="") as fh:
            reader = csv.DictReader(fh)
            return [(float(r["dx"]), float(r.get("dy") or 0.0)) for r in reader]
    except (OSError, KeyError, ValueError) as exc:
        raise SpecError("--path", f"cannot read deflection path: {exc}") from exc


@main.command()
@model_options
@click.option("--dx-max", type=float, default=0.5, show_default=True)
@click.option("--steps", type=int, default=21, show_default=True)
@click.option("--dy", type=float, default=0.0, show_default=True)
@click.option("--path", "path_file", type=click.Path(dir_okay=False), default=None,
              help="CSV with dx[,dy] columns; overrides --dx-max/--steps/--dy.")
def sweep(model_path, overrides, out, fmt, dx_max, steps, dy, path_file):
    """Force-deflection curve of the globally stable equilibrium."""
    t0 = time.perf_counter()
    try:
        spec = _load_spec(model_path, overrides)
        if spec["n"] < 2:
            raise SpecError("$.n", "sweep needs n >= 2")
        if path_file is not None:
            path = _read_path(path_file)
        else:
            if steps < 1:
                raise SpecError("--steps", "must be >= 1")
            path = [(float(d), dy) for d in np.linspace(0.0, dx_max, steps)]
        if not path:
            raise SpecError("--path", "empty deflection path")
    except SpecError as exc:
        _fail(report.EXIT_SPEC, str(exc))
    model = report.model_from_spec(spec)
    workers = max(1, int(os.environ.get("TB_THREADS", "1") or 1))
    result, rows, _, code = report.sweep_table(model, path, workers=workers)
    if rows and all(r[-1] != "ok" for r in rows):
        code = report.EXIT_UNREACHABLE
    params = {"path": [list(p) for p in path]}
    _emit("sweep", spec, params, result, t0, code, columns=report.SWEEP_COLUMNS, rows=rows,
          figure=lambda: plotting.sweep_figure(rows, result["Fx0"]), out=out, fmt=fmt)


@main.command()
@model_options
def buckling(model_path, overrides, out, fmt):
    """Critical force and post-buckling modes of the straight chain."""
    t0 = time.perf_counter()
    try:
        spec = _load_spec(model_path, overrides)
        if spec["n"] < 2:
            raise SpecError("$.n", "buckling needs n >= 2")
        if spec.get("segments"):
            raise SpecError("$.segments", "buckling needs identical symmetric segments")
    except SpecError as exc:
        _fail(report.EXIT_SPEC, str(exc))
    model = report.model_from_spec(spec)
    try:
        payload = report.buckling_payload(model)
    except (SpectrumCountMismatch, ComplexSpectrum, SingularB) as exc:
        _fail(report.EXIT_NUMERICAL, f"{type(exc).__name__}: {exc}")
    except ValueError as exc:
        _fail(report.EXIT_NUMERICAL, str(exc))
    n = model.n
    columns = ["mode", "eigenvalue", "critical_force", "mu_x", "mu_eq", "shape_positive", "shape_negative"]
    columns += [f"alpha_{i + 1}" for i in range(n + 1)]
    rows = [
        [i + 1, m["eigenvalue"], m["critical_force"], m["mu_x"], m["mu_eq"], m["shape_positive"], m["shape_negative"]]
        + list(m["alpha"])
        for i, m in enumerate(payload["modes"])
    ]
    _emit("buckling", spec, {}, payload, t0, report.EXIT_OK, columns=columns, rows=rows,
          figure=lambda: plotting.buckling_figure(model, payload), out=out, fmt=fmt)


if __name__ == "__main__":
    main()
