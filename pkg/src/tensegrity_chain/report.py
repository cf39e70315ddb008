"""Model descriptions in, report payloads and CSV tables out.

Everything here is deterministic for fixed inputs; the only run-dependent
values (duration, exit code) live under the report's ``run`` key.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from typing import Any, Sequence

import jsonschema
import numpy as np
import referencing

from . import __version__, chain, segment
from .buckling import lateral_force_coefficient, solve_buckling
from .chain import ChainModel, Deflection
from .equilibria import (
    GridSpec,
    classify,
    critical_cells,
    energy_landscape,
    find_equilibria,
    landscape_minima,
    force_deflection_sweep,
    solve_equilibrium,
)
from .errors import DegenerateConfiguration, Indeterminate, SpecError, TensegrityError
from .numerics import MERGE_RADIUS
from .segment import SegmentGeometry, SpringControl
from .shapes import shape_label

SCHEMA_VERSION = "1"
TOOL = "tensegrity-chain"

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_PARTIAL = 3
EXIT_UNREACHABLE = 4
EXIT_NUMERICAL = 5

SEGMENT_COLUMNS = ["q", "M", "dM_dq", "E", "L1", "L2", "status"]
LANDSCAPE_COLUMNS = ["q_i", "q_j", "E", "feasible", "branch"]
SWEEP_COLUMNS = ["dx", "dy", "Fx", "Fy", "E", "shape", "stability", "status"]
STABILITY_NAMES = ("StableMinimum", "Saddle", "Maximum")


def tool_version() -> str:
    return __version__


def load_schema(name: str) -> dict:
    text = resources.files(__package__).joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _registry() -> referencing.Registry:
    resources_ = [
        referencing.Resource.from_contents(load_schema(n)) for n in ("model_spec", "report")
    ]
    return referencing.Registry().with_resources((r.id(), r) for r in resources_)


def _path(error: jsonschema.ValidationError) -> str:
    parts = ["$"]
    for p in error.absolute_path:
        parts.append(f"[{p}]" if isinstance(p, int) else f".{p}")
    return "".join(parts)


def validate_model_spec(doc: Any) -> dict:
    """Check a model description and return a normalized copy.

    Raises:
        SpecError: with the JSON path of the first offending field.
    """
    validator = jsonschema.Draft202012Validator(load_schema("model_spec"))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise SpecError(_path(e), e.message)
    doc = copy.deepcopy(doc)
    for idx, seg in enumerate(doc.get("segments", [])):
        if seg["index"] >= doc["n"]:
            raise SpecError(f"$.segments[{idx}].index", f"{seg['index']} is out of range for n={doc['n']}")
    indices = [s["index"] for s in doc.get("segments", [])]
    if len(set(indices)) != len(indices):
        raise SpecError("$.segments", "duplicate segment index")
    try:
        model_from_spec(doc)
    except ValueError as exc:
        raise SpecError("$", str(exc)) from exc
    return doc


def apply_overrides(doc: dict, **overrides) -> dict:
    doc = dict(doc)
    for key, value in overrides.items():
        if value is not None:
            doc[key] = value
    return doc


def model_from_spec(doc: dict) -> ChainModel:
    n = doc["n"]
    springs = [SpringControl.symmetric(doc["k"], doc["L0"]) for _ in range(n)]
    for seg in doc.get("segments", []):
        base = springs[seg["index"]]
        springs[seg["index"]] = SpringControl(
            seg.get("k1", base.k1), seg.get("L1_0", base.L1_0), seg.get("k2", base.k2), seg.get("L2_0", base.L2_0)
        )
    return ChainModel(n, SegmentGeometry(doc["a"], doc["b"]), tuple(springs))


def _clean(x):
    """JSON-safe plain Python values (NaN/inf become null)."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if hasattr(x, "value"):
        return x.value
    return x


def make_report(command: str, spec: dict, parameters: dict, result: dict, duration: float, exit_code: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": TOOL,
        "version": tool_version(),
        "command": command,
        "model": _clean(spec),
        "parameters": _clean(parameters),
        "result": _clean(result),
        "run": {"duration_s": max(float(duration), 0.0), "exit_code": int(exit_code)},
    }


def validate_report(report: dict) -> None:
    validator = jsonschema.Draft202012Validator(load_schema("report"), registry=_registry())
    validator.validate(report)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else f"{float(v):.17g}"
    return str(v)


def to_csv(columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# -- command payloads -----------------------------------------------------------


def segment_table(model: ChainModel, qs, index: int = 0):
    """Torque/energy table for one segment; returns ``(result, rows, exit_code)``."""
    geom, springs = model.geom, model.springs[index]
    rows = []
    degenerate = 0
    for q in np.asarray(qs, dtype=float):
        try:
            L1, L2 = segment.spring_lengths(geom, q)
            M = segment.segment_torque(geom, springs, q)
            dM = segment.torque_derivative(geom, springs, q) if springs.is_symmetric else math.nan
            E = segment.segment_energy(geom, springs, q)
            rows.append([q, M, dM, E, L1, L2, "ok"])
        except DegenerateConfiguration:
            degenerate += 1
            rows.append([q, math.nan, math.nan, math.nan, math.nan, math.nan, "degenerate"])
    result: dict[str, Any] = {
        "segment_index": index,
        "degenerate_rows": degenerate,
        "rows": len(rows),
        "q_limit": geom.q_limit,
        "monotonicity_margin": None,
        "K_eq": None,
    }
    if springs.is_symmetric:
        result["monotonicity_margin"] = segment.monotonicity_margin(geom, springs)
        result["K_eq"] = segment.equivalent_stiffness(geom, springs)
        result["monotonic"] = result["monotonicity_margin"] > 0
    return result, rows, (EXIT_PARTIAL if degenerate else EXIT_OK)


def _equilibrium_dict(model: ChainModel, q, F, target) -> dict | None:
    try:
        stability, w = classify(model, q, F)
    except Indeterminate:
        return None
    return {
        "q": q,
        "Fx": F[0],
        "Fy": F[1],
        "energy": chain.total_energy(model, q),
        "stability": stability.value,
        "shape": shape_label(q).value,
        "hessian_eigenvalues": w,
        "residual": float(np.max(np.abs(chain.equilibrium_residual(model, q, F, target)))),
    }


def landscape_table(model: ChainModel, target: Deflection, pair: tuple[int, int], grid: GridSpec):
    """Landscape grid rows plus refined critical points; ``(result, rows, landscape, exit_code)``."""
    land = energy_landscape(model, target, pair, grid)
    header = {
        "pair": [pair[0] + 1, pair[1] + 1],
        "target": {"dx": target.dx, "dy": target.dy},
        "grid": {"lo": grid.lo, "hi": grid.hi, "num": grid.num},
    }
    if not land.feasible.any():
        empty = {"feasible_cells": 0, "critical_cells": [], "critical_points": [], "counts": {s: 0 for s in STABILITY_NAMES}}
        return {**header, **empty}, [], land, EXIT_UNREACHABLE
    E, br, feas = land.energy, land.branch, land.feasible
    rows = []
    for a, qi in enumerate(land.axis_i):
        for c, qj in enumerate(land.axis_j):
            rows.append([qi, qj, E[a, c], bool(feas[a, c]), int(br[a, c])])
    cells = critical_cells(land)
    points: list[dict] = []
    if target.dx == 0 and target.dy == 0:
        # the straight chain is the only feasible point, so there is no grid neighbourhood to inspect
        eq = find_equilibria(model, target)[0]
        points.append({
            "q": eq.q, "Fx": 0.0, "Fy": 0.0, "energy": eq.energy, "stability": eq.stability.value,
            "shape": eq.shape.value, "hessian_eigenvalues": [], "residual": 0.0,
        })
    seeds = [cell.q for cell in cells]
    if not points:
        # minima close to the inverse-kinematics fold escape grid detection, so seed them by multistart too
        seeds += landscape_minima(model, target, pair)
    for q0 in seeds:
        try:
            q, F = solve_equilibrium(model, target, q0)
        except TensegrityError:
            continue
        if any(np.linalg.norm(q - p["q"]) <= MERGE_RADIUS for p in points):
            continue
        d = _equilibrium_dict(model, q, F, target)
        if d is not None:
            points.append(d)
    points.sort(key=lambda p: (round(p["energy"], 10), p["q"][0]))
    result = {
        **header,
        "feasible_cells": int(feas.sum()),
        "critical_cells": [
            {"kind": c.kind, "branch": c.branch, "index": list(c.index), "q": c.q, "energy": c.energy} for c in cells
        ],
        "critical_points": points,
        "counts": {
            s: sum(p["stability"] == s for p in points) for s in STABILITY_NAMES
        },
    }
    return result, rows, land, EXIT_OK


def _sweep_point(args):
    model, target, n_random = args
    return force_deflection_sweep(model, [target], n_random=n_random)[0]


def sweep_table(model: ChainModel, path: Sequence[Sequence[float]], *, workers: int = 1, n_random: int = 24):
    """Force-deflection table; ``(result, rows, sweep_rows, exit_code)``.

    With ``workers > 1`` points are solved independently in a process pool
    (no continuation seeding); output order always follows ``path``.
    """
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            srows = list(pool.map(_sweep_point, [(model, tuple(p), n_random) for p in path]))
    else:
        srows = force_deflection_sweep(model, path, n_random=n_random)
    rows = []
    gaps = 0
    for r in srows:
        if r.load is None:
            gaps += 1
            rows.append([r.deflection.dx, r.deflection.dy, math.nan, math.nan, math.nan, "", "", r.status])
        else:
            rows.append([r.deflection.dx, r.deflection.dy, r.load.Fx, r.load.Fy, r.energy, r.shape, r.stability, r.status])
    try:
        Fx0 = solve_buckling(model).Fx0
    except (ValueError, TensegrityError):
        Fx0 = None
    result = {"rows": len(rows), "gaps": gaps, "Fx0": Fx0}
    return result, rows, srows, (EXIT_PARTIAL if gaps else EXIT_OK)


def buckling_payload(model: ChainModel) -> dict:
    sol = solve_buckling(model)
    signed = solve_buckling(model, signed=True)
    modes = []
    for m in sol.modes:
        modes.append(
            {
                "eigenvalue": m.eigenvalue,
                "critical_force": -1.0 / m.eigenvalue,
                "alpha": m.alpha,
                "mu_x": m.mu_x,
                "mu_eq": m.mu_eq,
                "shape_positive": m.shape[0],
                "shape_negative": m.shape[1],
                "fy_coefficient": m.fy_coefficient,
                "lateral_force_coefficient": lateral_force_coefficient(m, model.b),
            }
        )
    return {
        "n": model.n,
        "K_eq": sol.K_eq,
        "K_eq_magnitude": abs(sol.K_eq),
        "K_eq_used": sol.K_eq_used,
        "Fx0": sol.Fx0,
        "compressive_force": abs(sol.Fx0),
        "eigenvalues": sol.eigenvalues,
        "signed_eigenvalues": signed.eigenvalues,
        "nonzero_mode_count": len(sol.modes),
        "expected_mode_count": model.n - 1 if model.n >= 3 else None,
        "modes": modes,
        "stable_mode": int(np.argmin([m.mu_eq for m in sol.modes])),
    }
