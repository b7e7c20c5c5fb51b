"""CSV and JSON writers. Floats are written with repr so files round-trip exactly."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .response import COLUMNS, ResponseCurve

CURVE_HEADER = "# srb-zeta v1, " + ",".join(COLUMNS)


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj):
    return json.dumps(_to_jsonable(obj), indent=2, sort_keys=True)


def write_json(path, obj):
    Path(path).write_text(dumps(obj) + "\n")


def write_rows(path, header, rows):
    lines = [header]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def write_curve_csv(path, curve: ResponseCurve):
    write_rows(path, CURVE_HEADER, curve.rows)


def read_curve_csv(path):
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CURVE_HEADER:
        raise ValueError(f"{path}: not a srb-zeta v1 curve file")
    return np.array([[float(v) for v in ln.split(",")] for ln in lines[1:] if ln], dtype=float)


def write_orbits_csv(path, orbits, t):
    """One cycle per line; point columns padded to the longest period."""
    width = max((o.period for o in orbits), default=1)
    header = "t,period,itinerary,multiplier,residual," + ",".join(f"x{k}" for k in range(width))
    lines = [header]
    for o in orbits:
        pts = [repr(float(x)) for x in o.points] + [""] * (width - o.period)
        lines.append(",".join([repr(float(t)), str(o.period), o.itinerary.word,
                               repr(float(o.multiplier)), repr(float(o.residual))] + pts))
    Path(path).write_text("\n".join(lines) + "\n")


def write_density_csv(path, density):
    write_rows(path, "bin_center,density", zip(density.centers, density.values))


def eigen_record(density, lam, iterations):
    return {"N": density.n_bins, "s": density.s, "t": density.t, "lambda": lam,
            "iterations": iterations}


def write_zeta_csv(path, traces, series):
    rows = []
    for p in range(1, traces.order + 1):
        da = traces.derivative[p - 1] if traces.derivative is not None else np.nan
        rows.append((p, traces.values[p - 1], da, series.coefficients[p]))
    write_rows(path, "p,a_p,da_p_ds,d_p", rows)


def write_ce_csv(path, reports):
    write_rows(path, "t,lambda_c,lambda_per,lambda_eta,theta_inv", [r.row() for r in reports])
