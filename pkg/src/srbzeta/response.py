"""The response curve t -> integral of psi d(mu_t), by two methods plus an exact oracle.

zeta:   d/ds log lambda(s) at s = 0 from the truncated periodic-orbit expansion.
ulam:   integral of psi against the leading Ulam eigenvector at s = 0.
oracle: for conjugated families f_t = h_t o f_0 o h_t^-1 the pushforward
        identity gives the integral of psi o h_t against the base density.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import SweepConfig, config_to_dict
from .diagnostics import ce_report
from .errors import ConfigError, HypothesisViolation, NumericalFailure
from .orbits import periodic_table
from .ulam import DensityEstimate, integrate_function, invariant_density, integrate_density
from .unimodal import (
    AnalyticMotion,
    ConjugatedFamily,
    MapDescriptor,
    Observable,
    eval_observable,
    is_chebyshev,
)
from .zeta import FALLBACK_RADIUS, pressure_s_derivative

log = logging.getLogger(__name__)

ARCSINE = "arcsine"
GAUSS_CHEBYSHEV_NODES = 256
METHOD_TOL = 1e-3
LAMBDA_TOL = 1e-3
COLUMNS = ("t", "value_zeta", "value_ulam", "value_oracle", "lambda_zeta", "lambda_ulam")


@dataclass
class ResponseCurve:
    """Rows in ascending t; NaN marks a method that was not run."""

    rows: np.ndarray  # (n, 6) in COLUMNS order
    methods: tuple[str, ...]
    metadata: dict = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    def column(self, name):
        return self.rows[:, COLUMNS.index(name)]

    @property
    def t(self):
        return self.column("t")


@dataclass(frozen=True)
class AnalyticityReport:
    degrees: tuple[int, ...]
    coefficients: tuple[tuple[float, ...], ...]  # ascending powers of t, per degree
    residuals: tuple[float, ...]  # RMS residual per degree
    decay_ratio: float
    verdict: str

    def to_dict(self):
        return {
            "degrees": list(self.degrees),
            "coefficients": [list(c) for c in self.coefficients],
            "residuals": list(self.residuals),
            "decay_ratio": self.decay_ratio,
            "verdict": self.verdict,
        }


def exact_conjugacy_oracle(base_density, motion: AnalyticMotion, psi: Observable, t,
                           m: MapDescriptor | None = None):
    """Integral of psi o h_t against the base invariant density.

    ``base_density`` is ``"arcsine"`` (the closed-form density of 1 - 2x^2,
    integrated by 256-node Gauss-Chebyshev) or a DensityEstimate of f_0.
    ``m`` (the conjugated family) is needed only for psi = log|f_t'|.
    """
    if m is not None and not isinstance(m, ConjugatedFamily):
        raise ConfigError("the conjugacy oracle needs a conjugated family")
    if psi.kind == "log-abs-derivative" and m is None:
        raise ConfigError("log|f_t'| needs the conjugated family")
    motion.check_t(t)

    def composed(x):
        return eval_observable(psi, m, t, motion.h(t, x))

    if isinstance(base_density, str):
        if base_density != ARCSINE:
            raise ConfigError(f"unknown closed-form density {base_density!r}")
        n = GAUSS_CHEBYSHEV_NODES
        x = np.cos((2 * np.arange(1, n + 1) - 1) * np.pi / (2 * n))
        if psi.kind == "log-abs-derivative":
            # f_t'(h_t x) h_t'(x) = h_t'(f_0 x) f_0'(x): the singular part is
            # log|f_0'|, whose arcsine mean is log 2; the rest is smooth
            fx = m.base.f(0.0, x)
            rest = np.log(np.abs(motion.deriv(t, fx))) - np.log(np.abs(motion.deriv(t, x)))
            return float(np.log(2.0) + np.mean(rest))
        return float(np.mean(composed(x)))
    if isinstance(base_density, DensityEstimate):
        cuts = []
        if psi.kind == "log-abs-derivative":
            cuts = [m.base.critical_point(0.0)]
        return integrate_function(base_density, composed, cuts)
    raise ConfigError("base density must be 'arcsine' or a DensityEstimate")


def _threads():
    raw = os.environ.get("RESPONSE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"RESPONSE_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


def _tables(m, t, order, cache, seed):
    key = (m, float(t), "tables")
    tables = cache.get(key) if cache is not None else None
    if tables is None:
        tables = {}
    for p in range(1, order + 1):
        if p not in tables:
            tables[p] = periodic_table(m, t, p, seed=None if seed is None else seed.get(p))
    if cache is not None:
        cache[key] = tables
    return tables


def _density(m, t, n_bins, cache):
    key = (m, float(t), "density", n_bins)
    if cache is not None and key in cache:
        return cache[key]
    out = invariant_density(m, t, n_bins)
    if cache is not None:
        cache[key] = out
    return out


def _point(cfg: SweepConfig, t, force, cache, seed_tables):
    """Everything at one grid point except the zeta zero (which may be seeded)."""
    m = cfg.family
    out = {"t": float(t)}
    need_tables = "zeta" in cfg.methods or not force
    order = max(cfg.P, cfg.diagnostics.get("p_max", 12)) if not force else cfg.P
    tables = _tables(m, t, order, cache, seed_tables) if need_tables else None
    out["tables"] = tables
    if not force:
        try:
            out["report"] = ce_report(
                m, t, n_max=cfg.diagnostics.get("n_max", 40),
                p_max=cfg.diagnostics.get("p_max", 12), eta_n=cfg.diagnostics.get("eta_n", 12),
                safety=cfg.safety, tables=tables,
            )
        except HypothesisViolation as exc:
            raise HypothesisViolation(f"t={t:.6g}: {exc}") from exc
    if "ulam" in cfg.methods:
        lam, dens = _density(m, t, cfg.N, cache)
        out["lambda_ulam"] = lam
        out["value_ulam"] = integrate_density(dens, cfg.observable, m, t)
    if "oracle" in cfg.methods:
        base = ARCSINE if is_chebyshev(m.base) else _density(m.base, 0.0, cfg.N, cache)[1]
        out["value_oracle"] = exact_conjugacy_oracle(base, m.motion, cfg.observable, t, m)
    return out


def response_curve(cfg: SweepConfig, *, force=False, cache=None) -> ResponseCurve:
    """Sweep the grid in the configured order; rows come back in ascending t.

    With continuation on (and one thread), each grid point starts its orbit
    solves and its zeta zero from the neighbouring point. ``cache`` (a dict)
    shares period tables and densities between sweeps of the same family.
    """
    ts = cfg.ts
    threads = _threads()
    points = []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(lambda t: _point(cfg, t, force, cache, None), ts))
    else:
        seed = None
        for t in ts:
            pt = _point(cfg, t, force, cache, seed)
            points.append(pt)
            if cfg.continuation:
                seed = pt["tables"]

    z_seed = None
    rows = []
    flags = []
    for pt in points:
        t = pt["t"]
        row = dict.fromkeys(COLUMNS, np.nan)
        row["t"] = t
        for key in ("value_ulam", "value_oracle", "lambda_ulam"):
            if key in pt:
                row[key] = pt[key]
        if "zeta" in cfg.methods:
            # Theta^-1 bounds the disc where the leading zero is sought
            radius = pt["report"].theta_inv if "report" in pt else FALLBACK_RADIUS
            value, zero = pressure_s_derivative(
                cfg.family, t, cfg.observable, cfg.P, tables=pt["tables"], radius=radius,
                seed=z_seed if cfg.continuation else None,
            )
            z_seed = zero.z0
            row["value_zeta"] = value
            row["lambda_zeta"] = zero.eigenvalue
        rows.append([row[c] for c in COLUMNS])
        flags.extend(_row_flags(row))

    arr = np.array(rows, dtype=float)
    arr = arr[np.argsort(arr[:, 0], kind="stable")]
    lo, hi, count = cfg.grid
    metadata = {
        "version": __version__,
        "config": config_to_dict(cfg),
        "P": cfg.P,
        "N": cfg.N,
        "method_tolerance": METHOD_TOL,
        "lambda_tolerance": LAMBDA_TOL,
        "forced": bool(force),
        "numpy": np.__version__,
    }
    reports = [pt["report"].to_dict() for pt in points if "report" in pt]
    if reports:
        metadata["diagnostics"] = sorted(reports, key=lambda r: r["t"])
    for f in flags:
        log.warning(f)
    return ResponseCurve(arr, tuple(cfg.methods), metadata, flags)


def _row_flags(row):
    flags = []
    t = row["t"]
    vals = {k: row[k] for k in ("value_zeta", "value_ulam", "value_oracle") if np.isfinite(row[k])}
    names = sorted(vals)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if abs(vals[a] - vals[b]) > 10 * METHOD_TOL:
                flags.append(f"t={t:.6g}: {a} and {b} differ by {abs(vals[a] - vals[b]):.3g}")
    for k in ("lambda_zeta", "lambda_ulam"):
        if np.isfinite(row[k]) and abs(row[k] - 1) > LAMBDA_TOL:
            flags.append(f"t={t:.6g}: {k} = {row[k]:.8g} is not 1 within {LAMBDA_TOL}")
    return flags


def analyticity_report(curve: ResponseCurve, max_degree=4, column="value_zeta",
                       max_condition=1e12) -> AnalyticityReport:
    """Least-squares polynomial fits of the curve for degrees 0..max_degree.

    The decay ratio compares the top coefficients in the scaled variable
    u = t / max|t|; a ratio below one, or trailing coefficients at the noise
    floor, is reported as consistent with a real-analytic response.
    """
    t = curve.t
    y = curve.column(column)
    ok = np.isfinite(y)
    t, y = t[ok], y[ok]
    if t.size < max_degree + 3:
        raise ConfigError(f"need at least {max_degree + 3} grid points for degree {max_degree}")
    scale = float(np.max(np.abs(t)))
    if scale == 0 or np.ptp(t) == 0:
        raise NumericalFailure("grid has no spread in t")
    u = t / scale
    coeffs, resid = [], []
    for deg in range(max_degree + 1):
        V = np.vander(u, deg + 1, increasing=True)
        if np.linalg.cond(V) > max_condition:
            raise NumericalFailure(f"degree-{deg} fit is ill-conditioned; widen the grid")
        c, *_ = np.linalg.lstsq(V, y, rcond=None)
        resid.append(float(np.sqrt(np.mean((V @ c - y) ** 2))))
        coeffs.append(c)
    top = coeffs[-1]
    floor = max(resid[-1], np.finfo(float).eps * max(1.0, float(np.max(np.abs(y)))))
    mags = np.abs(top)
    if max_degree >= 2 and mags[-3] > 0:
        decay = float(np.sqrt((mags[-1] + floor) / (mags[-3] + floor)))
    elif max_degree >= 1 and mags[-2] > 0:
        decay = float((mags[-1] + floor) / (mags[-2] + floor))
    else:
        decay = 0.0
    at_floor = mags[-1] <= 10 * floor
    if decay < 1 or at_floor:
        verdict = "consistent with real-analytic response"
    else:
        verdict = "inconclusive: trailing coefficients do not decay"
    physical = tuple(
        tuple(float(v) for v in c / scale ** np.arange(c.size)) for c in coeffs
    )
    return AnalyticityReport(tuple(range(max_degree + 1)), physical, tuple(resid), decay, verdict)
