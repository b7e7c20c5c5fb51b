"""Truncated dynamical zeta function, its leading zero and the pressure derivative.

With weights g^(p)(x) = exp(s * S_p psi(x)) / |(f^p)'(x)| summed over the
fixed points of f^p, the inverse zeta function is

    1/zeta(s, z) = exp(-sum_p a_p z**p),   a_p = (1/p) sum_{f^p x = x} g^(p)(x).

Its smallest positive zero is 1/lambda(s) with lambda the leading eigenvalue
of the weighted transfer operator, and d/ds log lambda at s = 0 is the mean
of psi under the invariant density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq

from .errors import HypothesisViolation, NumericalFailure
from .orbits import MAX_PERIOD, PeriodicTable, periodic_table
from .unimodal import MapDescriptor, Observable

DEFAULT_ORDER = 16
FALLBACK_RADIUS = 1.2
SIMPLE_ZERO_MIN_SLOPE = 1e-4


@dataclass(frozen=True)
class TraceSums:
    order: int
    s: float
    values: np.ndarray  # a_1 .. a_P
    derivative: np.ndarray | None = None  # d a_p / ds

    @property
    def has_derivative(self):
        return self.derivative is not None


@dataclass(frozen=True)
class PowerSeries:
    coefficients: np.ndarray  # d_0 .. d_P of 1/zeta
    s_derivative: np.ndarray | None = None

    @property
    def order(self):
        return self.coefficients.size - 1

    def __call__(self, z):
        return P.polyval(z, self.coefficients)

    def derivative(self, z):
        return P.polyval(z, P.polyder(self.coefficients))

    def truncate(self, order):
        sd = None if self.s_derivative is None else self.s_derivative[: order + 1]
        return PowerSeries(self.coefficients[: order + 1], sd)


@dataclass(frozen=True)
class LeadingZero:
    z0: float
    residual: float
    slope: float
    simple: bool

    @property
    def eigenvalue(self):
        return 1.0 / self.z0


def _birkhoff_psi(table: PeriodicTable, m, psi: Observable):
    if psi.kind == "log-abs-derivative":
        return table.log_abs_multiplier
    x = np.where(table.valid, table.points, 0.0)
    vals = np.where(table.valid, P.polyval(x, psi.coefficients), np.nan)
    return table.birkhoff(vals)


def trace_sum(m: MapDescriptor, t, psi: Observable, s, p, *, table=None,
              with_derivative=False):
    """Sum over the fixed points of f_t^p of exp(s S_p psi) / |(f_t^p)'|.

    With ``with_derivative`` also returns the exact s-derivative of that sum.
    """
    if table is None:
        table = periodic_table(m, t, p)
    if table.p != p:
        raise ValueError("table period does not match p")
    ok = table.valid
    if not np.any(ok):
        raise NumericalFailure(f"no periodic points of period {p}")
    birk = _birkhoff_psi(table, m, psi)[ok]
    logw = s * birk - table.log_abs_multiplier[ok]
    w = np.exp(logw)
    value = float(np.sum(w))
    if with_derivative:
        return value, float(np.sum(birk * w))
    return value


def trace_sums(m: MapDescriptor, t, psi: Observable, s, order, *, tables=None,
               with_derivative=True) -> TraceSums:
    """a_p and d a_p/ds for p = 1..order. ``tables`` maps p -> PeriodicTable."""
    if not 1 <= order <= MAX_PERIOD:
        raise ValueError(f"order must be in 1..{MAX_PERIOD}")
    vals = np.empty(order)
    ders = np.empty(order)
    for p in range(1, order + 1):
        table = tables[p] if tables is not None and p in tables else periodic_table(m, t, p)
        v, d = trace_sum(m, t, psi, s, p, table=table, with_derivative=True)
        vals[p - 1] = v / p
        ders[p - 1] = d / p
    return TraceSums(order, float(s), vals, ders if with_derivative else None)


def inverse_zeta_series(traces: TraceSums, order=None) -> PowerSeries:
    """Coefficients of exp(-sum a_p z**p) up to z**order.

    Uses k d_k = -sum_{p<=k} p a_p d_{k-p}; the s-derivative follows from
    d/ds exp(-A) = -(dA/ds) exp(-A).
    """
    order = traces.order if order is None else order
    if order > traces.order:
        raise ValueError("not enough trace sums for the requested order")
    a = traces.values
    d = np.zeros(order + 1)
    d[0] = 1.0
    for k in range(1, order + 1):
        p = np.arange(1, k + 1)
        d[k] = -np.dot(p * a[:k], d[k - p]) / k
    sd = None
    if traces.derivative is not None:
        da = traces.derivative
        sd = np.zeros(order + 1)
        for k in range(1, order + 1):
            p = np.arange(1, k + 1)
            sd[k] = -np.dot(da[:k], d[k - p])
    return PowerSeries(d, sd)


def leading_zero(d: PowerSeries, radius=FALLBACK_RADIUS, seed=None, n_scan=4096) -> LeadingZero:
    """Smallest positive real zero of the truncated 1/zeta inside ``radius``.

    A sign-change scan brackets the first zero (``seed``, if given, only
    starts the Newton polish); the zero is then refined by Newton.
    """
    if d.coefficients[0] != 1.0:
        raise ValueError("series must start with d_0 = 1")
    zs = np.linspace(0.0, radius, n_scan + 1)
    vals = d(zs)
    change = np.flatnonzero(np.sign(vals[1:]) != np.sign(vals[:-1]))
    if change.size == 0:
        touch = _touching_zero(d, zs, vals)
        if touch is not None:
            return touch
        raise NumericalFailure(f"no zero of 1/zeta in (0, {radius}); truncation too coarse?")
    k = int(change[0])
    a, b = zs[k], zs[k + 1]
    if vals[k + 1] == 0:
        z = b
    else:
        z = brentq(d, a, b, xtol=1e-15, rtol=1e-15)
    if seed is not None and a <= seed <= b:
        z = float(seed)
    for _ in range(20):
        step = d(z) / d.derivative(z)
        z_new = z - step
        if not a <= z_new <= b:
            break
        z = z_new
        if abs(step) <= 1e-16:
            break
    slope = float(d.derivative(z))
    simple = abs(slope) >= SIMPLE_ZERO_MIN_SLOPE
    return LeadingZero(float(z), float(abs(d(z))), slope, simple)


def _touching_zero(d: PowerSeries, zs, vals, tol=1e-10):
    """A zero of even multiplicity shows no sign change: look for a local
    minimum of |d| that reaches zero and report it as non-simple."""
    dv = d.derivative(zs)
    turns = np.flatnonzero(np.sign(dv[1:]) != np.sign(dv[:-1]))
    for k in turns:
        z = brentq(d.derivative, zs[k], zs[k + 1], xtol=1e-15)
        if abs(d(z)) <= tol:
            return LeadingZero(float(z), float(abs(d(z))), float(d.derivative(z)), False)
    return None


def pressure_s_derivative(m: MapDescriptor, t, psi: Observable, order=DEFAULT_ORDER, *,
                          radius=FALLBACK_RADIUS, tables=None, seed=None):
    """d/ds log lambda(s) at s = 0 from the implicit function theorem on 1/zeta.

    Returns ``(value, LeadingZero)``.
    """
    traces = trace_sums(m, t, psi, 0.0, order, tables=tables)
    series = inverse_zeta_series(traces)
    zero = leading_zero(series, radius, seed=seed)
    if not zero.simple:
        raise HypothesisViolation(
            f"leading zero z0={zero.z0:.6g} is not simple (slope {zero.slope:.3g})"
        )
    dz_ds = -P.polyval(zero.z0, series.s_derivative) / zero.slope
    return -dz_ds / zero.z0, zero


def leading_eigenvalue(m: MapDescriptor, t, psi: Observable, s, order=DEFAULT_ORDER, *,
                       radius=FALLBACK_RADIUS, tables=None):
    """lambda(s) = 1/z0 from the truncated zeta function."""
    traces = trace_sums(m, t, psi, s, order, tables=tables, with_derivative=False)
    return leading_zero(inverse_zeta_series(traces), radius).eigenvalue


def truncation_zeros(series: PowerSeries, radius=FALLBACK_RADIUS, start=4):
    """Leading zero of every truncation order ``start..order``."""
    return np.array([
        leading_zero(series.truncate(k), radius).z0 for k in range(start, series.order + 1)
    ])


def adaptive_order(series: PowerSeries, tol=1e-8, radius=FALLBACK_RADIUS, start=4):
    """Smallest order whose zero moved less than ``tol`` from the previous one
    (or the full order if that never happens)."""
    zeros = truncation_zeros(series, radius, start)
    steps = np.abs(np.diff(zeros))
    hit = np.flatnonzero(steps < tol)
    return int(start + 1 + hit[0]) if hit.size else series.order
