"""Hyperbolicity diagnostics: lambda_c, lambda_per, lambda_eta and the Theta bound.

All three constants are measured at finite depth:

* lambda_c from the growth of |(f^n)'(f(c))| along the critical orbit,
* lambda_per from the smallest |multiplier|^(1/p) over all cycles up to p_max,
* lambda_eta from the largest monotone branch of f^n, |eta_n|^(-1/n).

The Theta bound is Theta^-1 = safety * min(lambda_eta, sqrt(min(lambda_c, lambda_per))).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import HypothesisViolation, NumericalFailure
from .orbits import (
    MAX_PERIOD,
    PeriodicTable,
    branch_domain_levels,
    periodic_table,
    word_string,
)
from .unimodal import MapDescriptor

MAX_CRITICAL_STEPS = 60
MAX_ETA_DEPTH = 24
UNIFORMITY_MARGIN = 0.1


@dataclass(frozen=True)
class CEReport:
    t: float
    lambda_c: float
    c_t: float
    lambda_c_window: tuple[int, int]
    lambda_per: float
    p_max: int
    lambda_eta: float
    eta_n: int
    lambda_eta_extrapolated: float
    safety: float
    theta_inv: float
    notes: list[str] = field(default_factory=list)

    def to_dict(self):
        d = asdict(self)
        d["lambda_c_window"] = list(self.lambda_c_window)
        return d

    def row(self):
        return (self.t, self.lambda_c, self.lambda_per, self.lambda_eta, self.theta_inv)


def critical_log_derivatives(m: MapDescriptor, t, n_max):
    """log|(f^n)'(f(c))| for n = 1..n_max, accumulated in log space."""
    if not 1 <= n_max <= MAX_CRITICAL_STEPS:
        raise ValueError(f"n_max must be in 1..{MAX_CRITICAL_STEPS}")
    c = m.critical_point(t)
    x = np.array([m.critical_value(t)])
    out = np.empty(n_max)
    acc = 0.0
    for n in range(n_max):
        fx, d = m.f_and_deriv(t, x)
        if d[0] == 0.0 or x[0] == c:
            raise HypothesisViolation(
                f"critical orbit returns to the critical point after {n + 1} steps (superstable)"
            )
        acc += np.log(abs(d[0]))
        out[n] = acc
        x = fx
    return out


def lambda_c_estimate(m: MapDescriptor, t, n_max=40):
    """(lambda_c, C_t): exp of the least-squares slope of log|(f^n)'(f(c))|
    over n in [n_max/2, n_max], and the smallest prefactor on that window."""
    logs = critical_log_derivatives(m, t, n_max)
    n = np.arange(1, n_max + 1)
    lo = max(1, n_max // 2)
    win = slice(lo - 1, n_max)
    if n_max - lo >= 1:
        slope, _ = np.polyfit(n[win], logs[win], 1)
    else:
        slope = logs[-1] / n_max
    c_t = float(np.exp(np.min(logs[win] - slope * n[win])))
    return float(np.exp(slope)), c_t


def _orbit_report(m, table: PeriodicTable, w):
    p = table.p
    lam = table.multiplier_sign[w] * np.exp(table.log_abs_multiplier[w])
    pts = table.points[table.orbit_index[:, w]]
    shown = ", ".join(f"{x:.10g}" for x in pts[:6]) + (", ..." if p > 6 else "")
    return (
        f"non-repelling periodic orbit: period {p}, itinerary {word_string(int(w), p)}, "
        f"points [{shown}], multiplier {lam:.10g}"
    )


def lambda_per_estimate(m: MapDescriptor, t, p_max, tables=None):
    """min over cycles of period <= p_max of |multiplier|^(1/p).

    Raises HypothesisViolation naming the first cycle with |multiplier| <= 1.
    """
    if not 1 <= p_max <= MAX_PERIOD:
        raise ValueError(f"p_max must be in 1..{MAX_PERIOD}")
    best = np.inf
    for p in range(1, p_max + 1):
        table = tables[p] if tables is not None and p in tables else periodic_table(m, t, p)
        if tables is not None:
            tables[p] = table
        logm = table.log_abs_multiplier[table.valid]
        if logm.size == 0:
            continue
        bad = np.flatnonzero(table.valid & ~(table.log_abs_multiplier > 0))
        if bad.size:
            raise HypothesisViolation(_orbit_report(m, table, bad[0]))
        best = min(best, float(np.min(logm)) / p)
    if not np.isfinite(best):
        raise NumericalFailure("no periodic orbits found")
    return float(np.exp(best))


def largest_branch_lengths(m: MapDescriptor, t, n):
    """Largest monotone branch length of f^k and the lap count, k = 1..n."""
    if not 1 <= n <= MAX_ETA_DEPTH:
        raise ValueError(f"n must be in 1..{MAX_ETA_DEPTH}")
    sizes = np.empty(n)
    laps = np.empty(n, dtype=np.int64)
    for level, lo, hi in branch_domain_levels(m, t, n):
        length = hi - lo
        ok = np.isfinite(length) & (length > 0)
        if not np.any(ok):
            raise NumericalFailure(f"branch pullback produced no domains at depth {level}")
        sizes[level - 1] = np.max(length[ok])
        laps[level - 1] = np.count_nonzero(ok)
    return sizes, laps


def lambda_eta_estimate(m: MapDescriptor, t, n):
    """Raw finite-n value |eta_n|^(-1/n) for the largest branch eta_n of f^n."""
    sizes, _ = largest_branch_lengths(m, t, n)
    return float(sizes[-1] ** (-1.0 / n))


def extrapolate_eta(sizes):
    """Limit of |eta_k|^(-1/k) from a fit log lambda_k = a + b/k on k in [n/2, n].

    The leading correction is a constant factor in |eta_k|, which shows up as
    b/k in the exponent; the fit removes it exactly.
    """
    n = len(sizes)
    k = np.arange(1, n + 1)
    logs = -np.log(sizes) / k
    win = slice(max(0, n // 2 - 1), n)
    if n - win.start < 2:
        return float(np.exp(logs[-1]))
    b, a = np.polyfit(1.0 / k[win], logs[win], 1)
    return float(np.exp(a))


def lap_count(m: MapDescriptor, t, n, grid=1 << 18):
    """Laps of f^n counted from sign changes of (f^n)' on a uniform grid.

    Independent of the pullback tree; reliable while the smallest lap is
    wider than the grid step.
    """
    x = np.linspace(-1.0, 1.0, grid + 1)
    _, d = m.iterate(t, x, n)
    s = np.sign(d)
    s = s[s != 0]
    return int(1 + np.count_nonzero(s[1:] != s[:-1]))


def theta_choice(report: CEReport | None = None, safety=0.9, *, lambda_c=None,
                 lambda_per=None, lambda_eta=None):
    """Theta^-1 = safety * min(lambda_eta, sqrt(min(lambda_c, lambda_per)))."""
    if report is not None:
        lambda_c, lambda_per, lambda_eta = report.lambda_c, report.lambda_per, report.lambda_eta
    if not 0 < safety < 1:
        raise ValueError("safety must lie in (0, 1)")
    for name, v in (("lambda_c", lambda_c), ("lambda_per", lambda_per), ("lambda_eta", lambda_eta)):
        if v is None or not v > 1:
            raise HypothesisViolation(f"{name} = {v} is not > 1")
    return float(safety * min(lambda_eta, np.sqrt(min(lambda_c, lambda_per))))


def ce_report(m: MapDescriptor, t, *, n_max=40, p_max=12, eta_n=16, safety=0.9,
              tables=None) -> CEReport:
    """Measure all three constants at ``t`` and derive Theta^-1."""
    m.check_t(t)
    lam_per = lambda_per_estimate(m, t, p_max, tables)
    lam_c, c_t = lambda_c_estimate(m, t, n_max)
    sizes, _ = largest_branch_lengths(m, t, eta_n)
    lam_eta = float(sizes[-1] ** (-1.0 / eta_n))
    notes = []
    if not lam_c > 1:
        raise HypothesisViolation(f"critical orbit does not expand: lambda_c = {lam_c:.6g}")
    if not lam_eta > 1:
        raise HypothesisViolation(f"branches of f^n do not shrink: lambda_eta = {lam_eta:.6g}")
    theta_inv = theta_choice(safety=safety, lambda_c=lam_c, lambda_per=lam_per,
                             lambda_eta=lam_eta)
    if not theta_inv > 1:
        notes.append(f"Theta^-1 = {theta_inv:.6g} is not > 1; raise the safety factor")
    return CEReport(
        float(t), lam_c, c_t, (max(1, n_max // 2), n_max), lam_per, p_max, lam_eta, eta_n,
        extrapolate_eta(sizes), safety, theta_inv, notes,
    )


def ce_sweep(m: MapDescriptor, ts, **kwargs) -> list[CEReport]:
    return [ce_report(m, t, **kwargs) for t in ts]


def uniformity(reports, margin=UNIFORMITY_MARGIN):
    """Smallest value of each constant over the grid and whether all exceed 1 + margin."""
    mins = {
        "lambda_c": min(r.lambda_c for r in reports),
        "lambda_per": min(r.lambda_per for r in reports),
        "lambda_eta": min(r.lambda_eta for r in reports),
    }
    return mins, all(v > 1 + margin for v in mins.values())
