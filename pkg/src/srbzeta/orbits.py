"""Periodic points of f_t by itinerary pullback, multipliers and continuation.

A word w_0 ... w_{p-1} over {L, R} is stored as the integer whose most
significant bit is w_0 (L = 0, R = 1). The monotone branch domain of f^p for
the word w is built by pulling [-1, 1] back through the inverse branches
g_{w_{p-1}}, ..., g_{w_0}; on it f^p - id has at most one zero for the maps
handled here, which is found by a bracketed Newton solve.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._numerics import EPS, solve_monotone
from .errors import ConfigError, HypothesisViolation, NumericalFailure
from .unimodal import LEFT, RIGHT, MapDescriptor

log = logging.getLogger(__name__)

MAX_PERIOD = 20
RESIDUAL_TOL = 1e-10
ENDPOINT_TOL = 1e-6


@dataclass(frozen=True)
class Itinerary:
    word: str

    def __post_init__(self):
        if not self.word or set(self.word) - {LEFT, RIGHT}:
            raise ValueError(f"bad itinerary {self.word!r}")

    def __len__(self):
        return len(self.word)

    def __str__(self):
        return self.word

    def canonical(self) -> "Itinerary":
        w = self.word
        return Itinerary(min(w[k:] + w[:k] for k in range(len(w))))

    def same_cycle(self, other: "Itinerary") -> bool:
        return len(self) == len(other) and self.canonical() == other.canonical()


@dataclass(frozen=True)
class PeriodicOrbit:
    period: int
    points: tuple[float, ...]
    multiplier: float
    itinerary: Itinerary
    residual: float


def word_string(index: int, p: int) -> str:
    return "".join(RIGHT if (index >> (p - 1 - k)) & 1 else LEFT for k in range(p))


def word_index(word: str) -> int:
    out = 0
    for ch in word:
        out = (out << 1) | (ch == RIGHT)
    return out


def rotate(idx, p):
    """Shift words by one symbol: itinerary of f(x) from that of x."""
    mask = (1 << p) - 1
    return ((idx << 1) & mask) | (idx >> (p - 1))


def inverse_branch(m: MapDescriptor, t, side, y) -> float:
    """The unique x on ``side`` of the critical point with f_t(x) = y."""
    x = m.inverse(t, side, np.array([float(y)]))[0]
    if not np.isfinite(x):
        raise ValueError(f"y={y} is outside the image of branch {side}")
    return float(x)


def branch_domain_levels(m: MapDescriptor, t, n):
    """Yield ``(level, lo, hi)`` for the monotone branch domains of f^level.

    Arrays are indexed by word; unrealized itineraries are NaN.
    """
    c = m.critical_point(t)
    fc = m.critical_value(t)
    lo = np.array([-1.0, c])
    hi = np.array([c, 1.0])
    yield 1, lo, hi
    for level in range(2, n + 1):
        a = np.maximum(lo, -1.0)
        b = np.minimum(hi, fc)
        empty = ~(b > a)
        a = np.where(empty, np.nan, a)
        b = np.where(empty, np.nan, b)
        ends = np.concatenate([a, b])
        left = m.inverse(t, LEFT, ends)
        right = m.inverse(t, RIGHT, ends)
        k = lo.size
        # g_L increases, g_R decreases
        lo = np.concatenate([left[:k], right[k:]])
        hi = np.concatenate([left[k:], right[:k]])
        yield level, lo, hi


def branch_domains(m: MapDescriptor, t, n):
    for _, lo, hi in branch_domain_levels(m, t, n):
        pass
    return lo, hi


def _iterate(m, t, x, p):
    return m.iterate(t, x, p)


@dataclass
class PeriodicTable:
    """All fixed points of f_t^p, one slot per itinerary word."""

    t: float
    p: int
    points: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    log_abs_deriv: np.ndarray
    deriv_sign: np.ndarray

    @property
    def valid(self):
        return np.isfinite(self.points)

    @cached_property
    def orbit_index(self):
        """(p, 2**p) array: row k holds the word index of f^k(x)."""
        idx = np.arange(1 << self.p)
        rows = [idx]
        for _ in range(self.p - 1):
            idx = rotate(idx, self.p)
            rows.append(idx)
        return np.stack(rows)

    def birkhoff(self, values):
        """Sum of per-point ``values`` along the f^p orbit of every slot."""
        acc = np.zeros(1 << self.p)
        for row in self.orbit_index:
            acc += values[row]
        return acc

    @cached_property
    def log_abs_multiplier(self):
        return self.birkhoff(self.log_abs_deriv)

    @cached_property
    def multiplier_sign(self):
        neg = self.birkhoff((self.deriv_sign < 0).astype(float))
        return np.where(np.mod(neg, 2) == 1, -1.0, 1.0)

    def count(self):
        return int(np.count_nonzero(self.valid))


def periodic_table(m: MapDescriptor, t, p, seed=None, domains=None) -> PeriodicTable:
    """Solve f_t^p(x) = x on every branch domain of f_t^p.

    ``seed`` optionally gives initial guesses (e.g. the table at a nearby
    parameter); ``domains`` reuses a precomputed ``(lo, hi)`` pair.
    """
    if not 1 <= p <= MAX_PERIOD:
        raise ConfigError(f"period {p} outside 1..{MAX_PERIOD}")
    lo, hi = domains if domains is not None else branch_domains(m, t, p)
    ok = np.flatnonzero(np.isfinite(lo) & np.isfinite(hi))

    def fun(x, idx):
        y, d = _iterate(m, t, x, p)
        return y - x, d - 1.0

    x0 = None
    if seed is not None:
        x0 = np.asarray(seed.points if isinstance(seed, PeriodicTable) else seed)[ok]
    roots, _ = solve_monotone(fun, lo[ok], hi[ok], x0)

    points = np.full(1 << p, np.nan)
    points[ok] = roots
    _dedupe(points, lo, hi)
    # A fixed point within rounding of a domain endpoint can lose its sign
    # change (pairs of fixed points closer than one ulp near x = 1 at high
    # p). Take the endpoint and let the shift residual below certify it.
    missing = ok[np.isnan(roots)]
    edge = np.zeros(1 << p, dtype=bool)
    if missing.size:
        ends = np.concatenate([lo[missing], hi[missing]])
        F, _ = fun(ends, None)
        k = missing.size
        pick_lo = np.abs(F[:k]) <= np.abs(F[k:])
        best = np.where(pick_lo, ends[:k], ends[k:])
        small = np.minimum(np.abs(F[:k]), np.abs(F[k:])) <= ENDPOINT_TOL
        points[missing[small]] = best[small]
        edge[missing[small]] = True

    succ = rotate(np.arange(1 << p), p)
    while True:
        fx, dfx = m.f_and_deriv(t, np.where(np.isfinite(points), points, 0.0))
        fx = np.where(np.isfinite(points), fx, np.nan)
        resid = np.abs(fx - points[succ])
        bad = np.isfinite(points) & ~(resid <= RESIDUAL_TOL)
        if not np.any(bad & edge):
            break
        points[bad & edge] = np.nan
        edge[bad] = False
    if np.any(bad):
        w = int(np.flatnonzero(bad)[0])
        raise NumericalFailure(
            f"periodic point for itinerary {word_string(w, p)} has residual {resid[w]:.3g}"
        )
    with np.errstate(divide="ignore"):
        logd = np.log(np.abs(dfx))
    logd = np.where(np.isfinite(points), logd, np.nan)
    return PeriodicTable(float(t), p, points, lo, hi, logd, np.sign(dfx))


def _dedupe(points, lo, hi):
    """Drop a point found twice on the shared endpoint of two domains.

    Each itinerary owns at most one fixed point, so distinct words only
    collide when the orbit runs through a domain boundary. Distinct fixed
    points of high iterates can sit far closer than any fixed tolerance
    near turning points, so nothing else is merged.
    """
    idx = np.flatnonzero(np.isfinite(points))
    if idx.size < 2:
        return
    order = idx[np.argsort(points[idx], kind="stable")]
    x = points[order]
    tol = 4 * EPS * np.maximum(1.0, np.abs(x))
    on_edge = (np.abs(x - lo[order]) <= tol) | (np.abs(x - hi[order]) <= tol)
    dup = (np.diff(x) <= tol[:-1]) & on_edge[:-1] & on_edge[1:]
    for k in np.flatnonzero(dup):
        a, b = order[k], order[k + 1]
        points[max(a, b)] = np.nan


def _primitive_period(index, p):
    j = index
    for q in range(1, p + 1):
        j = rotate(j, p)
        if j == index:
            return q
    return p


def cycles_from_table(m: MapDescriptor, table: PeriodicTable) -> list[PeriodicOrbit]:
    p = table.p
    out = []
    for w in np.flatnonzero(table.valid):
        w = int(w)
        ring = table.orbit_index[:, w]
        if w != int(ring.min()):
            continue
        q = _primitive_period(w, p)
        pts = table.points[ring[:q]]
        if not np.all(np.isfinite(pts)):
            raise NumericalFailure(f"incomplete cycle for itinerary {word_string(w, p)}")
        fx = m.f(table.t, pts)
        residual = float(np.max(np.abs(fx - np.roll(pts, -1))))
        lam = _signed_product(table.deriv_sign[ring[:q]], table.log_abs_deriv[ring[:q]])
        word = word_string(w, p)[:q]
        out.append(PeriodicOrbit(q, tuple(float(v) for v in pts), lam, Itinerary(word), residual))
    out.sort(key=lambda o: (o.period, word_index(o.itinerary.word)))
    return out


def find_periodic_points(m: MapDescriptor, t, p, tol=1e-11) -> list[PeriodicOrbit]:
    """All cycles whose period divides ``p``, grouped by cycle."""
    if tol < 1e-12:
        raise ValueError("tol must be at least 1e-12")
    table = periodic_table(m, t, p)
    orbits = cycles_from_table(m, table)
    for o in orbits:
        if o.residual > max(tol, RESIDUAL_TOL):
            raise NumericalFailure(f"cycle {o.itinerary} residual {o.residual:.3g} above {tol}")
    return orbits


def _signed_product(signs, logs):
    if np.any(signs == 0):
        raise HypothesisViolation("f' vanishes on a periodic orbit (superstable cycle)")
    sign = -1.0 if np.count_nonzero(signs < 0) % 2 else 1.0
    return sign * float(np.exp(np.sum(logs)))


def multiplier(m: MapDescriptor, t, orbit: PeriodicOrbit) -> float:
    """Signed product of f_t' along the cycle, accumulated in log space."""
    d = m.deriv(t, np.asarray(orbit.points), 1)
    if np.any(d == 0):
        raise HypothesisViolation(f"f' vanishes on cycle {orbit.itinerary}")
    return _signed_product(np.sign(d), np.log(np.abs(d)))


# --- continuation -------------------------------------------------------------


def _shooting_newton(m, t, x, maxiter=30, tol=1e-13):
    """Newton on F_k = f(x_k) - x_{k+1}; returns (x, iterations, converged)."""
    p = x.size
    for it in range(1, maxiter + 1):
        fx, d = m.f_and_deriv(t, x)
        F = fx - np.roll(x, -1)
        J = np.diag(d)
        J[np.arange(p), (np.arange(p) + 1) % p] -= 1.0
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return x, it, False
        x = np.clip(x + dx, -1.0, 1.0)
        if np.max(np.abs(dx)) <= tol:
            fx = m.f(t, x)
            return x, it, bool(np.max(np.abs(fx - np.roll(x, -1))) <= RESIDUAL_TOL)
    return x, maxiter, False


def _tangent(m, t, x):
    p = x.size
    d = m.deriv(t, x, 1)
    J = np.diag(d)
    J[np.arange(p), (np.arange(p) + 1) % p] -= 1.0
    return np.linalg.solve(J, -m.df_dt(t, x))


def continue_orbit(m: MapDescriptor, orbit: PeriodicOrbit, t_from, t_to, steps=10,
                   min_step=1e-6, min_multiplier=1.01):
    """Predictor-corrector continuation of a cycle from ``t_from`` to ``t_to``.

    Returns the list of ``(t, PeriodicOrbit)`` pairs. If the multiplier
    comes within ``min_multiplier`` of the unit circle the path stops at the
    last good parameter and a warning is issued.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    m.check_t(t_from)
    m.check_t(t_to)
    path = [(float(t_from), orbit)]
    if t_to == t_from:
        return path
    x = np.array(orbit.points, dtype=float)
    t = float(t_from)
    direction = 1.0 if t_to > t_from else -1.0
    nominal = abs(t_to - t_from) / steps
    h = nominal
    while direction * (t_to - t) > 1e-15:
        h = min(h, abs(t_to - t))
        t_new = t_to if h == abs(t_to - t) else t + direction * h
        x_pred = x + (t_new - t) * _tangent(m, t, x)
        x_new, iters, ok = _shooting_newton(m, t_new, x_pred)
        if not ok:
            if h / 2 < min_step:
                raise NumericalFailure(f"continuation failed near t={t_new}")
            h /= 2
            continue
        lam = multiplier(m, t_new, PeriodicOrbit(orbit.period, tuple(x_new), 0.0,
                                                 orbit.itinerary, 0.0))
        if abs(lam) < min_multiplier:
            warnings.warn(
                f"cycle {orbit.itinerary} multiplier {lam:.4g} near the unit circle at "
                f"t={t_new}; stopping at t={t}",
                RuntimeWarning,
                stacklevel=2,
            )
            break
        residual = float(np.max(np.abs(m.f(t_new, x_new) - np.roll(x_new, -1))))
        path.append((t_new, PeriodicOrbit(orbit.period, tuple(float(v) for v in x_new), lam,
                                          orbit.itinerary, residual)))
        t, x = t_new, x_new
        if iters > 5:
            h = max(h / 2, min_step)
        else:
            h = min(nominal, 2 * h)
    return path
