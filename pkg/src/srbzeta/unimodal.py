"""Analytic unimodal families on I = [-1, 1], observables and analytic motions.

Two kinds of family are supported:

* ``PolynomialFamily`` (kind ``"direct"``): f_t(x) = sum_jk c[j][k] t**j x**k,
  critical point at 0.
* ``ConjugatedFamily`` (kind ``"conjugated"``): f_t = h_t o f_0 o h_t^{-1}
  for a polynomial base map f_0 and an ``AnalyticMotion`` h_t. All members
  are smoothly conjugate to the base, so the response of any observable has
  an exact pushforward formula.

Everything here is vectorized over ``x``; scalar input gives scalar output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as P

from ._numerics import EPS, solve_monotone
from .errors import (
    ConfigError,
    HypothesisViolation,
    NumericalFailure,
    ParameterWindowError,
)

LEFT, RIGHT = "L", "R"
X_OVERSHOOT = 1e-9
WINDOW_SLACK = 1e-12


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _ret(arr, scalar):
    return float(arr) if scalar else arr


def _check_x(x):
    if np.any(np.abs(x) > 1 + X_OVERSHOOT):
        raise ValueError("x outside [-1, 1]")


class MapDescriptor:
    """Common interface of the two family kinds."""

    kind: str
    window: tuple[float, float]

    def check_t(self, t):
        lo, hi = self.window
        if not (lo - WINDOW_SLACK <= t <= hi + WINDOW_SLACK):
            raise ParameterWindowError(f"t={t!r} outside parameter window [{lo}, {hi}]")

    def critical_value(self, t):
        return float(self.f(t, np.array([self.critical_point(t)]))[0])

    def f_and_deriv(self, t, x):
        return self.f(t, x), self.deriv(t, x, 1)

    def iterate(self, t, x, n):
        """(f_t^n(x), (f_t^n)'(x))."""
        y = x
        d = np.ones_like(x)
        for _ in range(n):
            fy, dy = self.f_and_deriv(t, y)
            d = d * dy
            y = fy
        return y, d

    def f(self, t, x):  # pragma: no cover - interface
        raise NotImplementedError

    def deriv(self, t, x, order=1):  # pragma: no cover - interface
        raise NotImplementedError

    def critical_point(self, t):  # pragma: no cover - interface
        raise NotImplementedError

    def inverse(self, t, side, y):  # pragma: no cover - interface
        raise NotImplementedError


@dataclass(frozen=True)
class PolynomialFamily(MapDescriptor):
    """f_t(x) = sum_j sum_k coefficients[j][k] * t**j * x**k."""

    coefficients: tuple[tuple[float, ...], ...]
    window: tuple[float, float] = (-1.0, 1.0)
    kind: str = field(default="direct", init=False)

    def __post_init__(self):
        rows = tuple(tuple(float(c) for c in row) for row in self.coefficients)
        if not rows or any(not np.all(np.isfinite(r)) for r in rows):
            raise ConfigError("polynomial family needs finite coefficients")
        object.__setattr__(self, "coefficients", rows)
        object.__setattr__(self, "window", (float(self.window[0]), float(self.window[1])))

    @cached_property
    def _matrix(self):
        width = max(len(r) for r in self.coefficients)
        mat = np.zeros((len(self.coefficients), width))
        for j, row in enumerate(self.coefficients):
            mat[j, : len(row)] = row
        return mat

    def x_coefficients(self, t):
        powers = float(t) ** np.arange(self._matrix.shape[0])
        return powers @ self._matrix

    def f(self, t, x):
        self.check_t(t)
        return P.polyval(x, self.x_coefficients(t))

    def deriv(self, t, x, order=1):
        self.check_t(t)
        return P.polyval(x, P.polyder(self.x_coefficients(t), order))

    def df_dt(self, t, x):
        mat = self._matrix
        j = np.arange(1, mat.shape[0])
        coeffs = (j * float(t) ** (j - 1)) @ mat[1:] if mat.shape[0] > 1 else np.zeros(1)
        return P.polyval(x, np.atleast_1d(coeffs))

    def critical_point(self, t):
        return 0.0

    def inverse(self, t, side, y):
        """Preimage of ``y`` on the requested monotone branch (vectorized).

        Entries of ``y`` outside the branch image come back as NaN.
        """
        self.check_t(t)
        a = self.x_coefficients(t)
        da = P.polyder(a)
        c = 0.0
        fc = P.polyval(c, a)
        f2 = P.polyval(c, P.polyder(a, 2))
        y = np.array(y, dtype=float, ndmin=1)
        out = np.full(y.shape, np.nan)
        ok = (y >= -1 - X_OVERSHOOT) & (y <= fc + X_OVERSHOOT)
        yy = np.clip(y[ok], -1.0, fc)
        if side == LEFT:
            lo, hi, sgn = -1.0, c, -1.0
        elif side == RIGHT:
            lo, hi, sgn = c, 1.0, 1.0
        else:
            raise ValueError(f"side must be 'L' or 'R', got {side!r}")
        # the local quadratic model is exact for 1 - 2x**2
        guess = c + sgn * np.sqrt(np.maximum(0.0, (fc - yy) / (-0.5 * f2)))
        guess = np.clip(guess, lo, hi)

        def fun(x, idx):
            return P.polyval(x, a) - yy[idx], P.polyval(x, da)

        roots, _ = solve_monotone(
            fun, np.full(yy.shape, lo), np.full(yy.shape, hi), guess
        )
        out[ok] = roots
        return out


@dataclass(frozen=True)
class AnalyticMotion:
    """h_t(x) = x + t * g(x) * (1 - x**2); ``g`` given by ascending coefficients."""

    g: tuple[float, ...]
    window: tuple[float, float] = (-0.25, 0.25)

    def __post_init__(self):
        g = tuple(float(c) for c in self.g) or (0.0,)
        if not np.all(np.isfinite(g)):
            raise ConfigError("motion coefficients must be finite")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "window", (float(self.window[0]), float(self.window[1])))
        # h_t' = 1 + t q'(x) is affine in t: positivity at both window ends suffices
        xs = np.linspace(-1, 1, 2001)
        dq = P.polyval(xs, self._dq)
        for t in self.window:
            if np.min(1 + t * dq) <= 0:
                raise ConfigError(f"motion is not a diffeomorphism at t={t}")

    @cached_property
    def _q(self):
        return P.polymul(np.array(self.g), np.array([1.0, 0.0, -1.0]))

    @cached_property
    def _dq(self):
        return P.polyder(self._q)

    def check_t(self, t):
        lo, hi = self.window
        if not (lo - WINDOW_SLACK <= t <= hi + WINDOW_SLACK):
            raise ParameterWindowError(f"t={t!r} outside motion window [{lo}, {hi}]")

    def h(self, t, x):
        return x + t * P.polyval(x, self._q)

    def deriv(self, t, x, order=1):
        if order == 1:
            return 1.0 + t * P.polyval(x, self._dq)
        return t * P.polyval(x, P.polyder(self._q, order))

    def dh_dt(self, t, x):
        return P.polyval(x, self._q)

    def inverse(self, t, y):
        y = np.array(y, dtype=float, ndmin=1)
        if t == 0:
            return y.copy()
        yy = np.clip(y, -1.0, 1.0)
        q, dq = self._q, self._dq
        x = np.clip(yy - t * P.polyval(yy, q), -1.0, 1.0)
        # h is a small perturbation of the identity: plain Newton converges
        # quadratically from x = y - t q(y)
        for _ in range(8):
            step = (x + t * P.polyval(x, q) - yy) / (1.0 + t * P.polyval(x, dq))
            x = x - step
            if np.max(np.abs(step), initial=0.0) <= 2 * EPS:
                break
        x = np.clip(x, -1.0, 1.0)
        resid = np.abs(x + t * P.polyval(x, q) - yy)
        bad = ~(resid <= 8 * EPS)
        if np.any(bad):
            def fun(z, idx):
                return z + t * P.polyval(z, q) - yy[bad][idx], 1.0 + t * P.polyval(z, dq)

            n = int(np.count_nonzero(bad))
            roots, _ = solve_monotone(fun, np.full(n, -1.0), np.full(n, 1.0), x[bad])
            if np.any(np.isnan(roots)):
                raise NumericalFailure("inverse motion did not converge")
            x[bad] = roots
        return x


@dataclass(frozen=True)
class ConjugatedFamily(MapDescriptor):
    """f_t = h_t o f_0 o h_t^{-1} with f_0 the base family at t = 0."""

    base: PolynomialFamily
    motion: AnalyticMotion
    window: tuple[float, float] | None = None
    kind: str = field(default="conjugated", init=False)

    def __post_init__(self):
        window = self.window if self.window is not None else self.motion.window
        lo = max(float(window[0]), self.motion.window[0])
        hi = min(float(window[1]), self.motion.window[1])
        if lo > hi:
            raise ConfigError("family window does not meet the motion window")
        object.__setattr__(self, "window", (lo, hi))

    def f(self, t, x):
        self.check_t(t)
        x, scalar = _as_array(x)
        y = self.motion.inverse(t, x.ravel())
        out = self.motion.h(t, self.base.f(0.0, y)).reshape(x.shape)
        return _ret(out, scalar)

    def deriv(self, t, x, order=1):
        self.check_t(t)
        if order not in (1, 2, 3):
            raise ValueError("order must be 1, 2 or 3")
        x, scalar = _as_array(x)
        h = self.motion
        y = h.inverse(t, x.ravel())
        # derivatives of k = h^{-1} at x
        h1, h2, h3 = (h.deriv(t, y, r) for r in (1, 2, 3))
        k1 = 1.0 / h1
        k2 = -h2 * k1**3
        k3 = -h3 * k1**4 + 3 * h2**2 * k1**5
        # q = f_0 o k
        b1, b2, b3 = (self.base.deriv(0.0, y, r) for r in (1, 2, 3))
        q1 = b1 * k1
        q2 = b2 * k1**2 + b1 * k2
        q3 = b3 * k1**3 + 3 * b2 * k1 * k2 + b1 * k3
        # f_t = h o q
        u = self.base.f(0.0, y)
        H1, H2, H3 = (h.deriv(t, u, r) for r in (1, 2, 3))
        if order == 1:
            out = H1 * q1
        elif order == 2:
            out = H2 * q1**2 + H1 * q2
        else:
            out = H3 * q1**3 + 3 * H2 * q1 * q2 + H1 * q3
        return _ret(out.reshape(x.shape), scalar)

    def f_and_deriv(self, t, x):
        self.check_t(t)
        h = self.motion
        y = h.inverse(t, x)
        u = self.base.f(0.0, y)
        return h.h(t, u), h.deriv(t, u, 1) * self.base.deriv(0.0, y, 1) / h.deriv(t, y, 1)

    def iterate(self, t, x, n):
        # f_t^n = h_t o f_0^n o h_t^{-1}: one inverse-motion solve per call
        self.check_t(t)
        h = self.motion
        y = h.inverse(t, x)
        u, d = self.base.iterate(0.0, y, n)
        return h.h(t, u), h.deriv(t, u, 1) * d / h.deriv(t, y, 1)

    def df_dt(self, t, x, step=1e-6):
        lo, hi = self.window
        t1, t2 = max(lo, t - step), min(hi, t + step)
        return (self.f(t2, x) - self.f(t1, x)) / (t2 - t1)

    def critical_point(self, t):
        self.check_t(t)
        return float(self.motion.h(t, self.base.critical_point(0.0)))

    def inverse(self, t, side, y):
        self.check_t(t)
        y = np.array(y, dtype=float, ndmin=1)
        z = self.motion.inverse(t, y)
        pre = self.base.inverse(0.0, side, z)
        out = np.full(y.shape, np.nan)
        ok = np.isfinite(pre)
        out[ok] = self.motion.h(t, pre[ok])
        return out


@dataclass(frozen=True)
class Observable:
    """A real observable: a polynomial, or the built-in log|f_t'|."""

    kind: str = "polynomial"
    coefficients: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        if self.kind not in ("polynomial", "log-abs-derivative"):
            raise ConfigError(f"unknown observable kind {self.kind!r}")
        coeffs = tuple(float(c) for c in self.coefficients) or (0.0,)
        if not np.all(np.isfinite(coeffs)):
            raise ConfigError("observable coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def polynomial(cls, coefficients):
        return cls("polynomial", tuple(coefficients))

    @classmethod
    def log_abs_derivative(cls):
        return cls("log-abs-derivative", ())

    def __call__(self, m, t, x):
        return eval_observable(self, m, t, x)


@dataclass(frozen=True)
class KNConstants:
    sup1: float
    var1: float
    sup2: float
    M: float
    grid_size: int
    converged: bool


# --- operations -------------------------------------------------------------


def eval_map(m: MapDescriptor, t, x):
    x, scalar = _as_array(x)
    _check_x(x)
    return _ret(np.asarray(m.f(t, np.clip(x, -1.0, 1.0))), scalar)


def eval_deriv(m: MapDescriptor, t, x, order=1):
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    x, scalar = _as_array(x)
    _check_x(x)
    return _ret(np.asarray(m.deriv(t, np.clip(x, -1.0, 1.0), order)), scalar)


def schwarzian(m: MapDescriptor, t, x):
    """f'''/f' - 1.5 (f''/f')**2."""
    x, scalar = _as_array(x)
    c = m.critical_point(t)
    if np.any(np.abs(x - c) < 1e-14):
        raise ValueError("Schwarzian derivative is undefined at the critical point")
    d1 = eval_deriv(m, t, x, 1)
    d2 = eval_deriv(m, t, x, 2)
    d3 = eval_deriv(m, t, x, 3)
    return _ret(np.asarray(d3 / d1 - 1.5 * (d2 / d1) ** 2), scalar)


def apply_motion(motion: AnalyticMotion, t, x):
    motion.check_t(t)
    x, scalar = _as_array(x)
    return _ret(np.asarray(motion.h(t, x)), scalar)


def eval_observable(psi: Observable, m: MapDescriptor, t, x):
    x, scalar = _as_array(x)
    if psi.kind == "polynomial":
        return _ret(np.asarray(P.polyval(x, psi.coefficients)), scalar)
    d = np.abs(eval_deriv(m, t, x, 1))
    if np.any(d == 0):
        raise ValueError("log|f'| evaluated where f' = 0")
    return _ret(np.log(d), scalar)


def _kn_ratio_one(m, t, x, c):
    d1 = m.deriv(t, x, 1)
    near = np.abs(x - c) < 1e-7
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.abs(x - c) / np.abs(d1)
    r[near] = -1.0 / m.deriv(t, np.array([c]), 2)[0]
    return r


def _kn_pass(m, t, n, n_u):
    c = m.critical_point(t)
    x = np.union1d(np.linspace(-1.0, 1.0, n + 1), [c])
    r = _kn_ratio_one(m, t, x, c)
    sup1 = float(np.max(r))
    var1 = float(np.sum(np.abs(np.diff(r))))

    sup2 = 0.0
    s = np.linspace(0.0, 1.0, n + 1)
    for side in (LEFT, RIGHT):
        if side == RIGHT:
            us = c + (1.0 - c) * np.arange(1, n_u) / n_u
            xs = us[:, None] + (1.0 - us[:, None]) * s[None, :]
        else:
            us = c - (c + 1.0) * np.arange(1, n_u) / n_u
            xs = us[:, None] - (us[:, None] + 1.0) * s[None, :]
        fx = m.f(t, xs.ravel()).reshape(xs.shape)
        fu = m.f(t, us)[:, None]
        d1 = m.deriv(t, xs.ravel(), 1).reshape(xs.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.abs(fx - fu) / (np.abs(xs - us[:, None]) * np.abs(d1))
        ratio[:, 0] = 1.0  # limit at x = u
        var = np.sum(np.abs(np.diff(ratio, axis=1)), axis=1)
        sup2 = max(sup2, float(np.max(var)))
    return sup1, var1, sup2


def kn_constants(m: MapDescriptor, t, grid_size=1024, n_u=64) -> KNConstants:
    """Grid estimates of the two bounded-variation admissibility conditions.

    Values come from the ``2 * grid_size`` pass; ``converged`` records
    whether they agree with the ``grid_size`` pass within 1%.
    """
    if grid_size < 256:
        raise ValueError("grid_size must be at least 256")
    m.check_t(t)
    coarse = _kn_pass(m, t, grid_size, n_u)
    fine = _kn_pass(m, t, 2 * grid_size, n_u)
    vals = np.array(fine)
    if not np.all(np.isfinite(vals)):
        raise HypothesisViolation("KN conditions produce non-finite values")
    converged = bool(np.all(np.abs(vals - np.array(coarse)) <= 0.01 * np.abs(vals) + 1e-9))
    sup1, var1, sup2 = fine
    total = sup1 + var1
    M = max(total, 1.0 / total, sup2)
    return KNConstants(sup1, var1, sup2, M, 2 * grid_size, converged)


# --- hypothesis checks --------------------------------------------------------


def check_family(m: MapDescriptor, n_t=11, n_x=2001):
    """Check the standing invariants on a sampled (t, x) grid.

    Raises ``HypothesisViolation`` naming the first failed invariant.
    """
    lo, hi = m.window
    xs = np.linspace(-1.0, 1.0, n_x)
    for t in np.linspace(lo, hi, n_t):
        ends = m.f(t, np.array([-1.0, 1.0]))
        if np.max(np.abs(ends + 1.0)) > 1e-12:
            raise HypothesisViolation(f"f_t(+-1) != -1 at t={t}: {ends}")
        c = m.critical_point(t)
        if abs(m.deriv(t, np.array([c]), 1)[0]) > 1e-10:
            raise HypothesisViolation(f"f_t'(c) != 0 at t={t}")
        if m.deriv(t, np.array([c]), 2)[0] >= 0:
            raise HypothesisViolation(f"f_t''(c) >= 0 at t={t}")
        vals = m.f(t, xs)
        if np.max(np.abs(vals)) > 1 + 1e-12:
            raise HypothesisViolation(f"f_t(I) not inside I at t={t}")


def check_schwarzian(m: MapDescriptor, ts, n=10_000, exclude=1e-3):
    """Largest Schwarzian value over the grid (must be <= 0)."""
    worst = -np.inf
    xs = np.linspace(-1.0, 1.0, n)
    for t in ts:
        c = m.critical_point(t)
        x = xs[np.abs(xs - c) >= exclude]
        worst = max(worst, float(np.max(schwarzian(m, t, x))))
    if worst > 0:
        raise HypothesisViolation(f"positive Schwarzian derivative (max {worst:.3g})")
    return worst


def chebyshev() -> PolynomialFamily:
    """The full quadratic map 1 - 2x**2."""
    return PolynomialFamily(((1.0, 0.0, -2.0),))


def is_chebyshev(m: MapDescriptor) -> bool:
    if not isinstance(m, PolynomialFamily):
        return False
    mat = m._matrix
    if mat.shape[1] < 3 or np.any(mat[1:] != 0) or np.any(mat[0, 3:] != 0):
        return False
    return tuple(mat[0, :3]) == (1.0, 0.0, -2.0)
