"""Ulam discretization of the weighted transfer operator on a uniform partition.

Column j of the matrix carries the mass of bin j, spread inside the bin by a
profile omega, to the bins its image meets:

    M[i, j] = (1/W_j) * integral over B_j ∩ f^{-1}(B_i) of omega(y) exp(s psi(y)) dy,

with W_j the omega-mass of bin j. (Working in the source variable y absorbs
the 1/|f'| weight.) At s = 0 every column sums to one. The flat profile is the
classic method; it converges only like sqrt(1/N) here because the invariant
density has inverse-square-root spikes along the critical orbit. The
postcritical profile puts those spikes into omega, which restores O(1/N).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ._numerics import gauss_legendre
from .errors import ConfigError, NumericalFailure
from .unimodal import LEFT, RIGHT, MapDescriptor, Observable, eval_observable

log = logging.getLogger(__name__)

MAX_BINS = 1 << 16


@dataclass(frozen=True)
class BinProfile:
    """Within-bin mass profile omega(x) = 1 + sum_k a_k |x - c_k|^{-1/2}.

    Term k lives only on the side ``sides[k]`` (+1 right, -1 left) of
    ``points[k]``. With no terms this is the flat profile of classic Ulam.
    """

    points: tuple[float, ...] = ()
    sides: tuple[int, ...] = ()
    amplitudes: tuple[float, ...] = ()

    @property
    def is_flat(self):
        return not self.points

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.ones_like(x)
        for c, side, a in zip(self.points, self.sides, self.amplitudes):
            d = side * (x - c)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = out + np.where(d > 0, a / np.sqrt(np.abs(d)), 0.0)
        return out

    def integrate(self, fun, a, b):
        """Integral of fun * omega over each [a_i, b_i].

        Segments must not straddle a singular point. Singular terms use the
        substitution x = c +- u**2, which removes the inverse square root.
        """
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        total = gauss_legendre(fun, a, b)
        for c, side, amp in zip(self.points, self.sides, self.amplitudes):
            if side > 0:
                lo = np.sqrt(np.maximum(a - c, 0.0))
                hi = np.sqrt(np.maximum(b - c, 0.0))
            else:
                lo = np.sqrt(np.maximum(c - b, 0.0))
                hi = np.sqrt(np.maximum(c - a, 0.0))
            live = hi > lo
            if np.any(live):
                part = gauss_legendre(
                    lambda u, c=c, side=side: 2.0 * fun(c + side * u * u), lo[live], hi[live]
                )
                total[live] += amp * part
        return total


FLAT = BinProfile()


def postcritical_profile(m: MapDescriptor, t, max_terms=40, rel_tol=1e-8) -> BinProfile:
    """Profile with the one-sided inverse-square-root singularities that the
    invariant density carries at the postcritical points f^k(c).

    The amplitude at f^k(c) scales like |(f^{k-1})'(f(c))|^{-1/2}; terms stop
    when that falls below ``rel_tol`` or the critical orbit returns to c.
    """
    c = m.critical_point(t)
    f2 = float(m.deriv(t, np.array([c]), 2)[0])
    a1 = 0.5 * np.sqrt(2.0 / abs(f2))
    x = m.critical_value(t)
    side = -1 if f2 < 0 else 1
    gain = 1.0
    found = {}
    for _ in range(max_terms):
        amp = a1 / np.sqrt(gain)
        if amp < rel_tol * a1:
            break
        key = (round(x, 13), side)
        found[key] = found.get(key, 0.0) + amp
        d = float(m.deriv(t, np.array([x]), 1)[0])
        if d == 0:
            break
        gain *= abs(d)
        side = side if d > 0 else -side
        x = float(m.f(t, np.array([x]))[0])
    keys = sorted(found)
    return BinProfile(
        tuple(k[0] for k in keys), tuple(k[1] for k in keys), tuple(found[k] for k in keys)
    )


@dataclass(frozen=True)
class UlamMatrix:
    """Column-stochastic (at s = 0) mass-transfer matrix; column = source bin."""

    n_bins: int
    matrix: sp.csr_matrix
    t: float
    s: float
    profile: BinProfile = FLAT

    @property
    def edges(self):
        return np.linspace(-1.0, 1.0, self.n_bins + 1)

    def column_sums(self):
        return np.asarray(self.matrix.sum(axis=0)).ravel()


@dataclass(frozen=True)
class DensityEstimate:
    """Bin masses of the invariant density (``values`` are mass / bin width)."""

    values: np.ndarray
    t: float
    s: float
    profile: BinProfile = FLAT

    @property
    def n_bins(self):
        return self.values.size

    @property
    def edges(self):
        return np.linspace(-1.0, 1.0, self.n_bins + 1)

    @property
    def centers(self):
        e = self.edges
        return 0.5 * (e[1:] + e[:-1])

    @property
    def width(self):
        return 2.0 / self.n_bins

    def total(self):
        return float(np.sum(self.values) * self.width)


def build_ulam(m: MapDescriptor, t, psi: Observable | None, s, n_bins,
               profile: BinProfile | str = "flat") -> UlamMatrix:
    """Assemble the Ulam matrix from exact inverse-branch intersections.

    Entry (i, j) is the fraction of bin j's mass, spread inside the bin by
    ``profile``, that f_t carries into bin i, weighted by exp(s psi).
    ``profile="postcritical"`` builds the profile from the critical orbit.
    """
    if n_bins < 2 or n_bins > MAX_BINS or n_bins & (n_bins - 1):
        raise ConfigError(f"bin count must be a power of two in [2, {MAX_BINS}]")
    m.check_t(t)
    if isinstance(profile, str):
        if profile == "flat":
            profile = FLAT
        elif profile == "postcritical":
            profile = postcritical_profile(m, t)
        else:
            raise ConfigError(f"unknown bin profile {profile!r}")
    edges = np.linspace(-1.0, 1.0, n_bins + 1)
    width = 2.0 / n_bins
    c = m.critical_point(t)
    pre = [edges, [c], list(profile.points)]
    for side in (LEFT, RIGHT):
        y = m.inverse(t, side, edges)
        pre.append(y[np.isfinite(y)])
    cuts = np.unique(np.clip(np.concatenate(pre), -1.0, 1.0))
    a, b = cuts[:-1], cuts[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    mid = 0.5 * (a + b)

    src = np.clip(np.floor((mid + 1.0) / width).astype(int), 0, n_bins - 1)
    dst = np.clip(np.floor((m.f(t, mid) + 1.0) / width).astype(int), 0, n_bins - 1)
    if psi is None or s == 0:
        def weight_fn(y):
            return np.ones_like(y)
    else:
        def weight_fn(y):
            return np.exp(s * eval_observable(psi, m, t, y))
    if profile.is_flat and (psi is None or s == 0):
        weight = b - a
        bin_mass = np.full(n_bins, width)
    else:
        weight = profile.integrate(weight_fn, a, b)
        bin_mass = profile.integrate(np.ones_like, edges[:-1], edges[1:])
    mat = sp.coo_matrix((weight / bin_mass[src], (dst, src)), shape=(n_bins, n_bins)).tocsr()
    mat.sum_duplicates()
    return UlamMatrix(n_bins, mat, float(t), float(s), profile)


def leading_eigenpair(M: UlamMatrix, tol=1e-12, maxiter=100_000):
    """Power iteration for the leading eigenvalue and normalized eigenvector.

    Stops once both the eigenvalue estimate and the (L1-normalized) vector
    change by less than ``tol``.
    """
    A = M.matrix
    n = M.n_bins
    width = 2.0 / n
    v = np.full(n, 1.0 / (n * width))
    lam = np.nan
    for it in range(1, maxiter + 1):
        w = A @ v
        mass = np.sum(w) * width
        if not mass > 0:
            raise NumericalFailure("power iteration collapsed to zero")
        lam_new = mass  # v has unit mass
        w /= mass
        dv = np.sum(np.abs(w - v)) * width
        v = w
        if abs(lam_new - lam) < tol and dv < tol:
            lam = lam_new
            break
        lam = lam_new
    else:
        raise NumericalFailure(
            f"power iteration did not converge in {maxiter} steps (last change {dv:.3g})"
        )
    log.debug("power iteration converged in %d steps", it)
    return float(lam), DensityEstimate(v, M.t, M.s, M.profile), it


def integrate_function(v: DensityEstimate, fun, extra_cuts=()):
    """Integral of a vectorized ``fun`` against the estimated density.

    Each bin's mass is spread by the profile; ``fun * profile`` is integrated
    per bin (8-point Gauss-Legendre per piece, split at ``extra_cuts``).
    """
    e = v.edges
    cuts = np.unique(np.concatenate([e, v.profile.points, np.asarray(extra_cuts, float)]))
    cuts = cuts[(cuts >= -1.0) & (cuts <= 1.0)]
    a, b = cuts[:-1], cuts[1:]
    a, b = a[b > a], b[b > a]
    src = np.clip(np.floor((0.5 * (a + b) + 1.0) / v.width).astype(int), 0, v.n_bins - 1)
    parts = v.profile.integrate(fun, a, b)
    per_bin = np.bincount(src, weights=parts, minlength=v.n_bins)
    bin_mass = v.profile.integrate(np.ones_like, e[:-1], e[1:])
    return float(np.sum(v.values * v.width * per_bin / bin_mass))


def integrate_density(v: DensityEstimate, psi: Observable, m: MapDescriptor | None = None,
                      t=None):
    """Integral of ``psi`` against the estimated density.

    Flat profile: midpoint rule on the bin values. Otherwise see
    ``integrate_function``.
    """
    t = v.t if t is None else t
    if psi.kind == "log-abs-derivative" and m is None:
        raise ValueError("log|f'| needs the map")
    if v.profile.is_flat:
        vals = eval_observable(psi, m, t, v.centers)
        return float(np.sum(vals * v.values) * v.width)
    cuts = [m.critical_point(t)] if psi.kind == "log-abs-derivative" else []
    return integrate_function(v, lambda x: eval_observable(psi, m, t, x), cuts)


def invariant_density(m: MapDescriptor, t, n_bins=4096, profile="postcritical"):
    """Density of the absolutely continuous invariant measure at parameter ``t``."""
    lam, dens, _ = leading_eigenpair(build_ulam(m, t, None, 0.0, n_bins, profile))
    return lam, dens
