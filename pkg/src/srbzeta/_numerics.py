"""Vectorized root finding and quadrature shared by the modules."""

from __future__ import annotations

import numpy as np

EPS = np.finfo(float).eps

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def solve_monotone(fun, lo, hi, x0=None, *, xtol=4 * EPS, maxiter=200):
    """Safeguarded Newton for many independent scalar equations at once.

    ``fun(x, idx)`` must return ``(value, derivative)`` for the sub-problems
    ``idx``. Each root must be bracketed by ``[lo, hi]``; problems without a
    sign change come back as NaN.

    Returns
    -------
    roots : ndarray
    iterations : int
    """
    lo = np.array(lo, dtype=float, ndmin=1)
    hi = np.array(hi, dtype=float, ndmin=1)
    n = lo.size
    all_idx = np.arange(n)
    flo, _ = fun(lo, all_idx)
    fhi, _ = fun(hi, all_idx)

    out = np.full(n, np.nan)
    at_lo = flo == 0
    at_hi = (fhi == 0) & ~at_lo
    out[at_lo] = lo[at_lo]
    out[at_hi] = hi[at_hi]
    active = (np.sign(flo) * np.sign(fhi) < 0) & np.isfinite(flo) & np.isfinite(fhi)

    a = lo.copy()
    b = hi.copy()
    sa = np.sign(flo)
    if x0 is None:
        x = 0.5 * (lo + hi)
    else:
        x = np.array(x0, dtype=float, ndmin=1).copy()
        bad = ~np.isfinite(x) | (x < np.minimum(lo, hi)) | (x > np.maximum(lo, hi))
        x[bad] = 0.5 * (lo[bad] + hi[bad])

    iterations = 0
    for iterations in range(1, maxiter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xi = x[idx]
        f, df = fun(xi, idx)
        hit = f == 0
        same = np.sign(f) == sa[idx]
        a[idx] = np.where(same, xi, a[idx])
        b[idx] = np.where(same, b[idx], xi)
        left = np.minimum(a[idx], b[idx])
        right = np.maximum(a[idx], b[idx])
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = xi - f / df
        bad = ~np.isfinite(xn) | (xn <= left) | (xn >= right)
        xn = np.where(bad, 0.5 * (left + right), xn)
        scale = np.maximum(1.0, np.abs(xi))
        conv = hit | (np.abs(xn - xi) <= xtol * scale) | (right - left <= xtol * scale)
        xn = np.where(hit, xi, xn)
        x[idx] = xn
        out[idx[conv]] = xn[conv]
        active[idx[conv]] = False
    else:
        idx = np.flatnonzero(active)
        out[idx] = x[idx]
    return out, iterations


def gauss_legendre(fun, a, b):
    """8-point Gauss-Legendre integral of ``fun`` over each ``[a_i, b_i]``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = fun(nodes.ravel()).reshape(nodes.shape)
    return half * (vals @ _GL_WEIGHTS)
