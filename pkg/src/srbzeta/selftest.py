"""Closed-form checks for the full quadratic map 1 - 2x^2 and its conjugates.

Every check compares a computed number with an independently known value:

* trace sums 1 - 2^-p + 4^-p and 1/zeta = (1 - z)(1 - z/4)/(1 - z/2),
* the arcsine density 1/(pi sqrt(1 - x^2)) and its moments,
* multipliers +-2^p (interior) and 4^p (at x = -1),
* largest lap of f^n: sin(pi / 2^n),
* R(t) = t/2 and 1/2 + 3t^2/8 for the motion h_t = x + t(1 - x^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagnostics import (
    lambda_c_estimate,
    lambda_eta_estimate,
    lambda_per_estimate,
    theta_choice,
)
from .orbits import periodic_table
from .response import ARCSINE, exact_conjugacy_oracle
from .ulam import build_ulam, integrate_density, invariant_density
from .unimodal import AnalyticMotion, ConjugatedFamily, Observable, chebyshev, eval_map, schwarzian
from .zeta import inverse_zeta_series, leading_zero, pressure_s_derivative, trace_sum, trace_sums


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    expected: float
    tol: float

    @property
    def passed(self):
        return bool(abs(self.value - self.expected) <= self.tol)


def run_checks(order=20, n_bins=4096, eta_n=20):
    m = chebyshev()
    x = Observable.polynomial([0, 1])
    x2 = Observable.polynomial([0, 0, 1])
    x4 = Observable.polynomial([0, 0, 0, 0, 1])
    lyap = Observable.log_abs_derivative()
    tables = {p: periodic_table(m, 0.0, p) for p in range(1, order + 1)}
    checks = [
        Check("f(0.5) = 0.5", eval_map(m, 0.0, 0.5), 0.5, 1e-15),
        Check("Schwarzian at 0.5 = -6", schwarzian(m, 0.0, 0.5), -6.0, 1e-12),
    ]
    counts_ok = all(tables[p].count() == 2**p for p in range(1, min(order, 12) + 1))
    checks.append(Check("2^p fixed points of f^p, p <= 12", float(counts_ok), 1.0, 0.0))
    for p in (1, 3, 8):
        checks.append(Check(f"trace sum p={p} = 1 - 2^-p + 4^-p",
                            trace_sum(m, 0.0, x2, 0.0, p, table=tables[p]),
                            1 - 2.0**-p + 4.0**-p, 1e-12))
    series = inverse_zeta_series(trace_sums(m, 0.0, x2, 0.0, order, tables=tables))
    d_exact = np.array([1.0, -0.75] + [-(2.0 ** (-k - 1)) for k in range(2, order + 1)])
    checks.append(Check("1/zeta coefficients", float(np.max(np.abs(series.coefficients - d_exact))),
                        0.0, 1e-9))
    checks.append(Check(f"zeta eigenvalue at P={order}",
                        leading_zero(series).eigenvalue, 1.0, 1e-6))
    for name, psi, exact, tol in (("x^2", x2, 0.5, 1e-4), ("log|f'|", lyap, np.log(2), 1e-3)):
        val, _ = pressure_s_derivative(m, 0.0, psi, order, tables=tables)
        checks.append(Check(f"zeta mean of {name}", val, exact, tol))

    M2 = build_ulam(m, 0.0, None, 0.0, 2)
    checks.append(Check("Ulam N=2 transfer into [0, 1]", M2.matrix[1, 0], 1 / np.sqrt(2), 1e-12))
    lam, dens = invariant_density(m, 0.0, n_bins)
    checks.append(Check(f"Ulam eigenvalue N={n_bins}", lam, 1.0, 1e-3))
    mid = np.abs(dens.centers) < 0.01
    checks.append(Check("Ulam density near 0 times pi", float(np.mean(dens.values[mid])) * np.pi,
                        1.0, 0.02))
    for name, psi, exact in (("x^2", x2, 0.5), ("x^4", x4, 0.375), ("log|f'|", lyap, np.log(2))):
        checks.append(Check(f"Ulam mean of {name}", integrate_density(dens, psi, m), exact, 1e-3))

    lam_c, _ = lambda_c_estimate(m, 0.0, 40)
    lam_per = lambda_per_estimate(m, 0.0, 10, tables)
    lam_eta = lambda_eta_estimate(m, 0.0, eta_n)
    checks += [
        Check("lambda_c = 4", lam_c, 4.0, 1e-9),
        Check("lambda_per (p <= 10) = 2", lam_per, 2.0, 1e-8),
        Check(f"lambda_eta(n={eta_n}) = sin(pi/2^n)^(-1/n)", lam_eta,
              np.sin(np.pi / 2.0**eta_n) ** (-1.0 / eta_n), 1e-5),
        Check("Theta^-1 (safety 0.9) = 0.9 sqrt 2",
              theta_choice(safety=0.9, lambda_c=lam_c, lambda_per=lam_per, lambda_eta=lam_eta),
              0.9 * np.sqrt(2), 1e-4),
    ]

    motion = AnalyticMotion((1.0,), (-0.2, 0.2))
    fam = ConjugatedFamily(m, motion)
    checks += [
        Check("oracle x at t=0.1", exact_conjugacy_oracle(ARCSINE, motion, x, 0.1), 0.05, 1e-12),
        Check("oracle x^2 at t=0.2", exact_conjugacy_oracle(ARCSINE, motion, x2, 0.2), 0.515,
              1e-12),
    ]
    xs = np.linspace(-1, 1, 101)
    gap = max(float(np.max(np.abs(motion.h(t, m.f(0.0, xs)) - fam.f(t, motion.h(t, xs)))))
              for t in (-0.2, -0.05, 0.1, 0.2))
    checks.append(Check("h_t o f_0 = f_t o h_t", gap, 0.0, 1e-9))
    return checks


def format_table(checks):
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  {'value':>22}  {'expected':>22}  {'tol':>8}  result"]
    for c in checks:
        lines.append(f"{c.name:<{width}}  {c.value:>22.15g}  {c.expected:>22.15g}  "
                     f"{c.tol:>8.1e}  {'PASS' if c.passed else 'FAIL'}")
    return "\n".join(lines)
