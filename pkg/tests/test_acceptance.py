"""Acceptance criteria 1-8, one PASS/FAIL line per sub-check.

Lines are printed as they are produced and repeated in the terminal summary.
"""

import numpy as np
import pytest

from srbzeta.cli import main
from srbzeta.config import load_config
from srbzeta.diagnostics import ce_report
from srbzeta.response import analyticity_report, response_curve
from srbzeta.ulam import integrate_density, invariant_density
from srbzeta.zeta import (
    inverse_zeta_series,
    leading_zero,
    pressure_s_derivative,
    trace_sum,
    trace_sums,
)

from conftest import ACCEPTANCE, LYAP, X2


def check(criterion, name, value, expected, tol):
    ok = bool(abs(value - expected) <= tol)
    line = (f"{'PASS' if ok else 'FAIL'} [{criterion}] {name}: "
            f"got {value:.12g}, expected {expected:.12g} +- {tol:g}")
    print(line)
    ACCEPTANCE.append(line)
    return ok


def check_true(criterion, name, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'} [{criterion}] {name}" + (f": {detail}" if detail else "")
    print(line)
    ACCEPTANCE.append(line)
    return bool(ok)


@pytest.fixture(scope="module")
def base_density(cheb):
    return invariant_density(cheb, 0.0, 4096)


@pytest.fixture(scope="module")
def curves(sweep_cache):
    out = {}
    for name in ("chebyshev_motion.json", "chebyshev_motion_x2.json"):
        cfg = load_config(name)
        out[name] = (cfg, response_curve(cfg, cache=sweep_cache))
    return out


def test_1_normalized_eigenvalue(cheb, cheb_tables, base_density):
    d = inverse_zeta_series(trace_sums(cheb, 0.0, X2, 0.0, 20, tables=cheb_tables))
    closed = np.array([1.0, -0.75] + [-(2.0 ** (-k - 1)) for k in range(2, 21)])
    results = [
        check(1, "zeta lambda_00 at P=20", leading_zero(d).eigenvalue, 1.0, 1e-6),
        check(1, "1/zeta series vs (1-z)(1-z/4)/(1-z/2), max coefficient error",
              float(np.max(np.abs(d.coefficients - closed))), 0.0, 1e-9),
        check(1, "Ulam lambda at N=4096", base_density[0], 1.0, 1e-3),
    ]
    assert all(results)


def test_2_linear_response_identity(cheb, cheb_tables, base_density):
    val, _ = pressure_s_derivative(cheb, 0.0, X2, 20, tables=cheb_tables)
    ulam = integrate_density(base_density[1], X2, cheb)
    results = [
        check(2, "zeta dlog(lambda)/ds for psi=x^2", val, 0.5, 1e-4),
        check(2, "zeta vs Ulam integral of x^2", val - ulam, 0.0, 1e-3),
    ]
    assert all(results)


def test_3_lyapunov_exponent(cheb, cheb_tables, base_density):
    val, _ = pressure_s_derivative(cheb, 0.0, LYAP, 20, tables=cheb_tables)
    ulam = integrate_density(base_density[1], LYAP, cheb)
    results = [
        check(3, "zeta Lyapunov exponent", val, np.log(2), 1e-3),
        check(3, "Ulam Lyapunov exponent", ulam, np.log(2), 1e-3),
    ]
    assert all(results)


def test_4_orbits_and_constants(cheb, cheb_tables):
    counts = [cheb_tables[p].count() for p in range(1, 13)]
    rep = ce_report(cheb, 0.0, p_max=12, eta_n=20, safety=0.9, tables=cheb_tables)
    results = [
        check_true(4, "2^p fixed points of f^p for p <= 12",
                   counts == [2**p for p in range(1, 13)], f"counts {counts}"),
        check(4, "min |Lambda|^(1/p), p <= 12", rep.lambda_per, 2.0, 1e-8),
        check(4, "lambda_c", rep.lambda_c, 4.0, 1e-9),
        check(4, "lambda_eta(n=20)", rep.lambda_eta, 1.824, 0.01),
        check(4, "Theta^-1 at safety 0.9", rep.theta_inv, 1.2728, 1e-4),
    ]
    assert all(results)


def test_5_response_curve_exactness(curves):
    results = []
    exact = {"chebyshev_motion.json": lambda t: t / 2,
             "chebyshev_motion_x2.json": lambda t: 0.5 + 3 * t**2 / 8}
    for name, (cfg, curve) in curves.items():
        assert curve.rows.shape[0] == 21
        ref = exact[name](curve.t)
        for col in ("value_zeta", "value_ulam", "value_oracle"):
            err = float(np.max(np.abs(curve.column(col) - ref)))
            results.append(check(5, f"{name} max |{col} - R(t)|", err, 0.0, 1e-3))

    _, curve = curves["chebyshev_motion.json"]
    c = analyticity_report(curve, 3).coefficients[3]
    results.append(check(5, "psi=x fit c1", c[1], 0.5, 1e-3))
    for k in (0, 2, 3):
        results.append(check(5, f"psi=x fit c{k}", c[k], 0.0, 1e-3))

    _, curve = curves["chebyshev_motion_x2.json"]
    c = analyticity_report(curve, 4).coefficients[4]
    results.append(check(5, "psi=x^2 fit c0", c[0], 0.5, 1e-3))
    results.append(check(5, "psi=x^2 fit c2", c[2], 0.375, 1e-3))
    for k in (1, 3, 4):
        results.append(check(5, f"psi=x^2 fit c{k}", c[k], 0.0, 1e-3))
    assert all(results)


def test_6_conjugation_identities(cheb, conj, motion, cheb_tables):
    worst = 0.0
    for t in (-0.2, -0.1, 0.05, 0.2):
        for p in range(1, 11):
            base = cheb_tables[p]
            moved = motion.h(t, base.points) ** 2
            for s in (0.0, 0.5, -0.7):
                direct = trace_sum(conj, t, X2, s, p)
                pulled = float(np.sum(np.exp(s * base.birkhoff(moved) - base.log_abs_multiplier)))
                worst = max(worst, abs(direct - pulled))
    xs = np.linspace(-1, 1, 2001)
    func = 0.0
    for t in np.linspace(-0.2, 0.2, 9):
        func = max(func, float(np.max(np.abs(motion.h(t, cheb.f(0.0, xs))
                                             - conj.f(t, motion.h(t, xs))))))
    results = [
        check(6, "trace sums of (f_t, psi) vs (f_0, psi o h_t), max diff", worst, 0.0, 1e-9),
        check(6, "h_t o f_0 - f_t o h_t, max diff", func, 0.0, 1e-9),
    ]
    assert all(results)


def test_7_hypothesis_violation(capsys):
    code = main(["diagnose", "--config", "attracting_fixed_point.json"])
    err = capsys.readouterr().err
    results = [
        check(7, "diagnose exit code on attracting fixture", code, 1, 0),
        check_true(7, "diagnose cites the non-repelling orbit",
                   "non-repelling periodic orbit" in err, err.strip()),
    ]
    assert all(results)


def test_8_determinism(tmp_path, capsys, curves):
    paths = [tmp_path / f"run{k}.csv" for k in range(2)]
    for path in paths:
        code = main(["sweep", "--config", "chebyshev_motion_x2.json", "--grid", "-0.1:0.1:7",
                     "--out", str(path)])
        assert code == 0
    capsys.readouterr()
    same = paths[0].read_bytes() == paths[1].read_bytes()

    cfg, up = curves["chebyshev_motion_x2.json"]
    lo, hi, count = cfg.grid
    down = response_curve(cfg.with_overrides(grid=(hi, lo, count)))  # fresh, no shared cache
    diff = float(np.nanmax(np.abs(down.rows - up.rows)))
    results = [
        check_true(8, "repeated sweeps give bit-identical CSV", same),
        check(8, "ascending vs descending sweep, max diff", diff, 0.0, 1e-9),
    ]
    assert all(results)

