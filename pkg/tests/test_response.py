import numpy as np
import pytest

from srbzeta.config import SweepConfig, config_from_dict, load_config
from srbzeta.errors import ConfigError, HypothesisViolation, NumericalFailure
from srbzeta.response import (
    ARCSINE,
    COLUMNS,
    ResponseCurve,
    analyticity_report,
    exact_conjugacy_oracle,
    response_curve,
)
from srbzeta.ulam import invariant_density

from conftest import LYAP, X, X2, X4


@pytest.mark.parametrize("psi, t, expected", [
    (X, 0.1, 0.05), (X2, 0.2, 0.515), (X, 0.0, 0.0), (X2, 0.0, 0.5), (X4, 0.0, 0.375),
    (X, -0.2, -0.1),
])
def test_oracle_closed_form(motion, psi, t, expected):
    assert exact_conjugacy_oracle(ARCSINE, motion, psi, t) == pytest.approx(expected, abs=1e-14)


def test_oracle_lyapunov_is_invariant(conj, motion):
    # the Lyapunov exponent is a conjugacy invariant
    for t in (-0.15, 0.0, 0.1):
        assert exact_conjugacy_oracle(ARCSINE, motion, LYAP, t, conj) == pytest.approx(
            np.log(2), abs=1e-3)


def test_oracle_with_density_estimate(cheb, motion):
    _, dens = invariant_density(cheb, 0.0, 4096)
    for t in (-0.1, 0.2):
        assert exact_conjugacy_oracle(dens, motion, X2, t) == pytest.approx(
            0.5 + 3 * t * t / 8, abs=1e-3)


def test_oracle_rejects_direct_family(cheb, motion):
    with pytest.raises(ConfigError):
        exact_conjugacy_oracle(ARCSINE, motion, X, 0.1, cheb)
    with pytest.raises(ConfigError):
        exact_conjugacy_oracle("gaussian", motion, X, 0.1)


def _short(psi, grid=(-0.1, 0.1, 5), **kw):
    d = {
        "family": {"kind": "conjugated", "motion": {"g": [1.0]}, "window": [-0.2, 0.2]},
        "observable": psi, "grid": {"min": grid[0], "max": grid[1], "count": grid[2]},
        "P": 14, "N": 1024, "diagnostics": {"n_max": 30, "p_max": 8, "eta_n": 10},
    }
    d.update(kw)
    return config_from_dict(d)


@pytest.fixture(scope="module")
def short_curve(sweep_cache):
    return response_curve(_short("x^2"), cache=sweep_cache)


def test_short_sweep_rows(short_curve):
    assert isinstance(short_curve, ResponseCurve)
    assert short_curve.rows.shape == (5, len(COLUMNS))
    assert np.all(np.diff(short_curve.t) > 0)
    exact = 0.5 + 3 * short_curve.t**2 / 8
    for col in ("value_zeta", "value_ulam", "value_oracle"):
        assert np.max(np.abs(short_curve.column(col) - exact)) <= 1e-3
    for col in ("lambda_zeta", "lambda_ulam"):
        assert np.max(np.abs(short_curve.column(col) - 1)) <= 1e-3
    assert not short_curve.flags


def test_short_sweep_metadata(short_curve):
    md = short_curve.metadata
    assert md["P"] == 14 and md["N"] == 1024
    assert md["method_tolerance"] == 1e-3
    assert len(md["diagnostics"]) == 5
    assert all(r["theta_inv"] > 1 for r in md["diagnostics"])


def test_t_zero_row_is_base(short_curve):
    row = short_curve.rows[short_curve.t == 0.0][0]
    assert row[COLUMNS.index("value_oracle")] == pytest.approx(0.5, abs=1e-14)
    assert row[COLUMNS.index("value_zeta")] == pytest.approx(0.5, abs=1e-3)


def test_descending_sweep_matches(short_curve, sweep_cache):
    down = response_curve(_short("x^2", grid=(0.1, -0.1, 5)), cache=sweep_cache)
    assert np.array_equal(down.t, short_curve.t)
    assert np.max(np.abs(down.rows - short_curve.rows)) <= 1e-9


def test_sweep_without_cache_agrees(short_curve):
    # cached tables may come from another continuation path: equal up to rounding
    fresh = response_curve(_short("x^2", methods=["zeta", "oracle"]))
    for col in ("value_zeta", "value_oracle", "lambda_zeta"):
        assert np.max(np.abs(fresh.column(col) - short_curve.column(col))) < 1e-12
    assert np.all(np.isnan(fresh.column("value_ulam")))


def test_direct_family_sweep():
    cfg = load_config("chebyshev.json").with_overrides(grid=(-0.0, 0.0, 3), P=12, N=512)
    curve = response_curve(cfg)
    assert np.all(np.isnan(curve.column("value_oracle")))
    assert np.allclose(curve.column("value_zeta"), 0.5, atol=1e-3)


def test_attracting_family_blocks_sweep():
    cfg = load_config("attracting_fixed_point.json")
    with pytest.raises(HypothesisViolation, match="non-repelling"):
        response_curve(cfg)


def test_force_skips_diagnostics():
    cfg = load_config("attracting_fixed_point.json").with_overrides(methods=("ulam",), N=256)
    curve = response_curve(cfg, force=True)
    assert "diagnostics" not in curve.metadata
    assert curve.metadata["forced"]
    assert np.all(np.isfinite(curve.column("value_ulam")))


def test_flags_on_disagreement(monkeypatch):
    import srbzeta.response as rmod

    real = rmod.exact_conjugacy_oracle
    monkeypatch.setattr(rmod, "exact_conjugacy_oracle", lambda *a, **k: real(*a, **k) + 0.5)
    curve = response_curve(_short("x", methods=["ulam", "oracle"], N=256))
    assert len(curve.flags) == 5
    assert "differ" in curve.flags[0]


def _curve(t, y):
    rows = np.full((t.size, len(COLUMNS)), np.nan)
    rows[:, 0] = t
    rows[:, 1] = y
    return ResponseCurve(rows, ("zeta",))


def test_analyticity_recovers_polynomial():
    t = np.linspace(-0.1, 0.1, 21)
    rep = analyticity_report(_curve(t, 0.5 + 0.375 * t**2), max_degree=4)
    c = rep.coefficients[4]
    assert c[0] == pytest.approx(0.5, abs=1e-12)
    assert c[2] == pytest.approx(0.375, abs=1e-9)
    assert max(abs(c[1]), abs(c[3]), abs(c[4])) < 1e-6
    assert rep.verdict.startswith("consistent")


def test_analyticity_residuals_non_increasing(rng):
    t = np.linspace(-0.1, 0.1, 21)
    y = np.sin(3 * t) + 1e-6 * rng.standard_normal(t.size)
    rep = analyticity_report(_curve(t, y), max_degree=5)
    assert np.all(np.diff(rep.residuals) <= 1e-15)
    assert rep.degrees == tuple(range(6))


def test_analyticity_constant_curve():
    t = np.linspace(-0.1, 0.1, 11)
    rep = analyticity_report(_curve(t, np.full(t.size, 0.25)), max_degree=3)
    assert rep.residuals[0] < 1e-15
    assert rep.verdict.startswith("consistent")


def test_analyticity_non_analytic_curve_inconclusive():
    t = np.linspace(-0.1, 0.1, 21)
    rep = analyticity_report(_curve(t, np.abs(t) ** 0.5), max_degree=4)
    assert rep.residuals[-1] > 1e-3


def test_analyticity_needs_enough_points():
    t = np.linspace(-0.1, 0.1, 5)
    with pytest.raises(ConfigError):
        analyticity_report(_curve(t, t), max_degree=4)


def test_analyticity_ill_conditioned():
    t = np.linspace(-0.1, 0.1, 40)
    with pytest.raises(NumericalFailure):
        analyticity_report(_curve(t, t), max_degree=30)


def test_threads_env(monkeypatch, sweep_cache, short_curve):
    monkeypatch.setenv("RESPONSE_THREADS", "2")
    curve = response_curve(_short("x^2"), cache=sweep_cache)
    assert np.max(np.abs(curve.rows - short_curve.rows)) <= 1e-9
    monkeypatch.setenv("RESPONSE_THREADS", "many")
    with pytest.raises(ConfigError):
        response_curve(_short("x^2"), cache=sweep_cache)


def test_config_object_type():
    assert isinstance(_short("x"), SweepConfig)
