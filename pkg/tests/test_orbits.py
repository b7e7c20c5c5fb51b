import numpy as np
import pytest

from srbzeta.errors import ConfigError
from srbzeta.orbits import (
    Itinerary,
    continue_orbit,
    cycles_from_table,
    find_periodic_points,
    inverse_branch,
    multiplier,
    periodic_table,
    rotate,
    word_index,
    word_string,
)
from srbzeta.unimodal import apply_motion


@pytest.mark.parametrize("side, y, expected", [("R", 0.5, 0.5), ("R", 1.0, 0.0), ("L", -1.0, -1.0),
                                               ("L", 0.5, -0.5)])
def test_inverse_branch(cheb, side, y, expected):
    assert inverse_branch(cheb, 0.0, side, y) == pytest.approx(expected, abs=1e-15)


def test_inverse_branch_outside_image(attracting):
    with pytest.raises(ValueError):
        inverse_branch(attracting, 0.0, "R", 0.9)


def test_word_helpers():
    assert word_string(0b011, 3) == "LRR"
    assert word_index("LRR") == 3
    assert rotate(0b011, 3) == 0b110
    assert Itinerary("RRL").canonical() == Itinerary("LRR")
    assert Itinerary("RLR").same_cycle(Itinerary("LRR"))
    with pytest.raises(ValueError):
        Itinerary("LXR")


def test_fixed_points(cheb):
    orbits = find_periodic_points(cheb, 0.0, 1)
    pts = sorted(o.points[0] for o in orbits)
    assert pts == pytest.approx([-1.0, 0.5], abs=1e-15)


def test_period_two(cheb):
    orbits = find_periodic_points(cheb, 0.0, 2)
    pts = sorted(x for o in orbits for x in o.points)
    expected = sorted([-1.0, 0.5, (1 + np.sqrt(5)) / 4, (1 - np.sqrt(5)) / 4])
    assert pts == pytest.approx(expected, abs=1e-14)
    two = [o for o in orbits if o.period == 2]
    assert len(two) == 1
    assert multiplier(cheb, 0.0, two[0]) == pytest.approx(-4.0, rel=1e-13)


@pytest.mark.parametrize("x0, expected", [(0.5, -2.0), (-1.0, 4.0)])
def test_fixed_point_multipliers(cheb, x0, expected):
    orbit = min(find_periodic_points(cheb, 0.0, 1), key=lambda o: abs(o.points[0] - x0))
    assert multiplier(cheb, 0.0, orbit) == pytest.approx(expected, rel=1e-14)
    assert orbit.multiplier == pytest.approx(expected, rel=1e-14)


def test_completeness(cheb_tables):
    for p in range(1, 13):
        assert cheb_tables[p].count() == 2**p


def test_completeness_at_cap(cheb_tables):
    assert cheb_tables[20].count() == 2**20


def test_points_match_angle_map(cheb_tables):
    # fixed points of f^p are -cos(2 pi k / (2^p +- 1))
    p = 8
    pts = np.sort(cheb_tables[p].points)
    n = 2**p
    angles = np.concatenate([2 * np.pi * np.arange(n) / (n - 1), 2 * np.pi * np.arange(n) / (n + 1)])
    expected = np.unique(np.round(-np.cos(angles), 13))
    assert pts.size == expected.size
    assert np.max(np.abs(pts - expected)) < 1e-12


def test_multiplier_uniformity(cheb_tables):
    for p in range(1, 11):
        table = cheb_tables[p]
        root = np.exp(table.log_abs_multiplier / p)
        assert np.min(root) == pytest.approx(2.0, abs=1e-8)
        interior = table.points > -1
        assert np.allclose(np.abs(table.log_abs_multiplier[interior]), p * np.log(2), atol=1e-8)


def test_residual_contract(cheb):
    for p in (4, 9, 12):
        for o in find_periodic_points(cheb, 0.0, p):
            x = np.array([o.points[0]])
            y, _ = cheb.iterate(0.0, x, o.period)
            assert abs(y[0] - x[0]) <= 1e-11
            if o.period > 1:
                assert np.min(np.diff(np.sort(o.points))) > 1e-9


def test_primitive_periods_attributed(cheb):
    orbits = find_periodic_points(cheb, 0.0, 4)
    periods = sorted(o.period for o in orbits)
    # 2 fixed points, 1 two-cycle, 3 four-cycles
    assert periods == [1, 1, 2, 4, 4, 4]
    assert sum(o.period for o in orbits) == 16


def test_period_cap(cheb):
    with pytest.raises(ConfigError):
        periodic_table(cheb, 0.0, 21)


def test_find_tol_floor(cheb):
    with pytest.raises(ValueError):
        find_periodic_points(cheb, 0.0, 2, tol=1e-14)


def test_attracting_fixture_orbits(attracting):
    orbits = find_periodic_points(attracting, 0.0, 1)
    pts = sorted(o.points[0] for o in orbits)
    assert pts == pytest.approx([-1.0, 3 / 13], abs=1e-14)
    inner = [o for o in orbits if o.points[0] > 0][0]
    assert inner.multiplier == pytest.approx(-0.6, rel=1e-13)


def test_continue_orbit_fixed_point(cheb, conj):
    orbit = [o for o in find_periodic_points(conj, 0.0, 1) if o.points[0] > 0][0]
    path = continue_orbit(conj, orbit, 0.0, 0.1, steps=5)
    t, o = path[-1]
    assert t == pytest.approx(0.1)
    assert o.points[0] == pytest.approx(0.575, abs=1e-12)


def test_continue_orbit_zero_length(conj):
    orbit = find_periodic_points(conj, 0.0, 2)[-1]
    path = continue_orbit(conj, orbit, 0.0, 0.0)
    assert path == [(0.0, orbit)]


@pytest.mark.parametrize("t_to", [0.2, -0.15])
def test_motion_consistency(cheb, conj, motion, t_to):
    for o in find_periodic_points(conj, 0.0, 5):
        if o.period < 3:
            continue
        _, end = continue_orbit(conj, o, 0.0, t_to, steps=4)[-1]
        expected = apply_motion(motion, t_to, np.array(o.points))
        assert np.max(np.abs(np.array(end.points) - expected)) <= 1e-9
        assert end.residual <= 1e-10


def test_conjugated_table_matches_motion(cheb_tables, conj, motion):
    t = 0.17
    table = periodic_table(conj, t, 10)
    assert table.count() == 2**10
    expected = motion.h(t, cheb_tables[10].points)
    assert np.max(np.abs(table.points - expected)) < 1e-12


def test_cycles_from_table_multipliers(cheb_tables, cheb):
    cycles = cycles_from_table(cheb, cheb_tables[6])
    for o in cycles:
        assert o.multiplier == pytest.approx(multiplier(cheb, 0.0, o), rel=1e-12)
