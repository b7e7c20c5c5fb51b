import json

import numpy as np
import pytest

from srbzeta import io
from srbzeta.config import (
    config_from_dict,
    config_to_dict,
    family_from_dict,
    family_to_dict,
    load_config,
    observable_from_dict,
    parse_grid,
)
from srbzeta.errors import ConfigError, ParameterWindowError
from srbzeta.orbits import find_periodic_points
from srbzeta.response import COLUMNS, ResponseCurve
from srbzeta.unimodal import ConjugatedFamily, is_chebyshev

SHIPPED = ["chebyshev.json", "chebyshev_motion.json", "chebyshev_motion_x2.json",
           "attracting_fixed_point.json"]

BASE = {"family": {"kind": "chebyshev"}, "grid": {"min": 0, "max": 0, "count": 3}}


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_configs_load_and_roundtrip(name):
    cfg = load_config(name)
    again = config_from_dict(config_to_dict(cfg))
    assert again == cfg


def test_motion_config_contents():
    cfg = load_config("chebyshev_motion.json")
    assert isinstance(cfg.family, ConjugatedFamily)
    assert is_chebyshev(cfg.family.base)
    assert cfg.methods == ("zeta", "ulam", "oracle")
    assert len(cfg.ts) == 21
    assert cfg.ts[0] == pytest.approx(-0.1) and cfg.ts[-1] == pytest.approx(0.1)


def test_repo_configs_match_shipped():
    from pathlib import Path

    repo = Path(__file__).resolve().parents[1] / "configs"
    for name in SHIPPED:
        assert load_config(repo / name) == load_config(name)


def test_descending_grid_is_bitwise_reverse():
    up = config_from_dict({**BASE, "family": {"kind": "chebyshev"},
                           "grid": {"min": -0.1, "max": 0.1, "count": 21}})
    down = up.with_overrides(grid=(0.1, -0.1, 21))
    assert np.array_equal(up.ts, down.ts[::-1])


@pytest.mark.parametrize("patch, match", [
    ({"grid": {"min": 0, "max": 0, "count": 2}}, "count"),
    ({"grid": {"min": 0, "max": 2, "count": 5}}, "window"),
    ({"P": 21}, "P must"),
    ({"P": 0}, "P must"),
    ({"N": 1000}, "power of two"),
    ({"N": 32}, "power of two"),
    ({"safety": 1.0}, "safety"),
    ({"methods": ["zeta", "monte-carlo"]}, "methods"),
    ({"methods": ["oracle"]}, "conjugated"),
    ({"colour": "blue"}, "unknown config keys"),
    ({"grid": "0:1"}, "MIN:MAX:COUNT"),
])
def test_invalid_configs(patch, match):
    with pytest.raises(ConfigError, match=match):
        config_from_dict({**BASE, **patch})


def test_window_error_is_config_error():
    with pytest.raises(ParameterWindowError):
        config_from_dict({**BASE, "grid": {"min": -3, "max": 0, "count": 3}})


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(bad)


def test_family_roundtrip():
    d = {"kind": "conjugated", "motion": {"g": [1.0, 0.2]}, "window": [-0.1, 0.1]}
    fam = family_from_dict(d)
    assert family_from_dict(family_to_dict(fam)) == fam
    with pytest.raises(ConfigError):
        family_from_dict({"kind": "conjugated"})
    with pytest.raises(ConfigError):
        family_from_dict({"kind": "henon"})


def test_observable_shorthand():
    assert observable_from_dict("x^2") == observable_from_dict(
        {"kind": "polynomial", "coefficients": [0, 0, 1]})
    assert observable_from_dict("log|f'|").kind == "log-abs-derivative"
    with pytest.raises(ConfigError):
        observable_from_dict("tan")


def test_parse_grid():
    assert parse_grid("-0.1:0.1:21") == (-0.1, 0.1, 21)
    with pytest.raises(ConfigError):
        parse_grid("a:b:c")


def test_curve_csv_roundtrip(tmp_path):
    rows = np.array([[0.1, 1 / 3, np.nan, 0.05, 1.0, 1 - 1e-17]] * 3)
    curve = ResponseCurve(rows, ("zeta",))
    path = tmp_path / "c.csv"
    io.write_curve_csv(path, curve)
    text = path.read_text()
    assert text.splitlines()[0] == "# srb-zeta v1, " + ",".join(COLUMNS)
    back = io.read_curve_csv(path)
    assert np.array_equal(back, rows, equal_nan=True)


def test_read_rejects_foreign_csv(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        io.read_curve_csv(path)


def test_json_writer_handles_numpy_and_nan(tmp_path):
    path = tmp_path / "r.json"
    io.write_json(path, {"a": np.float64(np.nan), "b": np.arange(3), "c": np.bool_(True)})
    assert json.loads(path.read_text()) == {"a": None, "b": [0, 1, 2], "c": True}


def test_orbits_csv(tmp_path, cheb):
    path = tmp_path / "o.csv"
    io.write_orbits_csv(path, find_periodic_points(cheb, 0.0, 3), 0.0)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,period,itinerary,multiplier,residual,x0,x1,x2"
    assert len(lines) == 1 + 4  # two fixed points and two 3-cycles
