"""JSON sweep configuration.

Schema (all keys but ``family`` optional)::

    {
      "family": {"kind": "direct", "coefficients": [[1, 0, -2]], "window": [-1, 1]}
             or {"kind": "conjugated", "base": {"coefficients": [[1, 0, -2]]},
                 "motion": {"g": [1.0]}, "window": [-0.2, 0.2]},
      "observable": {"kind": "polynomial", "coefficients": [0, 0, 1]}
                 or {"kind": "log-abs-derivative"},
      "grid": {"min": -0.1, "max": 0.1, "count": 21},
      "methods": ["zeta", "ulam", "oracle"],
      "P": 16, "N": 4096, "safety": 0.9,
      "diagnostics": {"n_max": 40, "p_max": 12, "eta_n": 12},
      "max_degree": 4,
      "continuation": true,
      "outputs": {"curve": "curve.csv", "report": "report.json"}
    }

Family coefficients are indexed ``[power of t][power of x]``. A grid with
min > max is swept in descending order; rows are always written ascending.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .orbits import MAX_PERIOD
from .ulam import MAX_BINS
from .unimodal import (
    AnalyticMotion,
    ConjugatedFamily,
    MapDescriptor,
    Observable,
    PolynomialFamily,
    chebyshev,
)

METHODS = ("zeta", "ulam", "oracle")
MIN_BINS = 64


@dataclass(frozen=True)
class SweepConfig:
    family: MapDescriptor
    observable: Observable
    grid: tuple[float, float, int]
    methods: tuple[str, ...] = ("zeta", "ulam")
    P: int = 16
    N: int = 4096
    safety: float = 0.9
    diagnostics: dict = field(default_factory=lambda: {"n_max": 40, "p_max": 12, "eta_n": 12})
    max_degree: int = 4
    continuation: bool = True
    outputs: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi, count = self.grid
        if int(count) != count or count < 3:
            raise ConfigError("grid count must be an integer >= 3")
        for t in (lo, hi):
            self.family.check_t(t)
        bad = set(self.methods) - set(METHODS)
        if bad or not self.methods:
            raise ConfigError(f"methods must be a non-empty subset of {METHODS}")
        if "oracle" in self.methods and not isinstance(self.family, ConjugatedFamily):
            raise ConfigError("the conjugacy oracle needs a conjugated family")
        if not 1 <= self.P <= MAX_PERIOD:
            raise ConfigError(f"P must be in 1..{MAX_PERIOD}")
        if self.N < MIN_BINS or self.N > MAX_BINS or self.N & (self.N - 1):
            raise ConfigError(f"N must be a power of two in [{MIN_BINS}, {MAX_BINS}]")
        if not 0 < self.safety < 1:
            raise ConfigError("safety must lie in (0, 1)")
        if self.max_degree < 0:
            raise ConfigError("max_degree must be >= 0")

    @property
    def ts(self):
        """Grid in sweep order."""
        lo, hi, count = self.grid
        ts = np.linspace(min(lo, hi), max(lo, hi), int(count))
        return ts[::-1] if lo > hi else ts

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self


def _floats(value, what):
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what} must be a list of numbers") from exc


def _polynomial_family(d, window=None):
    coeffs = d.get("coefficients")
    if coeffs is None:
        raise ConfigError("family needs 'coefficients'")
    if coeffs and not isinstance(coeffs[0], (list, tuple)):
        coeffs = [coeffs]
    rows = tuple(_floats(r, "family coefficients") for r in coeffs)
    window = d.get("window", window)
    return PolynomialFamily(rows, _floats(window, "window") if window else (-1.0, 1.0))


def family_from_dict(d) -> MapDescriptor:
    if not isinstance(d, dict):
        raise ConfigError("family must be an object")
    kind = d.get("kind", "direct")
    if kind == "chebyshev":
        return chebyshev()
    if kind == "direct":
        return _polynomial_family(d)
    if kind == "conjugated":
        base = d.get("base", {"coefficients": [[1.0, 0.0, -2.0]]})
        motion = d.get("motion")
        if not isinstance(motion, dict) or "g" not in motion:
            raise ConfigError("conjugated family needs motion.g")
        window = d.get("window")
        mwin = motion.get("window", window or (-0.25, 0.25))
        mot = AnalyticMotion(_floats(motion["g"], "motion.g"), _floats(mwin, "motion window"))
        return ConjugatedFamily(_polynomial_family(base), mot,
                                _floats(window, "window") if window else None)
    raise ConfigError(f"unknown family kind {kind!r}")


def family_to_dict(m: MapDescriptor) -> dict:
    if isinstance(m, ConjugatedFamily):
        return {
            "kind": "conjugated",
            "base": {"coefficients": [list(r) for r in m.base.coefficients]},
            "motion": {"g": list(m.motion.g), "window": list(m.motion.window)},
            "window": list(m.window),
        }
    return {"kind": "direct", "coefficients": [list(r) for r in m.coefficients],
            "window": list(m.window)}


def observable_from_dict(d) -> Observable:
    if d is None:
        return Observable.polynomial([0.0, 0.0, 1.0])
    if isinstance(d, str):
        shorthand = {"x": [0, 1], "x^2": [0, 0, 1], "x2": [0, 0, 1], "x^4": [0, 0, 0, 0, 1]}
        if d in ("log|f'|", "log-abs-derivative"):
            return Observable.log_abs_derivative()
        if d in shorthand:
            return Observable.polynomial(shorthand[d])
        raise ConfigError(f"unknown observable {d!r}")
    kind = d.get("kind", "polynomial")
    if kind == "log-abs-derivative":
        return Observable.log_abs_derivative()
    return Observable(kind, _floats(d.get("coefficients", ()), "observable coefficients"))


def observable_to_dict(psi: Observable) -> dict:
    if psi.kind == "log-abs-derivative":
        return {"kind": psi.kind}
    return {"kind": psi.kind, "coefficients": list(psi.coefficients)}


def parse_grid(text):
    """'MIN:MAX:COUNT' -> (min, max, count)."""
    try:
        lo, hi, count = text.split(":")
        return float(lo), float(hi), int(count)
    except ValueError as exc:
        raise ConfigError(f"grid must look like MIN:MAX:COUNT, got {text!r}") from exc


def config_from_dict(d) -> SweepConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    known = {"family", "observable", "grid", "methods", "P", "N", "safety", "diagnostics",
             "max_degree", "continuation", "outputs", "description"}
    extra = set(d) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    if "family" not in d:
        raise ConfigError("config needs a 'family'")
    family = family_from_dict(d["family"])
    grid = d.get("grid")
    if grid is None:
        lo, hi = family.window
        grid = (lo, hi, 11)
    elif isinstance(grid, str):
        grid = parse_grid(grid)
    elif isinstance(grid, dict):
        try:
            grid = (float(grid["min"]), float(grid["max"]), int(grid["count"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("grid needs numeric min, max and count") from exc
    else:
        raise ConfigError("grid must be an object or 'MIN:MAX:COUNT'")
    methods = d.get("methods")
    if methods is None:
        methods = ("zeta", "ulam", "oracle") if isinstance(family, ConjugatedFamily) \
            else ("zeta", "ulam")
    diag = {"n_max": 40, "p_max": 12, "eta_n": 12}
    diag.update(d.get("diagnostics", {}))
    try:
        return SweepConfig(
            family=family,
            observable=observable_from_dict(d.get("observable")),
            grid=grid,
            methods=tuple(methods),
            P=int(d.get("P", 16)),
            N=int(d.get("N", 4096)),
            safety=float(d.get("safety", 0.9)),
            diagnostics={k: int(v) for k, v in diag.items()},
            max_degree=int(d.get("max_degree", 4)),
            continuation=bool(d.get("continuation", True)),
            outputs=dict(d.get("outputs", {})),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def config_to_dict(cfg: SweepConfig) -> dict:
    lo, hi, count = cfg.grid
    return {
        "family": family_to_dict(cfg.family),
        "observable": observable_to_dict(cfg.observable),
        "grid": {"min": lo, "max": hi, "count": int(count)},
        "methods": list(cfg.methods),
        "P": cfg.P,
        "N": cfg.N,
        "safety": cfg.safety,
        "diagnostics": dict(cfg.diagnostics),
        "max_degree": cfg.max_degree,
        "continuation": cfg.continuation,
        "outputs": dict(cfg.outputs),
    }


def load_config(path) -> SweepConfig:
    """Read a config file; a bare name is also looked up among the shipped ones."""
    p = Path(path)
    if not p.exists():
        shipped = Path(__file__).parent / "data" / p.name
        if not shipped.exists():
            raise ConfigError(f"config file {path} not found")
        p = shipped
    try:
        d = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from exc
    return config_from_dict(d)
