"""Run configuration: strict TOML parsing with full defaults.

Unknown keys are rejected by name rather than ignored, so a typo cannot
silently fall back to a default and poison an experiment record.  The
merged configuration (defaults plus file) is what gets hashed into every
artifact, making outputs traceable to their exact settings.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib as _toml
except ImportError:
    import tomli as _toml

from .domains import (
    ConformalChart,
    MetricDensity,
    QuadDiff,
    grafting_density,
    hyperbolic_density,
    perturbed_density,
)
from .errors import ConfigError
from .gauss import Grid
from .pinch import CUSP_DEPTH, SOLVE_MARGIN, PinchFamily
from . import reportio

_DENSITY_FLAVORS = {
    "hyperbolic": hyperbolic_density,
    "grafting": grafting_density,
    "perturbed": perturbed_density,
}

DEFAULTS = {
    "output": {
        "directory": "",
    },
    "chart": {
        "kind": "annulus",
        "t": [0.01, 0.0],
        "c": 0.5,
    },
    "density": {
        "flavor": "hyperbolic",
    },
    "quadratic": {
        "coefficients": [[-2, 1.0, 0.0]],
        "truncation": 8,
    },
    "grid": {
        "n_rho": 64,
        "n_theta": 32,
        "rho_lo": None,
        "rho_hi": None,
    },
    "solver": {
        "tol": 1e-10,
        "max_iter": 60,
        "bc": "auto",
    },
    "frame": {
        "tol": 1e-10,
        "realness_tol": 1e-6,
        "base_rho": None,
        "periods": 1,
        "rect_center": None,
        "rect_width": 0.5,
        "rect_height": 1.0,
    },
    "sweep": {
        "c": 0.5,
        "residue": [1.0, 0.0],
        "extra_terms": [],
        "k_min": 1,
        "k_max": 12,
        "window": [-1.3, -0.8],
        "threshold": 6,
        "n_rho": 257,
        "n_theta": 32,
        "tol": 1e-10,
        "frame_tol": 1e-11,
    },
}


def _merge(section: str, given: dict) -> dict:
    base = dict(DEFAULTS[section])
    for key, value in given.items():
        if key not in base:
            raise ConfigError(f"unknown config key {section}.{key}")
        base[key] = value
    return base


def _as_complex(value, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(x, (int, float)) for x in value)):
        return complex(value[0], value[1])
    raise ConfigError(f"{where} must be a number or a [re, im] pair")


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number")
    return float(value)


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer")
    return value


@dataclass(frozen=True)
class RunConfig:
    """Validated, fully defaulted settings for one command run."""

    output: dict
    chart: dict
    density: dict
    quadratic: dict
    grid: dict
    solver: dict
    frame: dict
    sweep: dict

    def as_dict(self) -> dict:
        return {
            "output": self.output,
            "chart": self.chart,
            "density": self.density,
            "quadratic": self.quadratic,
            "grid": self.grid,
            "solver": self.solver,
            "frame": self.frame,
            "sweep": self.sweep,
        }

    def sha256(self) -> str:
        return reportio.config_sha256(self.as_dict())

    # -- builders ----------------------------------------------------------

    def build_chart(self) -> ConformalChart:
        kind = self.chart["kind"]
        c = _as_float(self.chart["c"], "chart.c")
        if kind == "cusp":
            return ConformalChart.cusp(c)
        if kind == "annulus":
            t = _as_complex(self.chart["t"], "chart.t")
            return ConformalChart.annulus(t, c)
        raise ConfigError(f"chart.kind must be 'annulus' or 'cusp', got {kind!r}")

    def build_density(self, chart: ConformalChart) -> MetricDensity:
        flavor = self.density["flavor"]
        if flavor not in _DENSITY_FLAVORS:
            raise ConfigError(f"unknown density.flavor {flavor!r}")
        return _DENSITY_FLAVORS[flavor](chart)

    def build_quaddiff(self, chart: ConformalChart) -> QuadDiff:
        coeffs = {}
        rows = self.quadratic["coefficients"]
        if not isinstance(rows, list):
            raise ConfigError("quadratic.coefficients must be a list of rows")
        for row in rows:
            if not (isinstance(row, list) and len(row) == 3):
                raise ConfigError(
                    "quadratic.coefficients rows must be [order, re, im]"
                )
            order = _as_int(row[0], "quadratic coefficient order")
            coeffs[order] = complex(
                _as_float(row[1], "coefficient real part"),
                _as_float(row[2], "coefficient imaginary part"),
            )
        trunc = _as_int(self.quadratic["truncation"], "quadratic.truncation")
        return QuadDiff.from_dict(chart, coeffs, truncation_degree=trunc)

    def build_grid(self, chart: ConformalChart) -> Grid:
        n_rho = _as_int(self.grid["n_rho"], "grid.n_rho")
        n_theta = _as_int(self.grid["n_theta"], "grid.n_theta")
        rho_lo = self.grid["rho_lo"]
        rho_hi = self.grid["rho_hi"]
        if rho_lo is None:
            rho_lo = CUSP_DEPTH if chart.kind == "cusp" else chart.rho_min + SOLVE_MARGIN
        else:
            rho_lo = _as_float(rho_lo, "grid.rho_lo")
        if rho_hi is None:
            rho_hi = chart.rho_max - SOLVE_MARGIN
        else:
            rho_hi = _as_float(rho_hi, "grid.rho_hi")
        return Grid(chart, n_rho, n_theta, rho_lo, rho_hi)

    def solver_bc(self):
        bc = self.solver["bc"]
        if isinstance(bc, str):
            if bc in ("auto", "fuchsian"):
                return bc
            raise ConfigError(f"solver.bc must be 'auto', 'fuchsian', or a number, got {bc!r}")
        return _as_float(bc, "solver.bc")

    def solver_tol(self) -> float:
        return _as_float(self.solver["tol"], "solver.tol")

    def solver_max_iter(self) -> int:
        return _as_int(self.solver["max_iter"], "solver.max_iter")

    def frame_base_rho(self, chart: ConformalChart) -> float:
        base = self.frame["base_rho"]
        if base is not None:
            return _as_float(base, "frame.base_rho")
        if chart.kind == "annulus":
            return chart.core_rho
        raise ConfigError("frame.base_rho is required on a cusp chart")

    def build_family(self) -> PinchFamily:
        s = self.sweep
        c = _as_float(s["c"], "sweep.c")
        k_min = _as_int(s["k_min"], "sweep.k_min")
        k_max = _as_int(s["k_max"], "sweep.k_max")
        if k_max < k_min:
            raise ConfigError("sweep.k_max must be >= sweep.k_min")
        window = s["window"]
        if not (isinstance(window, list) and len(window) == 2):
            raise ConfigError("sweep.window must be [rho_a, rho_b]")
        extra = []
        for row in s["extra_terms"]:
            if not (isinstance(row, list) and len(row) == 4):
                raise ConfigError(
                    "sweep.extra_terms rows must be [order, re, im, mode]"
                )
            extra.append((
                _as_int(row[0], "extra term order"),
                complex(_as_float(row[1], "extra term real part"),
                        _as_float(row[2], "extra term imaginary part")),
                row[3],
            ))
        return PinchFamily.default(
            c=c,
            residue=_as_complex(s["residue"], "sweep.residue"),
            k_min=k_min,
            k_max=k_max,
            window=(
                _as_float(window[0], "sweep.window[0]"),
                _as_float(window[1], "sweep.window[1]"),
            ),
            extra_terms=tuple(extra),
        )

    def sweep_opts(self) -> dict:
        s = self.sweep
        return {
            "n_rho": _as_int(s["n_rho"], "sweep.n_rho"),
            "n_theta": _as_int(s["n_theta"], "sweep.n_theta"),
            "tol": _as_float(s["tol"], "sweep.tol"),
            "frame_tol": _as_float(s["frame_tol"], "sweep.frame_tol"),
            "threshold": _as_int(s["threshold"], "sweep.threshold"),
        }


def load_config(path=None) -> RunConfig:
    """Parse a TOML config file; None means all defaults."""
    raw = {}
    if path is not None:
        path = Path(path)
        try:
            raw = _toml.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except _toml.TOMLDecodeError as exc:
            raise ConfigError(f"config {path} is not valid TOML: {exc}") from exc
    for section in raw:
        if section not in DEFAULTS:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(raw[section], dict):
            raise ConfigError(f"config section [{section}] must be a table")
    merged = {
        section: _merge(section, raw.get(section, {})) for section in DEFAULTS
    }
    return RunConfig(**merged)
