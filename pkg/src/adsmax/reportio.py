"""Deterministic persistence for solver fields, holonomy records, and sweeps.

Everything written here is reproducible byte for byte from the same inputs:
floats are rendered with %.17g (enough digits to round-trip a double), keys
are sorted, and no timestamps or machine identifiers are embedded.  Each
artifact carries the sha256 hash of the configuration that produced it, so a
results directory stays auditable after the fact.

Field files are two-block text: a one-line JSON header (chart, grid, solver
settings), the solution values row by row, then the super-solution rows.
A companion ``<name>.meta.json`` record carries the residual and bracket
diagnostics.  Holonomy results and sweep tables are single JSON documents;
sweeps additionally get a flat CSV with one row per family member.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .domains import ConformalChart
from .errors import ConfigError
from .gauss import ConformalFactorField, Grid
from .frames import HolonomyResult

SCHEMA_VERSION = 1

_FIELD_MAGIC = "adsmax-field"


def fmt_g17(x: float) -> str:
    """Render a float with 17 significant digits (exact double round-trip)."""
    return format(float(x), ".17g")


def complex_pair(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def matrix_entries(m: np.ndarray) -> list:
    """Nested lists for a complex or real matrix, complex entries as pairs."""
    m = np.asarray(m)
    if np.iscomplexobj(m):
        return [[complex_pair(z) for z in row] for row in m]
    return [[float(x) for x in row] for row in m]


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def config_sha256(obj: Mapping) -> str:
    """Hash of the canonical JSON form of a configuration mapping."""
    return hashlib.sha256(canonical_json(obj).encode("ascii")).hexdigest()


def dump_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(canonical_json(obj) + "\n", encoding="ascii")
    return path


def load_json(path):
    return json.loads(Path(path).read_text(encoding="ascii"))


# ---------------------------------------------------------------------------
# Conformal factor fields.


def _chart_header(chart: ConformalChart) -> dict:
    return {
        "kind": chart.kind,
        "c": chart.c,
        "t": complex_pair(chart.t),
        "coordinate": chart.coordinate,
    }


def _chart_from_header(rec: Mapping) -> ConformalChart:
    t = complex(rec["t"][0], rec["t"][1])
    return ConformalChart(rec["kind"], rec["c"], t, rec["coordinate"])


def write_field(field: ConformalFactorField, path, config_hash: str = "") -> tuple:
    """Write a solved field as text grid file plus metadata record.

    Returns (field_path, meta_path).  The main file is self-describing: the
    header line holds chart, grid, tolerance, and boundary mode; the value
    blocks hold v and the super-solution V row-major at 17 digits.
    """
    path = Path(path)
    grid = field.grid
    header = {
        "magic": _FIELD_MAGIC,
        "schema_version": SCHEMA_VERSION,
        "chart": _chart_header(grid.chart),
        "grid": {
            "n_rho": grid.n_rho,
            "n_theta": grid.n_theta,
            "rho_lo": grid.rho_lo,
            "rho_hi": grid.rho_hi,
        },
        "tol": field.tol,
        "bc_mode": list(field.bc_mode),
        "config_sha256": config_hash,
    }
    lines = [canonical_json(header)]
    for block in (field.values, field.bracket_upper):
        for row in np.asarray(block):
            lines.append(" ".join(fmt_g17(x) for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")

    meta_path = path.with_suffix(path.suffix + ".meta.json")
    meta = {
        "schema_version": SCHEMA_VERSION,
        "residual_sup": field.residual_sup,
        "bracket_constant": field.bracket_constant,
        "bracket_defect": field.bracket_defect(),
        "newton_iterations": field.newton_iterations,
        "config_sha256": config_hash,
    }
    dump_json(meta_path, meta)
    return path, meta_path


def read_field(path) -> ConformalFactorField:
    """Rebuild a ConformalFactorField from write_field output."""
    path = Path(path)
    lines = path.read_text(encoding="ascii").splitlines()
    try:
        header = json.loads(lines[0])
    except (IndexError, json.JSONDecodeError) as exc:
        raise ConfigError(f"not a field file: {path}") from exc
    if header.get("magic") != _FIELD_MAGIC:
        raise ConfigError(f"not a field file: {path}")
    g = header["grid"]
    grid = Grid(_chart_from_header(header["chart"]), g["n_rho"], g["n_theta"],
                g["rho_lo"], g["rho_hi"])
    expect = 2 * grid.n_rho
    body = [row for row in lines[1:] if row.strip()]
    if len(body) != expect:
        raise ConfigError(
            f"field file {path} has {len(body)} value rows, expected {expect}"
        )
    data = np.array([[float(x) for x in row.split()] for row in body])
    if data.shape[1] != grid.n_theta:
        raise ConfigError(
            f"field file {path} has {data.shape[1]} columns, expected {grid.n_theta}"
        )
    values = data[: grid.n_rho]
    upper = data[grid.n_rho :]

    meta_path = path.with_suffix(path.suffix + ".meta.json")
    meta = load_json(meta_path)
    return ConformalFactorField(
        grid=grid,
        values=values,
        residual_sup=meta["residual_sup"],
        bracket_upper=upper,
        bracket_constant=meta["bracket_constant"],
        bc_mode=tuple(header["bc_mode"]),
        newton_iterations=meta["newton_iterations"],
        tol=header["tol"],
    )


# ---------------------------------------------------------------------------
# Holonomy records.


def holonomy_record(result: HolonomyResult, config_hash: str = "") -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "loop": {
            "base_rho": result.base_rho,
            "periods": result.periods,
        },
        "rho": matrix_entries(result.matrix),
        "h_factor": matrix_entries(result.h_factor),
        "d_factor": matrix_entries(result.d_factor),
        "diagnostics": {
            "realness_defect": result.realness_defect,
            "gram_drift": result.gram_drift,
            "loop_length": result.loop_length,
            "steps": result.steps,
        },
        "config_sha256": config_hash,
    }


def write_holonomy(result: HolonomyResult, path, config_hash: str = "") -> Path:
    return dump_json(path, holonomy_record(result, config_hash))


def read_holonomy_matrix(path) -> np.ndarray:
    rec = load_json(path)
    return np.array(rec["rho"], dtype=float)


# ---------------------------------------------------------------------------
# CSV emission.


def write_csv(path, columns: Sequence[str], rows: Sequence[Sequence],
              config_hash: str = "") -> Path:
    """Flat CSV with a comment line carrying schema and config hash.

    Cells are formatted here: floats via fmt_g17, ints and strings as is.
    Readers that skip '#' lines (numpy, pandas) see a plain header + data.
    """
    path = Path(path)
    out = [f"# adsmax schema {SCHEMA_VERSION} config sha256:{config_hash}"]
    out.append(",".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ConfigError(
                f"csv row has {len(row)} cells for {len(columns)} columns"
            )
        cells = []
        for cell in row:
            if isinstance(cell, (bool, np.bool_)):
                cells.append(str(int(cell)))
            elif isinstance(cell, (int, np.integer)):
                cells.append(str(int(cell)))
            elif isinstance(cell, str):
                cells.append(cell)
            else:
                cells.append(fmt_g17(cell))
        out.append(",".join(cells))
    path.write_text("\n".join(out) + "\n", encoding="ascii")
    return path
