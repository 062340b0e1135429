"""Batch command line front end.

Five commands share one config file format: ``solve`` writes a conformal
factor field, ``frame`` integrates a contractible rectangle and reports
the monodromy defect, ``holonomy`` computes the core-loop holonomy record,
``sweep`` runs a pinching family and emits the defect tables, ``verify``
runs the cross-module invariant suite and prints a pass/fail table.

Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 I/O
failure.  On failure an ``error.json`` record is left in the output
directory when that directory is writable.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np
from scipy.interpolate import make_interp_spline

from .adscore import is_isometry, psl2_factors
from .config import RunConfig, load_config
from .domains import (
    ConformalChart,
    QuadDiff,
    collar_K,
    hyperbolic_density,
    metric_curvature,
    perturbed_density,
)
from .errors import (
    ConfigError,
    DomainError,
    FrameError,
    PoleOrderError,
    RulingError,
    SolverError,
)
from .frames import (
    STANDARD_FRAME,
    core_length,
    holonomy,
    integrate_frame,
    rectangle_loop,
    sampler_from_field,
    sampler_from_radial,
)
from .gauss import (
    Grid,
    SUB_SOLUTION,
    embedding_data,
    solve_2d,
    solve_radial,
    solve_radial_richardson,
)
from .pinch import emit_report, run_sweep
from . import reportio

OUT_ENV = "ADSMAX_OUT"

_NUMERIC_ERRORS = (DomainError, PoleOrderError, SolverError, FrameError,
                   RulingError, np.linalg.LinAlgError)


def _resolve_out(flag_value, cfg: RunConfig) -> Path:
    if flag_value:
        return Path(flag_value)
    if cfg.output["directory"]:
        return Path(cfg.output["directory"])
    env = os.environ.get(OUT_ENV, "")
    if env:
        return Path(env)
    return Path("adsmax-out")


def _solver_tol(cfg: RunConfig, override) -> float:
    return float(override) if override is not None else cfg.solver_tol()


def _build_sampler(cfg: RunConfig, tol: float):
    """Solve per config and wrap the result for frame integration.

    Pure-residue differentials go through the radial path with Richardson
    extrapolated values; anything theta-dependent gets the 2d solver.
    """
    chart = cfg.build_chart()
    h = cfg.build_density(chart)
    q = cfg.build_quaddiff(chart)
    grid = cfg.build_grid(chart)
    if q.is_pure_residue:
        rho, values, (coarse, fine) = solve_radial_richardson(
            h, q.residue, grid.n_rho, grid.rho_lo, grid.rho_hi,
            tol=tol, bc=cfg.solver_bc(),
        )
        sampler = sampler_from_radial(rho, values, h, q)
        residual = max(coarse.residual_sup, fine.residual_sup)
    else:
        field = solve_2d(h, q, grid, tol=tol, max_iter=cfg.solver_max_iter(),
                         bc=cfg.solver_bc())
        sampler = sampler_from_field(field, h, q)
        residual = field.residual_sup
    return chart, h, q, grid, sampler, residual


# ---------------------------------------------------------------------------
# Commands.


def cmd_solve(cfg: RunConfig, out: Path, tol_override, threads: int) -> int:
    tol = _solver_tol(cfg, tol_override)
    chart = cfg.build_chart()
    h = cfg.build_density(chart)
    q = cfg.build_quaddiff(chart)
    grid = cfg.build_grid(chart)
    field = solve_2d(h, q, grid, tol=tol, max_iter=cfg.solver_max_iter(),
                     bc=cfg.solver_bc())
    emb = embedding_data(field, h, q)
    out.mkdir(parents=True, exist_ok=True)
    path, meta = reportio.write_field(field, out / "field.txt", cfg.sha256())
    print(f"solved {grid.n_rho}x{grid.n_theta} on {chart.kind} chart: "
          f"residual {field.residual_sup:.3e}, {field.newton_iterations} Newton steps, "
          f"bracket constant {field.bracket_constant}")
    print(f"trace defect {emb.trace_defect:.3e}, "
          f"det identity defect {emb.det_identity_defect:.3e}")
    print(f"wrote {path} and {meta}")
    return 0


def cmd_frame(cfg: RunConfig, out: Path, tol_override, threads: int) -> int:
    tol = _solver_tol(cfg, tol_override)
    chart, h, q, grid, sampler, residual = _build_sampler(cfg, tol)
    center = cfg.frame["rect_center"]
    if center is None:
        center = complex(0.5 * (grid.rho_lo + grid.rho_hi), math.pi)
    else:
        center = complex(float(center[0]), float(center[1]))
    width = float(cfg.frame["rect_width"])
    height = float(cfg.frame["rect_height"])
    loop = rectangle_loop(center - complex(width / 2.0, height / 2.0), width, height)
    state = integrate_frame(sampler, loop, tol=float(cfg.frame["tol"]))
    defect = float(np.max(np.abs(state.matrix - STANDARD_FRAME)))
    record = {
        "schema_version": reportio.SCHEMA_VERSION,
        "loop": {
            "center": [center.real, center.imag],
            "width": width,
            "height": height,
        },
        "monodromy_defect": defect,
        "gram_drift": state.gram_drift,
        "path_length": state.path_length,
        "steps": state.steps,
        "residual_sup": residual,
        "config_sha256": cfg.sha256(),
    }
    out.mkdir(parents=True, exist_ok=True)
    path = reportio.dump_json(out / "frame.json", record)
    print(f"rectangle {width}x{height} at ({center.real:.4g}, {center.imag:.4g}): "
          f"monodromy defect {defect:.3e}, gram drift {state.gram_drift:.3e}, "
          f"{state.steps} steps")
    print(f"wrote {path}")
    return 0


def cmd_holonomy(cfg: RunConfig, out: Path, tol_override, threads: int) -> int:
    tol = _solver_tol(cfg, tol_override)
    chart, h, q, grid, sampler, residual = _build_sampler(cfg, tol)
    base_rho = cfg.frame_base_rho(chart)
    periods = int(cfg.frame["periods"])
    result = holonomy(sampler, rho=base_rho, periods=periods,
                      tol=float(cfg.frame["tol"]),
                      realness_tol=float(cfg.frame["realness_tol"]))
    record = reportio.holonomy_record(result, cfg.sha256())
    record["residual_sup"] = residual
    try:
        fac_a, fac_b = psl2_factors(result.matrix)
        record["factor_traces"] = [float(np.trace(fac_a)), float(np.trace(fac_b))]
    except RulingError:
        record["factor_traces"] = None
    out.mkdir(parents=True, exist_ok=True)
    path = reportio.dump_json(out / "holonomy.json", record)
    traces = record["factor_traces"]
    shown = ("factor traces "
             f"{traces[0]:.8g}, {traces[1]:.8g}" if traces else "factors unavailable")
    print(f"holonomy at rho = {base_rho:.4g}, {periods} period(s): "
          f"realness {result.realness_defect:.3e}, {shown}")
    print(f"wrote {path}")
    return 0


def cmd_sweep(cfg: RunConfig, out: Path, tol_override, threads: int) -> int:
    family = cfg.build_family()
    opts = cfg.sweep_opts()
    if tol_override is not None:
        opts["tol"] = float(tol_override)
    report = run_sweep(family, threads=threads, **opts)
    paths = emit_report(report, out)
    for row in report.rows:
        print(f"k={row.k:<3d} t={row.t:<12.6g} v_defect={row.v_defect:.6e} "
              f"holonomy_defect={row.holonomy_defect:.6e}")
    flagged = report.flagged_rows()
    if flagged:
        print(f"flagged rows (k): {', '.join(str(k) for k in flagged)}")
    else:
        print("no flagged rows")
    for path in paths:
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# Invariant suite.


def _verify_checks(cfg: RunConfig, tol_override):
    """Yield (name, measured, bound) rows for the cross-module invariants."""
    tol = _solver_tol(cfg, tol_override)
    rng = np.random.default_rng(20240817)
    checks = []

    chart = ConformalChart.annulus(0.01, 0.5)
    h = hyperbolic_density(chart)
    rho = rng.uniform(chart.rho_min + 0.05, chart.rho_max - 0.05, size=1000)
    kd = float(np.max(np.abs(metric_curvature(h, rho) + 1.0)))
    checks.append(("annulus curvature -1 (fd, 1000 pts)", kd, 1e-6))

    cusp = ConformalChart.cusp(0.5)
    hc = hyperbolic_density(cusp)
    rho_c = rng.uniform(-8.0, cusp.rho_max - 0.1, size=1000)
    kdc = float(np.max(np.abs(metric_curvature(hc, rho_c) + 1.0)))
    checks.append(("cusp curvature -1 (fd, 1000 pts)", kdc, 1e-6))

    c = 0.5
    collar_defect = abs(collar_K(c ** (2.0 * math.pi), c) - math.pi * math.log(c))
    checks.append(("collar constant at |t| = c^(2 pi)", collar_defect, 1e-12))

    pert = perturbed_density(chart)
    log_t, log_c = math.log(abs(chart.t)), math.log(chart.c)
    half_k = collar_K(chart.t, chart.c)
    jumps = []
    for b in (log_t - half_k + log_c, log_t - half_k, half_k, half_k - log_c):
        step = 1e-12
        lo, hi = pert.profile(np.array([b - step])), pert.profile(np.array([b + step]))
        jumps.append(abs(float(lo[0] - hi[0])))
    checks.append(("perturbed density branch continuity", max(jumps), 1e-10))

    fuchs = solve_radial(h, 0.0, 129, chart.rho_min + 0.05, chart.rho_max - 0.05,
                         tol=tol)
    checks.append(("fuchsian conformal factor deviation",
                   float(np.max(np.abs(fuchs.values - SUB_SOLUTION))), 1e-9))

    q = QuadDiff.from_dict(chart, {-2: 1.0})
    grid = Grid(chart, 64, 32, chart.rho_min + 0.1, chart.rho_max - 0.1)
    field = solve_2d(h, q, grid, tol=tol)
    checks.append(("2d solve residual", field.residual_sup, tol))
    checks.append(("2d solve bracket defect", field.bracket_defect(), 1e-9))

    nodes, ref_vals, _ = solve_radial_richardson(h, 1.0, 257, grid.rho_lo,
                                                 grid.rho_hi, tol=tol)
    ref = make_interp_spline(nodes, ref_vals, k=5)(grid.rho)
    gap = float(np.max(np.abs(field.values - ref[:, None])))
    checks.append(("2d vs radial oracle gap (64x32)", gap, 1e-4))

    emb = embedding_data(field, h, q)
    checks.append(("shape operator trace", emb.trace_defect, 1e-10))
    checks.append(("det(B) identity defect", emb.det_identity_defect, 1e-8))

    nodes2, vals2, pair = solve_radial_richardson(h, 0.2, 257,
                                                  chart.rho_min + 0.05,
                                                  chart.rho_max - 0.05, tol=tol)
    q2 = QuadDiff.from_dict(chart, {-2: 0.2})
    sampler = sampler_from_radial(nodes2, vals2, h, q2)
    center = complex(chart.core_rho, math.pi)
    loop = rectangle_loop(center - complex(0.3, 0.6), 0.6, 1.2)
    state = integrate_frame(sampler, loop, tol=1e-10)
    checks.append(("contractible loop monodromy defect",
                   float(np.max(np.abs(state.matrix - STANDARD_FRAME))), 1e-5))
    checks.append(("gram drift per unit length",
                   state.gram_drift / (1.0 + state.path_length), 1e-8))

    hol = holonomy(sampler, rho=chart.core_rho, tol=1e-11)
    check = is_isometry(hol.matrix)
    checks.append(("holonomy form defect", check.form_defect, 1e-8))
    checks.append(("holonomy det defect", check.det_defect, 1e-8))
    hol2 = holonomy(sampler, rho=chart.core_rho, periods=2, tol=1e-11)
    checks.append(("holonomy homomorphism defect (k = 2)",
                   float(np.max(np.abs(hol2.matrix - hol.matrix @ hol.matrix))),
                   1e-6))

    samp_f = sampler_from_radial(fuchs.rho, fuchs.values, h,
                                 QuadDiff.from_dict(chart, {}))
    hol_f = holonomy(samp_f, rho=chart.core_rho, tol=1e-11)
    fac_a, fac_b = psl2_factors(hol_f.matrix)
    expected = 2.0 * math.cosh(core_length(h) / 2.0)
    trace_defect = max(abs(abs(np.trace(fac_a)) - expected),
                       abs(abs(np.trace(fac_b)) - expected))
    checks.append(("fuchsian factor traces vs core length", trace_defect, 1e-6))
    return checks


def cmd_verify(cfg: RunConfig, out: Path, tol_override, threads: int) -> int:
    checks = _verify_checks(cfg, tol_override)
    width = max(len(name) for name, _, _ in checks)
    failures = 0
    for name, measured, bound in checks:
        ok = measured <= bound
        failures += 0 if ok else 1
        status = "PASS" if ok else "FAIL"
        print(f"{status}  {name:<{width}}  {measured:.3e} <= {bound:.0e}")
    print(f"{len(checks) - failures}/{len(checks)} invariant checks passed")
    if failures:
        raise SolverError(f"{failures} invariant checks failed")
    return 0


_COMMANDS = {
    "solve": cmd_solve,
    "frame": cmd_frame,
    "holonomy": cmd_holonomy,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def _error_record(out: Path, command: str, exc: Exception, code: int) -> None:
    record = {
        "schema_version": reportio.SCHEMA_VERSION,
        "command": command,
        "error": type(exc).__name__,
        "message": str(exc),
        "exit_code": code,
    }
    try:
        out.mkdir(parents=True, exist_ok=True)
        reportio.dump_json(out / "error.json", record)
    except OSError:
        pass


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="adsmax",
        description="maximal-surface solver, holonomy, and pinching sweeps",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", default=None, help="TOML config path")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=1,
                        help="parallel members for sweep")
    parser.add_argument("--tol", type=float, default=None,
                        help="override solver tolerance")
    args = parser.parse_args(argv)

    out = Path(args.out) if args.out else None
    try:
        cfg = load_config(args.config)
        out = _resolve_out(args.out, cfg)
        return _COMMANDS[args.command](cfg, out, args.tol, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        _error_record(out or Path("adsmax-out"), args.command, exc, 2)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        _error_record(out or Path("adsmax-out"), args.command, exc, 3)
        return 3
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        _error_record(out or Path("adsmax-out"), args.command, exc, 4)
        return 4


if __name__ == "__main__":
    sys.exit(main())
