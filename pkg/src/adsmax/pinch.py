"""Pinching sweeps: track solver and holonomy output as an annulus degenerates.

A family fixes the chart scale c, a residue a, and a decreasing sequence of
gluing parameters t_k (default c^2 * 2^{-k}); the limit member t = 0 is the
cusp chart with the same residue.  Every member is solved on its own chart,
then compared with the limit member on a fixed compact window
[rho_a, rho_b] with rho_b < log c, which all member charts contain.  The
shared (rho, theta) strip coordinate identifies windows across members, so
defects are plain sup norms of differences:

* v_defect: sup |v_t - v_0| of the conformal factors,
* induced_metric_defect: sup |lam_t/lam_0 - 1| for the induced densities
  lam = sqrt(2) e^v Lambda,
* base_density_defect: the same ratio defect for the background densities
  Lambda_t alone (no solving involved),
* q defects: sup-norm and coefficientwise distance of the differentials,
* holonomy_defect: Frobenius distance of holonomy matrices, all frames
  normalized to the standard base frame at the same base point.

Holonomy matrices are compared entrywise in a fixed normalization, which
pins down the global isometry freedom; the psl2 factor traces give an
alignment-free cross-check column, since traces are conjugation invariant.

Pure-residue families reduce to the radial solver and use Richardson
extrapolated profiles, so discretization error stays far below the defect
scales being tabulated.  Families with extra Laurent terms run the 2d
solver per member.  Members are independent and can be solved in parallel;
report assembly is a deterministic reduction over the finished members.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import RectBivariateSpline, make_interp_spline

from .adscore import psl2_factors
from .domains import (
    ConformalChart,
    MetricDensity,
    QuadDiff,
    hyperbolic_density,
    perturbed_density,
    q_norm_sq_profile,
)
from .errors import ConfigError, DomainError
from .frames import HolonomyResult, holonomy, sampler_from_field, sampler_from_radial
from .gauss import Grid, solve_2d, solve_radial_richardson
from . import reportio

SOLVE_MARGIN = 0.05
CUSP_DEPTH = -12.0
WINDOW_SAMPLES = 161

EXTRA_MODES = ("fixed", "vanishing")


@dataclass(frozen=True)
class PinchFamily:
    """A one-node plumbing family with a fixed residue and shrinking t.

    ``extra_terms`` entries are (order, coefficient, mode): mode "fixed"
    keeps the coefficient along the family, mode "vanishing" scales it by
    t so it drops out at the limit.  Orders >= 0 must vanish with t, since
    the limit chart cannot carry them.
    """

    c: float = 0.5
    residue: complex = 1.0 + 0j
    extra_terms: tuple = ()
    t_values: tuple = ()
    window: tuple = (-1.30, -0.80)
    base_theta: float = 0.0
    k_start: int = 1

    def __post_init__(self):
        if not 0.0 < self.c < 1.0:
            raise DomainError(f"family scale c must lie in (0, 1), got {self.c}")
        prev = None
        for t in self.t_values:
            t = float(t)
            if not 0.0 < t < self.c**2:
                raise DomainError(
                    f"family member t = {t:.6g} outside (0, c^2 = {self.c ** 2:.6g})"
                )
            if prev is not None and t >= prev:
                raise DomainError("family t values must be strictly decreasing")
            prev = t
        rho_a, rho_b = self.window
        if not rho_a < rho_b:
            raise DomainError(f"empty window [{rho_a}, {rho_b}]")
        if rho_b >= math.log(self.c) - SOLVE_MARGIN:
            raise DomainError(
                "window touches the outer chart edge; it must stay compact "
                "inside the regular part"
            )
        for t in self.t_values:
            inner = math.log(float(t) / self.c) + SOLVE_MARGIN
            if rho_a <= inner:
                raise DomainError(
                    f"window start {rho_a:.4g} leaves the t = {float(t):.6g} "
                    f"member's solve interval (inner edge {inner:.4g})"
                )
        for term in self.extra_terms:
            if len(term) != 3:
                raise ConfigError("extra term must be (order, coefficient, mode)")
            order, _, mode = term
            if mode not in EXTRA_MODES:
                raise ConfigError(f"unknown extra-term mode {mode!r}")
            if int(order) == -2:
                raise ConfigError("the residue is a family field, not an extra term")
            if int(order) >= 0 and mode == "fixed":
                raise ConfigError(
                    "constant and positive-order terms must vanish with t; "
                    "use mode 'vanishing'"
                )

    @classmethod
    def default(cls, c: float = 0.5, residue: complex = 1.0, k_min: int = 1,
                k_max: int = 12, **kw) -> "PinchFamily":
        ts = tuple(c**2 * 2.0**-k for k in range(k_min, k_max + 1))
        return cls(c=c, residue=complex(residue), t_values=ts, k_start=k_min, **kw)

    @property
    def is_radial(self) -> bool:
        return not self.extra_terms

    @property
    def base_rho(self) -> float:
        return self.window[1] - 0.1

    @property
    def limit_depth(self) -> float:
        """Inner truncation of the limit member's solve interval.

        One unit past the deepest annulus member (floor CUSP_DEPTH): the
        flat-balance boundary value is exact to leading order at a cusp,
        so extra depth buys nothing once the family is covered.
        """
        if not self.t_values:
            return CUSP_DEPTH
        deepest = math.log(float(self.t_values[-1]) / self.c)
        return max(CUSP_DEPTH, deepest - 1.0)

    @property
    def k_values(self) -> tuple:
        return tuple(self.k_start + i for i in range(len(self.t_values)))

    def coefficients(self, t: float) -> dict:
        coeffs = {-2: complex(self.residue)}
        for order, value, mode in self.extra_terms:
            value = complex(value)
            if mode == "vanishing":
                value = value * t
            if value != 0 or int(order) < 0:
                coeffs[int(order)] = coeffs.get(int(order), 0j) + value
        return coeffs

    def config_dict(self) -> dict:
        return {
            "c": self.c,
            "residue": reportio.complex_pair(self.residue),
            "extra_terms": [
                [int(o), reportio.complex_pair(v), m] for o, v, m in self.extra_terms
            ],
            "t_values": [float(t) for t in self.t_values],
            "window": list(self.window),
            "base_theta": self.base_theta,
            "k_start": self.k_start,
        }


def build_member(family: PinchFamily, t: float, n_rho: int = 257,
                 n_theta: int = 32):
    """Chart, hyperbolic density, differential, and solve grid for one member.

    t = 0 gives the limit member: the cusp chart, truncated at a fixed
    depth well below the window.
    """
    t = float(t)
    if t == 0.0:
        chart = ConformalChart.cusp(family.c)
        rho_lo = family.limit_depth
    elif 0.0 < t < family.c**2:
        chart = ConformalChart.annulus(t, family.c)
        rho_lo = chart.rho_min + SOLVE_MARGIN
    else:
        raise DomainError(f"inadmissible gluing parameter t = {t:.6g}")
    h = hyperbolic_density(chart)
    q = QuadDiff.from_dict(chart, family.coefficients(t))
    grid = Grid(chart, n_rho, n_theta, rho_lo, chart.rho_max - SOLVE_MARGIN)
    return chart, h, q, grid


@dataclass(frozen=True)
class MemberSolution:
    """One solved family member restricted to the comparison window."""

    t: float
    chart: ConformalChart
    h: MetricDensity
    q: QuadDiff
    v_window: np.ndarray
    induced_window: np.ndarray
    base_profile: np.ndarray
    residual_sup: float
    bracket_constant: float
    qnorm_perturbed_sup: float
    holonomy: HolonomyResult
    holonomy_sq: HolonomyResult
    trace_a: float
    trace_b: float


def _window_rho(family: PinchFamily) -> np.ndarray:
    return np.linspace(family.window[0], family.window[1], WINDOW_SAMPLES)


def solve_member(family: PinchFamily, t: float, n_rho: int = 257,
                 n_theta: int = 32, tol: float = 1e-10,
                 frame_tol: float = 1e-11) -> MemberSolution:
    chart, h, q, grid = build_member(family, t, n_rho, n_theta)
    rho_w = _window_rho(family)

    if family.is_radial:
        nodes, vals, (coarse, fine) = solve_radial_richardson(
            h, complex(family.residue), n_rho, grid.rho_lo, grid.rho_hi, tol=tol
        )
        residual_sup = max(coarse.residual_sup, fine.residual_sup)
        bracket_constant = fine.bracket_constant
        v_win = make_interp_spline(nodes, vals, k=5)(rho_w)
        sampler = sampler_from_radial(nodes, vals, h, q)
    else:
        field = solve_2d(h, q, grid, tol=tol)
        residual_sup = field.residual_sup
        bracket_constant = field.bracket_constant
        # Pad theta so the window spline sees the periodic seam.
        pad = 4
        theta_ext = np.concatenate(
            [grid.theta[-pad:] - 2.0 * np.pi, grid.theta, grid.theta[:pad] + 2.0 * np.pi]
        )
        vals_ext = np.concatenate(
            [field.values[:, -pad:], field.values, field.values[:, :pad]], axis=1
        )
        spline = RectBivariateSpline(grid.rho, theta_ext, vals_ext, kx=3, ky=3)
        v_win = spline(rho_w, grid.theta)
        sampler = sampler_from_field(field, h, q)

    profile = h.radial_profile(rho_w)
    if v_win.ndim == 2:
        induced = math.sqrt(2.0) * np.exp(v_win) * profile[:, None]
    else:
        induced = math.sqrt(2.0) * np.exp(v_win) * profile

    m = perturbed_density(chart)
    rho_m = np.linspace(grid.rho_lo, grid.rho_hi, 257)
    qn = np.sqrt(np.max(q_norm_sq_profile(q, m, rho_m)))
    if not family.is_radial:
        for th in (0.5 * np.pi, np.pi, 1.5 * np.pi):
            qn = max(qn, np.sqrt(np.max(q_norm_sq_profile(q, m, rho_m, th))))

    hol = holonomy(sampler, rho=family.base_rho, theta0=family.base_theta,
                   tol=frame_tol)
    hol_sq = holonomy(sampler, rho=family.base_rho, theta0=family.base_theta,
                      periods=2, tol=frame_tol)
    fac_a, fac_b = psl2_factors(hol.matrix)
    return MemberSolution(
        t=float(t),
        chart=chart,
        h=h,
        q=q,
        v_window=v_win,
        induced_window=induced,
        base_profile=profile,
        residual_sup=float(residual_sup),
        bracket_constant=float(bracket_constant),
        qnorm_perturbed_sup=float(qn),
        holonomy=hol,
        holonomy_sq=hol_sq,
        trace_a=float(np.trace(fac_a)),
        trace_b=float(np.trace(fac_b)),
    )


@dataclass(frozen=True)
class SweepRow:
    """Defect and diagnostic columns for one member against the limit."""

    k: int
    t: float
    v_defect: float
    induced_metric_defect: float
    base_density_defect: float
    q_sup_defect: float
    q_coeff_defect: float
    qnorm_perturbed_sup: float
    holonomy_defect: float
    trace_defect: float
    trace_a: float
    trace_b: float
    residual_sup: float
    bracket_constant: float
    gram_drift: float
    realness_defect: float
    homomorphism_defect: float
    monotone_ok: bool
    cauchy_ok: bool
    consistency_ok: bool
    diagnostics_ok: bool
    holonomy_matrix: np.ndarray


CSV_COLUMNS = (
    "k",
    "t",
    "v_defect",
    "induced_metric_defect",
    "base_density_defect",
    "q_sup_defect",
    "q_coeff_defect",
    "qnorm_perturbed_sup",
    "holonomy_defect",
    "trace_defect",
    "trace_a",
    "trace_b",
    "residual_sup",
    "bracket_constant",
    "gram_drift",
    "realness_defect",
    "homomorphism_defect",
    "monotone_ok",
    "cauchy_ok",
    "consistency_ok",
    "diagnostics_ok",
)

# Columns whose tail (k >= threshold) the Cauchy and monotonicity flags watch.
_TREND_COLUMNS = ("v_defect", "base_density_defect", "holonomy_defect")


@dataclass(frozen=True)
class SweepReport:
    family: PinchFamily
    threshold: int
    rows: tuple
    reference: Optional[dict]
    config: dict
    config_hash: str

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows])

    def row_for_k(self, k: int) -> SweepRow:
        for row in self.rows:
            if row.k == k:
                return row
        raise KeyError(f"no sweep row with k = {k}")

    def tail_ratio(self, name: str) -> float:
        """Last-row defect over threshold-row defect (decay indicator)."""
        last = self.rows[-1]
        base = self.row_for_k(self.threshold)
        denom = getattr(base, name)
        if denom == 0.0:
            return 0.0
        return getattr(last, name) / denom

    def tail_monotone(self, name: str) -> bool:
        vals = [getattr(r, name) for r in self.rows if r.k >= self.threshold]
        return all(b < a for a, b in zip(vals, vals[1:]))

    def flagged_rows(self) -> tuple:
        return tuple(
            row.k
            for row in self.rows
            if not (row.monotone_ok and row.cauchy_ok and row.consistency_ok
                    and row.diagnostics_ok)
        )


def _q_defects(member: MemberSolution, ref: MemberSolution,
               rho_w: np.ndarray) -> tuple:
    coeffs_t = member.q.as_dict()
    coeffs_0 = ref.q.as_dict()
    orders = set(coeffs_t) | set(coeffs_0)
    coeff_defect = max(
        (abs(coeffs_t.get(o, 0j) - coeffs_0.get(o, 0j)) for o in orders),
        default=0.0,
    )
    theta = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    zeta = rho_w[:, None] + 1j * theta[None, :]
    diff = member.q.strip_coefficient(zeta) - ref.q.strip_coefficient(zeta)
    lam_sq = member.h.radial_profile(rho_w)[:, None] ** 2
    sup_defect = float(np.max(np.abs(diff) / lam_sq))
    return sup_defect, float(coeff_defect)


def _compare(member: MemberSolution, ref: MemberSolution, k: int,
             rho_w: np.ndarray, tol: float) -> dict:
    v_t, v_0 = member.v_window, ref.v_window
    if v_t.ndim != v_0.ndim:
        # 2d member against the radial limit: broadcast the limit profile.
        v_0 = np.broadcast_to(v_0[:, None], v_t.shape)
    v_defect = float(np.max(np.abs(v_t - v_0)))

    ind_t, ind_0 = member.induced_window, ref.induced_window
    if ind_t.ndim != ind_0.ndim:
        ind_0 = np.broadcast_to(ind_0[:, None], ind_t.shape)
    induced_defect = float(np.max(np.abs(ind_t / ind_0 - 1.0)))
    base_defect = float(np.max(np.abs(member.base_profile / ref.base_profile - 1.0)))

    q_sup, q_coeff = _q_defects(member, ref, rho_w)

    rho_t, rho_0 = member.holonomy.matrix, ref.holonomy.matrix
    hol_defect = float(np.linalg.norm(rho_t - rho_0))
    trace_defect = max(
        abs(member.trace_a - ref.trace_a), abs(member.trace_b - ref.trace_b)
    )

    sq = rho_t @ rho_t
    hom = float(
        np.max(np.abs(member.holonomy_sq.matrix - sq))
        / max(1.0, float(np.max(np.abs(sq))))
    )
    # Gram entries drift by round-off at scale eps * |F|^2, so the drift
    # budget for heavy frames is relative to the squared frame magnitude.
    frame_scale = max(1.0, float(np.max(np.abs(member.holonomy.h_factor))))
    return {
        "_loop_length": member.holonomy.loop_length,
        "_gram_scale": frame_scale**2,
        "k": k,
        "t": member.t,
        "v_defect": v_defect,
        "induced_metric_defect": induced_defect,
        "base_density_defect": base_defect,
        "q_sup_defect": q_sup,
        "q_coeff_defect": q_coeff,
        "qnorm_perturbed_sup": member.qnorm_perturbed_sup,
        "holonomy_defect": hol_defect,
        "trace_defect": float(trace_defect),
        "trace_a": member.trace_a,
        "trace_b": member.trace_b,
        "residual_sup": member.residual_sup,
        "bracket_constant": member.bracket_constant,
        "gram_drift": member.holonomy.gram_drift,
        "realness_defect": member.holonomy.realness_defect,
        "homomorphism_defect": hom,
        "holonomy_matrix": rho_t,
    }


def run_sweep(family: PinchFamily, n_rho: int = 257, n_theta: int = 32,
              tol: float = 1e-10, frame_tol: float = 1e-11,
              threshold: int = 6, threads: int = 1) -> SweepReport:
    """Solve every member plus the limit and assemble the defect table.

    ``threshold`` is the member index k from which the Cauchy and
    monotone-decrease flags start watching the trend columns.
    """
    config = {
        "family": family.config_dict(),
        "n_rho": n_rho,
        "n_theta": n_theta,
        "tol": tol,
        "frame_tol": frame_tol,
        "threshold": threshold,
    }
    config_hash = reportio.config_sha256(config)
    if not family.t_values:
        return SweepReport(family, threshold, (), None, config, config_hash)

    ts = [0.0] + [float(t) for t in family.t_values]

    def job(t):
        return solve_member(family, t, n_rho=n_rho, n_theta=n_theta, tol=tol,
                            frame_tol=frame_tol)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            solved = list(pool.map(job, ts))
    else:
        solved = [job(t) for t in ts]
    ref, members = solved[0], solved[1:]

    rho_w = _window_rho(family)
    raw = [
        _compare(member, ref, k, rho_w, tol)
        for k, member in zip(family.k_values, members)
    ]

    rows = []
    prev = None
    base = next((r for r in raw if r["k"] == threshold), None)
    for rec in raw:
        beyond = base is not None and rec["k"] > threshold
        monotone_ok = True
        cauchy_ok = True
        if beyond and prev is not None:
            monotone_ok = all(rec[c] < prev[c] for c in _TREND_COLUMNS)
            cauchy_ok = all(rec[c] < base[c] for c in _TREND_COLUMNS)
        consistency_ok = not (
            prev is not None
            and rec["v_defect"] <= 10.0 * tol
            and rec["holonomy_defect"] > prev["holonomy_defect"]
        )
        loop_length = rec.pop("_loop_length")
        gram_scale = rec.pop("_gram_scale")
        diagnostics_ok = (
            rec["residual_sup"] <= tol
            and rec["gram_drift"] <= 1e-8 * (1.0 + loop_length) * gram_scale
            and rec["homomorphism_defect"] <= 1e-6
        )
        rows.append(SweepRow(
            monotone_ok=monotone_ok,
            cauchy_ok=cauchy_ok,
            consistency_ok=consistency_ok,
            diagnostics_ok=diagnostics_ok,
            **rec,
        ))
        prev = rec

    reference = {
        "residual_sup": ref.residual_sup,
        "bracket_constant": ref.bracket_constant,
        "qnorm_perturbed_sup": ref.qnorm_perturbed_sup,
        "trace_a": ref.trace_a,
        "trace_b": ref.trace_b,
        "gram_drift": ref.holonomy.gram_drift,
        "realness_defect": ref.holonomy.realness_defect,
        "holonomy_matrix": ref.holonomy.matrix,
    }
    return SweepReport(family, threshold, tuple(rows), reference, config,
                       config_hash)


def metric_convergence(family: PinchFamily, n_samples: int = WINDOW_SAMPLES) -> list:
    """Background-density window defects sup |Lambda_t/Lambda_0 - 1| per t.

    Purely analytic in the densities; no solving.
    """
    rho_w = np.linspace(family.window[0], family.window[1], n_samples)
    limit = hyperbolic_density(ConformalChart.cusp(family.c))
    ref = limit.radial_profile(rho_w)
    table = []
    for k, t in zip(family.k_values, family.t_values):
        chart = ConformalChart.annulus(float(t), family.c)
        prof = hyperbolic_density(chart).radial_profile(rho_w)
        table.append({
            "k": k,
            "t": float(t),
            "base_density_defect": float(np.max(np.abs(prof / ref - 1.0))),
        })
    return table


def q_convergence(family: PinchFamily, n_samples: int = WINDOW_SAMPLES) -> list:
    """Differential window defects per t: sup-norm and coefficientwise.

    The sup column measures |f_t - f_0| against the member density squared
    (the pointwise differential norm); the coefficient column is the
    largest Laurent coefficient distance.  The perturbed-density norm of
    q_t itself is tabulated alongside as the boundedness check.
    """
    rho_w = np.linspace(family.window[0], family.window[1], n_samples)
    theta = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    zeta = rho_w[:, None] + 1j * theta[None, :]
    chart0 = ConformalChart.cusp(family.c)
    q0 = QuadDiff.from_dict(chart0, family.coefficients(0.0))
    f0 = q0.strip_coefficient(zeta)
    coeffs_0 = q0.as_dict()
    table = []
    for k, t in zip(family.k_values, family.t_values):
        t = float(t)
        chart = ConformalChart.annulus(t, family.c)
        h = hyperbolic_density(chart)
        q = QuadDiff.from_dict(chart, family.coefficients(t))
        lam_sq = h.radial_profile(rho_w)[:, None] ** 2
        sup = float(np.max(np.abs(q.strip_coefficient(zeta) - f0) / lam_sq))
        coeffs_t = q.as_dict()
        orders = set(coeffs_t) | set(coeffs_0)
        coeff = max(
            (abs(coeffs_t.get(o, 0j) - coeffs_0.get(o, 0j)) for o in orders),
            default=0.0,
        )
        m = perturbed_density(chart)
        rho_m = np.linspace(chart.rho_min + SOLVE_MARGIN,
                            chart.rho_max - SOLVE_MARGIN, 257)
        qn = float(np.sqrt(np.max(q_norm_sq_profile(q, m, rho_m))))
        table.append({
            "k": k,
            "t": t,
            "q_sup_defect": sup,
            "q_coeff_defect": float(coeff),
            "qnorm_perturbed_sup": qn,
        })
    return table


def _rate_column(table: list, key: str) -> None:
    prev = None
    for rec in table:
        val = rec[key]
        rec["rate"] = (prev / val) if (prev is not None and val != 0.0) else math.nan
        prev = val


def v_convergence(family: PinchFamily, **opts) -> list:
    """Conformal-factor window defects per t, with the bracket constants.

    Runs the full sweep machinery; the rate column is defect(k-1)/defect(k)
    for eyeballing the decay.
    """
    report = run_sweep(family, **opts)
    table = [
        {
            "k": row.k,
            "t": row.t,
            "v_defect": row.v_defect,
            "bracket_constant": row.bracket_constant,
            "residual_sup": row.residual_sup,
        }
        for row in report.rows
    ]
    _rate_column(table, "v_defect")
    return table


def holonomy_convergence(family: PinchFamily, **opts) -> list:
    """Holonomy window defects per t, with traces and the alignment check."""
    report = run_sweep(family, **opts)
    table = [
        {
            "k": row.k,
            "t": row.t,
            "holonomy_defect": row.holonomy_defect,
            "trace_defect": row.trace_defect,
            "trace_a": row.trace_a,
            "trace_b": row.trace_b,
            "homomorphism_defect": row.homomorphism_defect,
        }
        for row in report.rows
    ]
    _rate_column(table, "holonomy_defect")
    return table


def emit_report(report: SweepReport, out_dir, stem: str = "sweep",
                formats: tuple = ("csv", "json")) -> list:
    """Write the sweep table as CSV and/or JSON; returns the paths written.

    The CSV is the flat plot-ready table, one row per member, fixed column
    schema.  The JSON document carries the full diagnostics, the reference
    member, and the holonomy matrices, and round-trips floats exactly.
    """
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        if fmt == "csv":
            rows = [
                [getattr(row, col) for col in CSV_COLUMNS] for row in report.rows
            ]
            written.append(reportio.write_csv(
                out_dir / f"{stem}.csv", CSV_COLUMNS, rows, report.config_hash
            ))
        elif fmt == "json":
            doc = {
                "schema_version": reportio.SCHEMA_VERSION,
                "config": report.config,
                "config_sha256": report.config_hash,
                "threshold": report.threshold,
                "columns": list(CSV_COLUMNS),
                "rows": [
                    {
                        **{col: _jsonable(getattr(row, col)) for col in CSV_COLUMNS},
                        "holonomy_matrix": reportio.matrix_entries(row.holonomy_matrix),
                    }
                    for row in report.rows
                ],
                "reference": None if report.reference is None else {
                    **{k: v for k, v in report.reference.items()
                       if k != "holonomy_matrix"},
                    "holonomy_matrix": reportio.matrix_entries(
                        report.reference["holonomy_matrix"]
                    ),
                },
            }
            written.append(reportio.dump_json(out_dir / f"{stem}.json", doc))
        else:
            raise ConfigError(f"unknown report format {fmt!r}")
    return written


def _jsonable(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    return float(value)
