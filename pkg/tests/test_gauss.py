"""Tests of the curvature-equation solvers and embedding data."""

import numpy as np
import pytest

from adsmax.domains import (
    ConformalChart,
    QuadDiff,
    hyperbolic_density,
    perturbed_density,
    q_norm_sq,
)
from adsmax.errors import ConfigError, DomainError, SolverError
from adsmax.gauss import (
    SUB_SOLUTION,
    ConformalFactorField,
    Grid,
    embedding_data,
    gauss_residual,
    solve_2d,
    solve_radial,
    solve_radial_richardson,
    super_solution,
)


def annulus_setup(t=0.01, c=0.5, a=1.0, n_rho=64, n_theta=32):
    chart = ConformalChart.annulus(t, c)
    h = hyperbolic_density(chart)
    q = QuadDiff.from_dict(chart, {-2: a} if a else {})
    grid = Grid(chart, n_rho, n_theta, chart.rho_min + 0.08, chart.rho_max - 0.08)
    return chart, h, q, grid


def cusp_density(c=0.5):
    return hyperbolic_density(ConformalChart.cusp(c))


# ------------------------------------------------------------------ grid


def test_grid_validation():
    chart = ConformalChart.annulus(0.01, 0.5)
    with pytest.raises(ConfigError):
        Grid(chart, 8, 32, chart.rho_min + 0.1, chart.rho_max - 0.1)
    with pytest.raises(ConfigError):
        Grid(chart, 64, 4, chart.rho_min + 0.1, chart.rho_max - 0.1)
    with pytest.raises(ConfigError):
        Grid(chart, 64, 32, chart.rho_max - 0.1, chart.rho_min + 0.1)
    with pytest.raises(ConfigError):
        Grid(chart, 64, 32, chart.rho_min + 0.1, chart.rho_max)  # touches edge
    g = Grid(chart, 64, 32, chart.rho_min + 0.1, chart.rho_max - 0.1)
    assert g.rho.shape == (64,)
    assert g.theta.shape == (32,)
    assert g.drho == pytest.approx((g.rho_hi - g.rho_lo) / 63)


# -------------------------------------------------------------- residual


def test_residual_matches_naive_loops():
    # independent evaluation: explicit 5-point stencil, pointwise norms
    for chart in (ConformalChart.annulus(0.01, 0.5), ConformalChart.cusp(0.5)):
        h = hyperbolic_density(chart)
        q = QuadDiff.from_dict(
            chart, {-2: 0.8 - 0.3j, -1: 0.25} if chart.kind == "annulus" else {-2: 0.8 - 0.3j}
        )
        lo = chart.rho_min + 0.3 if np.isfinite(chart.rho_min) else -5.0
        grid = Grid(chart, 24, 12, lo, chart.rho_max - 0.3)
        rng = np.random.default_rng(41)
        v = 0.1 * rng.standard_normal((grid.n_rho, grid.n_theta))
        got = gauss_residual(v, h, q, grid)

        lam = h.radial_profile(grid.rho)
        k_h = h.curvature(grid.rho)
        slow = np.zeros((grid.n_rho - 2, grid.n_theta))
        for i in range(1, grid.n_rho - 1):
            for j in range(grid.n_theta):
                jm = (j - 1) % grid.n_theta
                jp = (j + 1) % grid.n_theta
                lap = (v[i + 1, j] - 2 * v[i, j] + v[i - 1, j]) / grid.drho**2
                lap += (v[i, jp] - 2 * v[i, j] + v[i, jm]) / grid.dtheta**2
                x = np.exp(grid.rho[i] + 1j * grid.theta[j])
                w = float(q_norm_sq(q, h, x))
                slow[i - 1, j] = (
                    0.5 * lap / lam[i] ** 2
                    - np.exp(2 * v[i, j])
                    + np.exp(-2 * v[i, j]) * w
                    - 0.5 * k_h[i]
                )
        assert np.max(np.abs(got - slow)) < 1e-12


def test_residual_zero_at_fuchsian_point():
    chart, h, q, grid = annulus_setup(a=0.0)
    v = np.full((grid.n_rho, grid.n_theta), SUB_SOLUTION)
    res = gauss_residual(v, h, q, grid)
    assert np.max(np.abs(res)) < 1e-12


def test_residual_sign_at_sub_solution():
    chart, h, q, grid = annulus_setup(a=0.7)
    v = np.full((grid.n_rho, grid.n_theta), SUB_SOLUTION)
    res = gauss_residual(v, h, q, grid)
    assert np.min(res) >= 0.0
    # the only surviving term is e^{-2v} |q|^2 = 2 |q|^2
    rho_m, theta_m = grid.mesh()
    w = np.abs(q.strip_coefficient(rho_m + 1j * theta_m)) ** 2 / h.radial_profile(
        grid.rho
    )[:, None] ** 4
    assert np.max(np.abs(res - 2.0 * w[1:-1, :])) < 1e-12


def test_residual_rejects_shape_mismatch():
    chart, h, q, grid = annulus_setup()
    with pytest.raises(DomainError):
        gauss_residual(np.zeros((10, 10)), h, q, grid)


# -------------------------------------------------------- super solution


def test_super_solution_fuchsian_case():
    chart, h, q, grid = annulus_setup(a=0.0)
    sup = super_solution(h, h, q, grid)
    assert sup.constant == 0.0
    assert np.max(np.abs(sup.values)) == 0.0
    assert sup.check_margin >= 0.0


def test_super_solution_bounded_on_cusp():
    chart = ConformalChart.cusp(0.5)
    h = hyperbolic_density(chart)
    q = QuadDiff.from_dict(chart, {-2: 1.0})
    grid = Grid(chart, 64, 16, -9.0, chart.rho_max - 0.15)
    sup = super_solution(h, perturbed_density(chart), q, grid)
    assert 0.0 < sup.constant <= 20.0
    assert sup.check_margin >= 0.0
    assert np.all(np.isfinite(sup.values))


def test_super_solution_fails_for_huge_differential():
    chart = ConformalChart.cusp(0.5)
    h = hyperbolic_density(chart)
    q = QuadDiff.from_dict(chart, {-2: 1e19})
    grid = Grid(chart, 64, 16, -9.0, chart.rho_max - 0.15)
    with pytest.raises(SolverError):
        super_solution(h, perturbed_density(chart), q, grid)


# ------------------------------------------------------------- solve_2d


def test_solve_2d_fuchsian_exact():
    chart, h, q, grid = annulus_setup(a=0.0)
    field = solve_2d(h, q, grid, bc=SUB_SOLUTION)
    assert np.max(np.abs(field.values - SUB_SOLUTION)) < 1e-12
    auto = solve_2d(h, q, grid, bc="auto")
    assert np.max(np.abs(auto.values - SUB_SOLUTION)) < 1e-9


def test_solve_2d_certificates():
    chart, h, q, grid = annulus_setup(a=1.0)
    field = solve_2d(h, q, grid)
    assert field.residual_sup < field.tol
    assert field.bracket_defect() <= 1e-9
    assert np.min(field.values) >= SUB_SOLUTION - 1e-9
    assert np.max(field.values - field.bracket_upper) <= 1e-9
    # interior residual recomputed independently of the solver loop
    res = gauss_residual(field.values, h, q, grid)
    assert np.max(np.abs(res)) < 10.0 * field.tol


def test_solve_2d_matches_radial_oracle():
    chart, h, q, grid = annulus_setup(a=1.0)
    field = solve_2d(h, q, grid)
    radial = solve_radial(h, 1.0, grid.n_rho, grid.rho_lo, grid.rho_hi)
    gap = np.max(np.abs(field.values - radial.values[:, None]))
    assert gap < 1e-4
    # theta-independence of the 2d solution on rotationally invariant data
    assert np.max(np.ptp(field.values, axis=1)) < 1e-10


def test_solve_2d_monotone_in_residue():
    chart, h, _, grid = annulus_setup()
    small = solve_2d(h, QuadDiff.from_dict(chart, {-2: 0.5}), grid)
    large = solve_2d(h, QuadDiff.from_dict(chart, {-2: 1.0}), grid)
    diff = large.values - small.values
    assert np.min(diff) >= -1e-12
    assert np.min(diff[1:-1, :]) > 0.0


def test_solve_2d_rejects_chart_mismatch():
    chart, h, q, grid = annulus_setup()
    other = hyperbolic_density(ConformalChart.annulus(0.02, 0.5))
    with pytest.raises(DomainError):
        solve_2d(other, q, grid)


def test_solve_2d_unknown_bc():
    chart, h, q, grid = annulus_setup()
    with pytest.raises(ConfigError):
        solve_2d(h, q, grid, bc="dirichlet")


def test_solve_2d_iteration_cap():
    chart, h, q, grid = annulus_setup(a=2.0)
    with pytest.raises(SolverError):
        solve_2d(h, q, grid, max_iter=1)


# ---------------------------------------------------------- solve_radial


def test_solve_radial_zero_residue_constant():
    h = cusp_density()
    sol = solve_radial(h, 0.0, 64, -6.0, -1.0)
    assert np.max(np.abs(sol.values - SUB_SOLUTION)) < 1e-9


def test_solve_radial_far_cusp_balance():
    # e^{2v} / |q|_h -> 1 deep into the cusp (flat-end balance)
    h = cusp_density()
    defects = []
    for big_r in (8.0, 16.0):
        sol = solve_radial(h, 1.0, 321, -big_r, -1.0)
        i = int(np.argmin(np.abs(sol.rho + (big_r - 2.0))))
        lam = float(h.radial_profile(sol.rho[i : i + 1])[0])
        ratio = np.exp(2.0 * sol.values[i]) / (1.0 / lam**2)
        defects.append(abs(ratio - 1.0))
    assert defects[1] < defects[0]
    assert defects[0] < 1e-6


def test_solve_radial_refinement_second_order():
    h = cusp_density()
    _, ref, _ = solve_radial_richardson(h, 1.0, 257, -6.0, -1.0)
    gaps = []
    for n in (33, 65, 129):
        sol = solve_radial(h, 1.0, n, -6.0, -1.0)
        stride = (257 - 1) // (n - 1)
        gaps.append(float(np.max(np.abs(sol.values - ref[::stride]))))
    for coarse, fine in zip(gaps, gaps[1:]):
        assert 3.3 < coarse / fine < 4.7


def test_richardson_beats_its_fine_member():
    h = cusp_density()
    _, ref, _ = solve_radial_richardson(h, 1.0, 257, -6.0, -1.0)
    rho, vals, (coarse, fine) = solve_radial_richardson(h, 1.0, 65, -6.0, -1.0)
    rich_err = float(np.max(np.abs(vals - ref[::4])))
    fine_err = float(np.max(np.abs(fine.values[::2] - ref[::4])))
    assert rich_err < fine_err / 50.0
    assert np.array_equal(rho, coarse.rho)


def test_solve_radial_interval_validation():
    h = cusp_density()
    with pytest.raises(ConfigError):
        solve_radial(h, 1.0, 8, -6.0, -1.0)
    with pytest.raises(ConfigError):
        solve_radial(h, 1.0, 64, -6.0, np.log(0.5))  # touches chart edge


# ------------------------------------------------------------- embedding


def test_embedding_fuchsian_trivial():
    chart, h, q, grid = annulus_setup(a=0.0)
    field = solve_2d(h, q, grid, bc=SUB_SOLUTION)
    emb = embedding_data(field, h, q)
    assert np.max(np.abs(emb.shape_operator)) == 0.0
    assert np.max(np.abs(emb.induced_curvature + 1.0)) < 1e-12
    # I = 2 e^{2v} h = h at the Fuchsian point
    lam = h.radial_profile(grid.rho)[:, None]
    assert np.max(np.abs(emb.induced_profile - lam)) < 1e-12
    assert emb.completeness_margin >= -1e-12


def test_embedding_identities():
    chart, h, q, grid = annulus_setup(a=1.0)
    field = solve_2d(h, q, grid)
    emb = embedding_data(field, h, q)
    assert emb.trace_defect < 1e-10
    assert emb.det_identity_defect < 1e-12
    assert emb.completeness_margin >= -1e-9
    # curvature from the Gauss identity vs finite differences of I:
    # agreement at the second-order stencil error of this grid
    assert emb.curvature_fd_defect < 2.0 * grid.drho**2


def test_embedding_fd_defect_shrinks_under_refinement():
    chart, h, q, _ = annulus_setup(a=1.0)
    defects = []
    for n_rho, n_theta in ((64, 32), (128, 64)):
        grid = Grid(chart, n_rho, n_theta, chart.rho_min + 0.08, chart.rho_max - 0.08)
        field = solve_2d(h, q, grid)
        defects.append(embedding_data(field, h, q).curvature_fd_defect)
    assert defects[1] < defects[0] / 2.5
