"""Tests of frame transport, flatness, and holonomy."""

import functools

import numpy as np
import pytest

from adsmax.adscore import J, is_isometry, psl2_factors
from adsmax.domains import ConformalChart, QuadDiff, hyperbolic_density
from adsmax.errors import FrameError
from adsmax.frames import (
    REFERENCE_GRAM,
    STANDARD_FRAME,
    connection_matrices,
    core_length,
    deck_diag,
    gram_matrix,
    holonomy,
    integrate_frame,
    rectangle_loop,
    sampler_from_radial,
    theta_loop,
)
from adsmax.gauss import solve_radial_richardson


@functools.lru_cache(maxsize=None)
def radial_sampler(t: float, a: float):
    chart = ConformalChart.annulus(t, 0.5)
    h = hyperbolic_density(chart)
    q = QuadDiff.from_dict(chart, {-2: a} if a else {})
    rho, vals, _ = solve_radial_richardson(
        h, a, 257, chart.rho_min + 0.05, chart.rho_max - 0.05
    )
    return sampler_from_radial(rho, vals, h, q), chart, h


# ---------------------------------------------------------------- algebra


def test_standard_frame_gram():
    # one ulp of round-off in the 1/sqrt(2) normalization is expected
    assert np.max(np.abs(REFERENCE_GRAM - J)) < 1e-15
    assert np.array_equal(gram_matrix(STANDARD_FRAME), REFERENCE_GRAM)


def test_connection_fuchsian_shape():
    u, v = connection_matrices(0.7, 0.0, 0.0)
    assert np.count_nonzero(u) == 2
    assert np.count_nonzero(v) == 2
    assert u[0, 3] == pytest.approx(np.exp(0.7))
    assert u[3, 1] == pytest.approx(np.exp(0.7))
    assert v[1, 3] == pytest.approx(np.exp(0.7))
    assert v[3, 0] == pytest.approx(np.exp(0.7))


def test_connection_matches_entrywise_build():
    rng = np.random.default_rng(51)
    for _ in range(100):
        phi = float(rng.uniform(-1.5, 1.5))
        phi_z = complex(rng.normal(), rng.normal())
        f = complex(rng.normal(), rng.normal())
        u, v = connection_matrices(phi, phi_z, f)
        ep, em = np.exp(phi), np.exp(-phi)
        u2 = np.zeros((4, 4), dtype=complex)
        u2[0, 0] = phi_z
        u2[1, 1] = -phi_z
        u2[0, 3] = ep
        u2[3, 1] = ep
        u2[1, 2] = f * em
        u2[2, 0] = f * em
        v2 = np.zeros((4, 4), dtype=complex)
        v2[0, 0] = -np.conj(phi_z)
        v2[1, 1] = np.conj(phi_z)
        v2[1, 3] = ep
        v2[3, 0] = ep
        v2[0, 2] = np.conj(f) * em
        v2[2, 1] = np.conj(f) * em
        assert np.array_equal(u, u2)
        assert np.array_equal(v, v2)


def test_connection_traceless():
    rng = np.random.default_rng(52)
    for _ in range(50):
        u, v = connection_matrices(
            float(rng.uniform(-2, 2)),
            complex(rng.normal(), rng.normal()),
            complex(rng.normal(), rng.normal()),
        )
        assert abs(np.trace(u)) == 0.0
        assert abs(np.trace(v)) == 0.0


def test_connection_conserves_gram():
    # the Gram matrix J is constant along solutions iff U^H J + J V = 0
    rng = np.random.default_rng(53)
    for _ in range(50):
        u, v = connection_matrices(
            float(rng.uniform(-1.5, 1.5)),
            complex(rng.normal(), rng.normal()),
            complex(rng.normal(), rng.normal()),
        )
        assert np.max(np.abs(u.conj().T @ J + J @ v)) < 1e-13
        assert np.max(np.abs(v.conj().T @ J + J @ u)) < 1e-13


def test_deck_diag():
    assert np.array_equal(deck_diag(1.0), np.eye(4, dtype=complex))
    assert np.array_equal(deck_diag(1j), np.diag([1j, -1j, 1.0, 1.0]))
    assert np.array_equal(deck_diag(3.0), deck_diag(1.0))
    assert np.max(np.abs(deck_diag(2j) - deck_diag(1j))) == 0.0
    with pytest.raises(FrameError):
        deck_diag(0.0)


# -------------------------------------------------------------- transport


def test_integrate_zero_length_path():
    sampler, chart, _ = radial_sampler(0.05, 0.2)
    z = complex(chart.core_rho, 1.0)
    init = STANDARD_FRAME + 0.1
    state = integrate_frame(sampler, [(z, z)], init=init)
    assert np.array_equal(state.matrix, init)
    assert state.steps == 0
    assert state.path_length == 0.0


def test_integrate_rejects_bad_init():
    sampler, chart, _ = radial_sampler(0.05, 0.2)
    z = complex(chart.core_rho, 0.0)
    with pytest.raises(FrameError):
        integrate_frame(sampler, [(z, z + 0.1)], init=np.eye(3))


def test_integrate_rejects_out_of_range_path():
    sampler, chart, _ = radial_sampler(0.05, 0.2)
    with pytest.raises(FrameError):
        integrate_frame(
            sampler, rectangle_loop(complex(chart.core_rho, 0.0), 5.0, 1.0)
        )


def test_flatness_nested_rectangles():
    sampler, chart, _ = radial_sampler(0.05, 0.2)
    prev = 0.0
    for w, ht in ((0.3, 0.6), (0.6, 1.2), (1.0, 2.0)):
        corner = complex(chart.core_rho - w / 2, np.pi - ht / 2)
        state = integrate_frame(sampler, rectangle_loop(corner, w, ht), tol=1e-10)
        defect = float(np.max(np.abs(state.matrix - STANDARD_FRAME)))
        assert defect < 1e-5
        assert state.gram_drift < 1e-8 * (1.0 + state.path_length)
        prev = defect


def test_gram_drift_along_open_path():
    sampler, chart, _ = radial_sampler(0.01, 0.0)
    state = integrate_frame(sampler, theta_loop(chart.core_rho), tol=1e-10)
    assert state.gram_drift < 1e-8 * (1.0 + state.path_length)


def test_gram_drift_scales_with_frame_norm():
    # over several periods the frame norm grows like e^{l/2} per loop and
    # the drift floor is round-off at the squared norm; the absolute
    # 1e-8 (1+L) budget applies only at moderate norms
    sampler, chart, _ = radial_sampler(0.01, 0.0)
    state = integrate_frame(sampler, theta_loop(chart.core_rho, periods=3), tol=1e-10)
    scale = max(1.0, float(np.max(np.abs(state.matrix)))) ** 2
    assert state.gram_drift < 1e-8 * (1.0 + state.path_length) * scale


# --------------------------------------------------------------- holonomy


def test_core_length_matches_modulus_formula():
    h = hyperbolic_density(ConformalChart.annulus(0.01, 0.5))
    assert core_length(h) == pytest.approx(2.0 * np.pi**2 / np.log(100.0), rel=1e-12)


def test_fuchsian_holonomy_traces():
    sampler, chart, h = radial_sampler(0.01, 0.0)
    res = holonomy(sampler, chart.core_rho, tol=1e-11)
    ell = core_length(h)
    a, b = psl2_factors(res.matrix)
    expected = 2.0 * np.cosh(ell / 2.0)
    assert np.trace(a).real == pytest.approx(expected, abs=1e-6)
    assert np.trace(b).real == pytest.approx(expected, abs=1e-6)
    assert abs(abs(np.trace(a)) - abs(np.trace(b))) < 1e-6
    assert res.realness_defect < 1e-12
    assert np.array_equal(res.d_factor, np.eye(4, dtype=complex))


def test_holonomy_group_membership():
    sampler, chart, _ = radial_sampler(0.01, 0.2)
    res = holonomy(sampler, chart.core_rho, tol=1e-11)
    check = is_isometry(res.matrix)
    assert check.ok
    assert check.form_defect < 1e-8
    assert check.det_defect < 1e-8


def test_holonomy_homomorphism_two_periods():
    sampler, chart, _ = radial_sampler(0.01, 0.2)
    one = holonomy(sampler, chart.core_rho, tol=1e-11)
    two = holonomy(sampler, chart.core_rho, periods=2, tol=1e-11)
    assert np.max(np.abs(two.matrix - one.matrix @ one.matrix)) < 1e-6
    assert two.loop_length == pytest.approx(2.0 * one.loop_length)


def test_holonomy_base_point_conjugation():
    sampler, chart, _ = radial_sampler(0.01, 0.2)
    here = holonomy(sampler, chart.core_rho, tol=1e-11)
    there = holonomy(sampler, chart.core_rho, theta0=1.3, tol=1e-11)
    assert abs(np.trace(here.matrix) - np.trace(there.matrix)) < 1e-8


def test_holonomy_rejects_bad_periods():
    sampler, chart, _ = radial_sampler(0.01, 0.2)
    with pytest.raises(FrameError):
        holonomy(sampler, chart.core_rho, periods=0)
