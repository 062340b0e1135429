"""Tests of the split-signature quadric model and its isometry algebra."""

import numpy as np
import pytest

from adsmax.adscore import (
    J,
    bilinear_form,
    boost,
    dual_plane_disjoint,
    hermitian_form,
    is_isometry,
    isometry_from_factors,
    matrix_model,
    null_direction,
    psl2_factors,
    random_isometry,
    rotation_01,
    rotation_23,
    vector_from_matrix,
)
from adsmax.errors import DomainError, RulingError


def test_bilinear_form_signature_examples():
    assert bilinear_form([1, 0, 0, 0], [1, 0, 0, 0]) == 1.0
    assert bilinear_form([0, 0, 1, 0], [0, 0, 1, 0]) == -1.0
    assert bilinear_form([1, 1, 1, 1], [1, -1, 1, -1]) == 0.0


def test_bilinear_form_symmetry():
    rng = np.random.default_rng(11)
    for _ in range(50):
        x = rng.normal(size=4)
        y = rng.normal(size=4)
        assert bilinear_form(x, y) == pytest.approx(bilinear_form(y, x), abs=0.0)


def test_bilinear_form_is_linear():
    rng = np.random.default_rng(12)
    x, y, z = rng.normal(size=(3, 4))
    s = 1.7
    assert bilinear_form(x + s * z, y) == pytest.approx(
        bilinear_form(x, y) + s * bilinear_form(z, y), rel=1e-13
    )


def test_hermitian_form_examples():
    # <iz, iz> keeps the real value: conjugation sits on one slot only.
    assert hermitian_form([1j, 0, 0, 0], [1j, 0, 0, 0]) == 1.0
    assert hermitian_form([1 + 1j, 0, 0, 0], [1, 0, 0, 0]) == 1 + 1j


def test_hermitian_form_conjugate_symmetry():
    rng = np.random.default_rng(13)
    for _ in range(50):
        z = rng.normal(size=4) + 1j * rng.normal(size=4)
        w = rng.normal(size=4) + 1j * rng.normal(size=4)
        assert hermitian_form(z, w) == pytest.approx(np.conj(hermitian_form(w, z)), rel=1e-14)


def test_hermitian_form_restricts_to_bilinear_on_reals():
    rng = np.random.default_rng(14)
    x = rng.normal(size=4)
    y = rng.normal(size=4)
    assert hermitian_form(x, y) == pytest.approx(bilinear_form(x, y), rel=1e-15)


def test_is_isometry_accepts_identity():
    check = is_isometry(np.eye(4))
    assert check.ok
    assert check.form_defect == 0.0
    assert check.det_defect == 0.0


def test_is_isometry_rejects_single_reflection():
    # diag(1,1,1,-1) preserves the form but has determinant -1.
    m = np.diag([1.0, 1.0, 1.0, -1.0])
    check = is_isometry(m)
    assert not check.ok
    assert check.form_defect < 1e-15
    assert check.det_defect == pytest.approx(2.0)


def test_is_isometry_rotation_sweep():
    for theta in np.linspace(0.0, 2.0 * np.pi, 17):
        check = is_isometry(rotation_01(theta) @ rotation_23(-theta))
        assert check.ok
        assert check.form_defect < 1e-12


def test_is_isometry_stable_under_group_conjugation():
    # Conjugating by a bounded group element should not change the verdict
    # and should keep the defect within an order of magnitude.
    rng = np.random.default_rng(15)
    for _ in range(20):
        m = random_isometry(rng)
        g = random_isometry(rng)
        base = is_isometry(m)
        conj = is_isometry(g @ m @ np.linalg.inv(g))
        assert base.ok and conj.ok
        scale = max(1.0, float(np.max(np.abs(g))) ** 4)
        assert conj.form_defect <= 10.0 * scale * max(base.form_defect, 1e-15)


def test_matrix_model_det_is_the_form():
    rng = np.random.default_rng(16)
    for _ in range(100):
        x = rng.normal(size=4)
        assert np.linalg.det(matrix_model(x)) == pytest.approx(
            bilinear_form(x, x), rel=1e-12, abs=1e-12
        )


def test_vector_from_matrix_inverts_matrix_model():
    rng = np.random.default_rng(17)
    for _ in range(100):
        x = rng.normal(size=4)
        back = vector_from_matrix(matrix_model(x))
        assert np.max(np.abs(back - x)) < 1e-15


def test_null_direction_is_null_and_rank_one():
    rng = np.random.default_rng(18)
    for _ in range(50):
        u = rng.normal(size=2)
        v = rng.normal(size=2)
        if abs(u @ u) < 1e-3 or abs(v @ v) < 1e-3:
            continue
        x = null_direction(u, v)
        assert abs(bilinear_form(x, x)) < 1e-14
        assert np.linalg.matrix_rank(matrix_model(x), tol=1e-10) == 1


def test_psl2_factors_identity():
    a, b = psl2_factors(np.eye(4))
    assert np.max(np.abs(a - np.eye(2))) < 1e-12
    assert np.max(np.abs(b - np.eye(2))) < 1e-12


def test_psl2_factors_boost_traces():
    # A boost mixing one plus-axis with one minus-axis factors into a pair
    # of hyperbolic elements with equal half-rapidity traces.
    a, b = psl2_factors(boost(0, 2, 0.8))
    expected = 2.0 * np.cosh(0.4)
    assert np.trace(a).real == pytest.approx(expected, abs=1e-12)
    assert np.trace(b).real == pytest.approx(expected, abs=1e-12)
    assert abs(np.trace(a).imag) < 1e-13
    a2, b2 = psl2_factors(boost(1, 3, 0.8))
    assert abs(np.trace(a2)) == pytest.approx(expected, abs=1e-12)
    assert abs(np.trace(b2)) == pytest.approx(expected, abs=1e-12)


def test_psl2_factors_rotation_traces():
    a, b = psl2_factors(rotation_01(0.7))
    expected = 2.0 * np.cos(0.35)
    assert abs(np.trace(a)) == pytest.approx(expected, abs=1e-12)
    assert abs(np.trace(b)) == pytest.approx(expected, abs=1e-12)


def test_psl2_factors_unit_determinants():
    rng = np.random.default_rng(19)
    for _ in range(30):
        a, b = psl2_factors(random_isometry(rng))
        assert np.linalg.det(a) == pytest.approx(1.0, abs=1e-10)
        assert np.linalg.det(b) == pytest.approx(1.0, abs=1e-10)


def test_psl2_factors_reconstruction_sweep():
    rng = np.random.default_rng(20)
    worst = 0.0
    for _ in range(100):
        m = random_isometry(rng)
        a, b = psl2_factors(m)
        back = isometry_from_factors(a, b)
        scale = max(1.0, float(np.max(np.abs(m))))
        worst = max(worst, float(np.max(np.abs(back - m))) / scale)
    assert worst < 1e-13


def test_psl2_factors_rejects_ruling_swap():
    # diag(1,-1,-1,1) preserves form and determinant but exchanges the two
    # rulings, so it lies outside the identity component the factorization
    # covers.
    m = np.diag([1.0, -1.0, -1.0, 1.0])
    assert is_isometry(m).ok
    with pytest.raises(RulingError):
        psl2_factors(m)


def test_isometry_from_factors_lands_in_group():
    rng = np.random.default_rng(21)
    for _ in range(20):
        a = rng.normal(size=(2, 2))
        a /= np.sqrt(abs(np.linalg.det(a)))
        if np.linalg.det(a) < 0:
            a = a @ np.diag([1.0, -1.0]) * 1j  # keep det +1
            a = np.real_if_close(a)
            continue
        b = rng.normal(size=(2, 2))
        b /= np.sqrt(abs(np.linalg.det(b)))
        if np.linalg.det(b) < 0:
            continue
        m = isometry_from_factors(a, b)
        assert is_isometry(m).ok


def test_dual_plane_detects_incidence():
    x = np.array([0.0, 0.0, 1.0, 0.0])
    assert bilinear_form(x, x) == -1.0
    # A null sample lying on the dual plane of x (third component zero).
    on_plane = null_direction([1.0, 1.0], [1.0, 1.0])
    assert abs(bilinear_form(x, on_plane)) < 1e-15
    off_plane = null_direction([1.0, 0.3], [0.2, 1.0])
    assert abs(bilinear_form(x, off_plane)) > 1e-3
    assert not dual_plane_disjoint(x, [on_plane, off_plane])
    assert dual_plane_disjoint(x, [off_plane])


def test_dual_plane_requires_surface_point_and_samples():
    null = null_direction([1.0, 0.0], [0.0, 1.0])
    with pytest.raises(DomainError):
        dual_plane_disjoint([1.0, 0.0, 0.0, 0.0], [null])  # unit, wrong sign
    with pytest.raises(DomainError):
        dual_plane_disjoint([0.0, 0.0, 1.0, 0.0], [])
    with pytest.raises(DomainError):
        dual_plane_disjoint([0.0, 0.0, 1.0, 0.0], [[1.0, 0.0, 0.0, 0.0]])


def test_boost_validates_axes():
    with pytest.raises(DomainError):
        boost(2, 3, 0.5)
    with pytest.raises(DomainError):
        boost(0, 1, 0.5)


def test_random_isometry_sweep():
    rng = np.random.default_rng(22)
    for _ in range(100):
        m = random_isometry(rng)
        check = is_isometry(m)
        assert check.ok
        scale = max(1.0, float(np.max(np.abs(m)))) ** 2
        assert check.form_defect < 1e-12 * scale


def test_form_matrix_is_split_signature():
    assert np.array_equal(J, np.diag([1.0, 1.0, -1.0, -1.0]))
