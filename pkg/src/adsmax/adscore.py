"""Linear algebra of the quadric model of anti-de Sitter 3-space.

The ambient space is R^{2,2} with the signature (2,2) bilinear form

    <x, y> = x0*y0 + x1*y1 - x2*y2 - x3*y3,

and AdS3 is the quadric {<x, x> = -1}.  Its boundary at infinity is the
projectivized null cone.  Writing a vector as the 2x2 matrix

    M(x) = [[x0 + x2, x1 + x3],
            [-x1 + x3, x0 - x2]],        det M(x) = <x, x>,

identifies null directions with rank-one matrices u v^T, so the boundary
is doubly ruled: one family of projective lines keeps [u] fixed, the other
keeps [v] fixed.  Orientation-preserving isometries in the identity
component act as X -> A X B^T with A, B in SL(2,R); A moves the lines of
the first ruling (the family containing the line through (1,0,1,0) and
(0,1,0,1)) and B moves the second.  This module provides the forms, the
membership test for the isometry group, the splitting into the (A, B)
factor pair, and the disjointness test between a dual plane and a sampled
boundary curve.

The complexification C^4 carries the compatible hermitian form

    <z, w> = z1*conj(w1) + z2*conj(w2) - z3*conj(w3) - z4*conj(w4),

used by the moving-frame machinery.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DomainError, RulingError

# Signs of the quadratic form, as a vector and as the Gram matrix J.
FORM_SIGNS = np.array([1.0, 1.0, -1.0, -1.0])
J = np.diag(FORM_SIGNS)

# Change of basis x -> vec(M(x)) in column-major order (M11, M21, M12, M22).
_Q = np.array(
    [
        [1.0, 0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0, 1.0],
        [0.0, 1.0, 0.0, 1.0],
        [1.0, 0.0, -1.0, 0.0],
    ]
)
_Q_INV = np.linalg.inv(_Q)


def bilinear_form(x: np.ndarray, y: np.ndarray) -> float:
    """Signature (2,2) pairing <x, y> of two real 4-vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.sum(FORM_SIGNS * x * y))


def hermitian_form(z: np.ndarray, w: np.ndarray) -> complex:
    """Hermitian extension of the pairing to C^4, conjugating the second slot."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return complex(np.sum(FORM_SIGNS * z * np.conj(w)))


class IsometryCheck(NamedTuple):
    ok: bool
    form_defect: float
    det_defect: float


def is_isometry(m: np.ndarray, tol: float = 1e-10) -> IsometryCheck:
    """Test membership in SO(2,2): m^T J m = J and det m = 1.

    Returns the boolean together with the sup-norm defect of the form
    equation and the determinant defect, so callers can report how far a
    numerically produced matrix is from the group.  The pass/fail verdict
    scales the tolerance with the squared matrix magnitude, since both
    defects of an exact isometry grow that way under round-off; the
    reported defects stay absolute.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (4, 4):
        raise DomainError(f"expected a 4x4 matrix, got shape {m.shape}")
    form_defect = float(np.max(np.abs(m.T @ J @ m - J)))
    det_defect = float(abs(np.linalg.det(m) - 1.0))
    scale_sq = max(1.0, float(np.max(np.abs(m)))) ** 2
    ok = form_defect <= tol * scale_sq and det_defect <= tol * scale_sq
    return IsometryCheck(ok, form_defect, det_defect)


def matrix_model(x: np.ndarray) -> np.ndarray:
    """2x2 matrix M(x) with det M(x) = <x, x>."""
    x = np.asarray(x, dtype=float)
    return np.array([[x[0] + x[2], x[1] + x[3]], [-x[1] + x[3], x[0] - x[2]]])


def vector_from_matrix(m2: np.ndarray) -> np.ndarray:
    """Inverse of :func:`matrix_model`."""
    p, r = m2[0]
    s, t = m2[1]
    return 0.5 * np.array([p + t, r - s, p - t, r + s])


def null_direction(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Null 4-vector with ruling parameters ([u], [v]), via M^{-1}(u v^T)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return vector_from_matrix(np.outer(u, v))


def _vec_colmajor(a: np.ndarray) -> np.ndarray:
    return a.flatten(order="F")


def psl2_factors(m: np.ndarray, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Split an identity-component isometry into its PSL(2,R) factor pair.

    Conjugating by the matrix model turns m into the map X -> A X B^T on
    2x2 matrices, i.e. the Kronecker product kron(B, A) on column-major
    vectorizations.  The pair is recovered by the rank-one factorization of
    the Kronecker rearrangement (the second singular value must vanish for
    a ruling-coherent m), then normalized to det A = det B = 1 and to a
    deterministic overall sign.  Raises RulingError when m swaps the two
    rulings or reverses orientation on them, which signals a matrix outside
    the identity component.
    """
    m = np.asarray(m, dtype=float)
    check = is_isometry(m, tol=max(tol, 1e-8))
    if not check.ok:
        raise RulingError(
            f"not an isometry: form defect {check.form_defect:.3e}, "
            f"det defect {check.det_defect:.3e}"
        )
    t44 = _Q @ m @ _Q_INV

    # Rearrangement: R[j + 2l, i + 2k] = T[i + 2j, k + 2l]; for a Kronecker
    # product T = kron(B, A) this is the rank-one matrix vec(B) vec(A)^T.
    rearr = np.empty((4, 4))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    rearr[j + 2 * l, i + 2 * k] = t44[i + 2 * j, k + 2 * l]
    svd_u, svd_s, svd_vt = np.linalg.svd(rearr)
    if svd_s[1] > tol * max(svd_s[0], 1.0):
        raise RulingError(
            "isometry mixes the two boundary rulings "
            f"(second singular value {svd_s[1]:.3e}); not in the identity component"
        )
    vec_b = svd_u[:, 0] * np.sqrt(svd_s[0])
    vec_a = svd_vt[0, :] * np.sqrt(svd_s[0])
    a0 = np.array([[vec_a[0], vec_a[2]], [vec_a[1], vec_a[3]]])
    b0 = np.array([[vec_b[0], vec_b[2]], [vec_b[1], vec_b[3]]])

    det_a0 = float(np.linalg.det(a0))
    if det_a0 <= tol * max(1.0, svd_s[0]):
        raise RulingError(
            "isometry reverses orientation on the rulings; not in the identity component"
        )
    scale = np.sqrt(det_a0)
    fac_a = a0 / scale
    fac_b = b0 * scale
    if abs(np.linalg.det(fac_b) - 1.0) > 1e3 * tol:
        raise RulingError(
            f"factor determinants do not normalize to one (det B = {np.linalg.det(fac_b):.6f})"
        )
    recon = _Q_INV @ np.kron(fac_b, fac_a) @ _Q
    defect = float(np.max(np.abs(recon - m)))
    if defect > 1e3 * tol * max(1.0, float(np.max(np.abs(m)))):
        raise RulingError(f"factor reconstruction defect {defect:.3e} exceeds tolerance")

    # Deterministic representative of the (A, B) ~ (-A, -B) ambiguity.
    flat = fac_a.ravel()
    lead = flat[np.argmax(np.abs(flat))]
    if lead < 0:
        fac_a = -fac_a
        fac_b = -fac_b
    return fac_a, fac_b

def isometry_from_factors(fac_a: np.ndarray, fac_b: np.ndarray) -> np.ndarray:
    """Isometry of R^{2,2} induced by an SL(2,R) pair acting as X -> A X B^T."""
    return _Q_INV @ np.kron(np.asarray(fac_b, float), np.asarray(fac_a, float)) @ _Q


def dual_plane_disjoint(
    x: np.ndarray,
    curve_samples: np.ndarray,
    tol: float = 1e-9,
    null_tol: float = 1e-8,
) -> bool:
    """True when the dual plane of an AdS point misses every curve sample.

    The dual plane of x is {y : <x, y> = 0}.  Samples are null directions
    (projective, so they are normalized to unit Euclidean length before the
    pairing is compared against ``tol``).  Rejects inputs that are not an
    AdS point or not null within ``null_tol``.
    """
    x = np.asarray(x, dtype=float)
    if abs(bilinear_form(x, x) + 1.0) > 1e-8:
        raise DomainError("x is not an AdS point: <x, x> != -1")
    samples = np.atleast_2d(np.asarray(curve_samples, dtype=float))
    if samples.size == 0:
        raise DomainError("empty curve sample")
    norms = np.linalg.norm(samples, axis=1)
    if np.any(norms == 0.0):
        raise DomainError("zero vector in curve sample")
    unit = samples / norms[:, None]
    null_defect = np.abs(np.einsum("i,ni,ni->n", FORM_SIGNS, unit, unit))
    if np.any(null_defect > null_tol):
        raise DomainError(
            f"curve sample not null: worst defect {float(np.max(null_defect)):.3e}"
        )
    pairings = unit @ (FORM_SIGNS * x)
    return bool(np.all(np.abs(pairings) > tol))


# Generators of the identity component, used to build test isometries and
# to realize concrete boundary maps.

def rotation_01(angle: float) -> np.ndarray:
    m = np.eye(4)
    c, s = np.cos(angle), np.sin(angle)
    m[0, 0] = c
    m[0, 1] = -s
    m[1, 0] = s
    m[1, 1] = c
    return m


def rotation_23(angle: float) -> np.ndarray:
    m = np.eye(4)
    c, s = np.cos(angle), np.sin(angle)
    m[2, 2] = c
    m[2, 3] = -s
    m[3, 2] = s
    m[3, 3] = c
    return m


def boost(plus_axis: int, minus_axis: int, rapidity: float) -> np.ndarray:
    """Hyperbolic rotation mixing a positive axis (0 or 1) with a negative one (2 or 3)."""
    if plus_axis not in (0, 1) or minus_axis not in (2, 3):
        raise DomainError("boost needs one positive-definite and one negative-definite axis")
    m = np.eye(4)
    ch, sh = np.cosh(rapidity), np.sinh(rapidity)
    m[plus_axis, plus_axis] = ch
    m[plus_axis, minus_axis] = sh
    m[minus_axis, plus_axis] = sh
    m[minus_axis, minus_axis] = ch
    return m


def random_isometry(rng: np.random.Generator, n_factors: int = 4) -> np.ndarray:
    """Random product of coordinate-plane rotations and boosts."""
    m = np.eye(4)
    for _ in range(n_factors):
        kind = rng.integers(0, 3)
        if kind == 0:
            m = m @ rotation_01(rng.uniform(-np.pi, np.pi))
        elif kind == 1:
            m = m @ rotation_23(rng.uniform(-np.pi, np.pi))
        else:
            m = m @ boost(
                int(rng.integers(0, 2)), int(rng.integers(2, 4)), rng.uniform(-1.5, 1.5)
            )
    return m
