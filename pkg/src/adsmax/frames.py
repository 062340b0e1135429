"""Frame fields along paths, flatness checks, and holonomy matrices.

A maximal conformal immersion with induced metric I = 2 e^{2 phi} |dzeta|^2
and quadratic differential q = f dzeta^2 has a frame field
F = [v1 | v2 | N | sigma] (normalized zeta- and zetabar-tangents, unit
normal, position) solving the linear matrix ODE

    dF = F (U dzeta + V dzetabar),

    U = [[ phi_z, 0,        0,        e^phi ],
         [ 0,     -phi_z,   f e^-phi, 0     ],
         [ f e^-phi, 0,     0,        0     ],
         [ 0,     e^phi,    0,        0     ]]

    V = [[ -conj(phi_z), 0,            conj(f) e^-phi, 0     ],
         [ 0,            conj(phi_z),  0,              e^phi ],
         [ 0,            conj(f) e^-phi, 0,            0     ],
         [ e^phi,        0,            0,              0     ]]

Both matrices are trace-free, and U^H J + J V = 0 for the hermitian form
of signature (2,2), so the Gram matrix of the frame columns is a constant
of motion; the measured Gram drift doubles as an integrator diagnostic.
Conjugation symmetry conj(U) = S V S with S the swap of the first two
coordinates makes the holonomy F_end F_0^{-1} exactly real in exact
arithmetic; the residual imaginary part is measured and truncated.

The connection is sampled from a solved conformal factor: phi = v + log
Lambda splits into the grid part v (differentiated with centered
differences on its own grid, fourth-order stencils at interior nodes) and
the closed-form density part log Lambda.  Fields are evaluated between
nodes with quintic splines.  A constant v therefore has exactly zero grid
derivative and the Fuchsian connection is reproduced to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import RectBivariateSpline, make_interp_spline

from .adscore import FORM_SIGNS, J
from .domains import MetricDensity, QuadDiff
from .errors import FrameError
from .gauss import ConformalFactorField

_SQRT2 = np.sqrt(2.0)

# Columns: v1 = (e1 - i e2)/sqrt2, v2 = (e1 + i e2)/sqrt2, N = e3, sigma = e4.
STANDARD_FRAME = np.array(
    [
        [1.0 / _SQRT2, 1.0 / _SQRT2, 0.0, 0.0],
        [-1.0j / _SQRT2, 1.0j / _SQRT2, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ],
    dtype=complex,
)

_STANDARD_FRAME_INV = np.linalg.inv(STANDARD_FRAME)


def gram_matrix(frame: np.ndarray) -> np.ndarray:
    """Pairwise hermitian products of the frame columns, (i, j) -> <col_j, col_i>."""
    frame = np.asarray(frame, dtype=complex)
    return frame.conj().T @ (FORM_SIGNS[:, None] * frame)


REFERENCE_GRAM = gram_matrix(STANDARD_FRAME)  # equals diag(1, 1, -1, -1)


def connection_matrices(phi: float, phi_z: complex, f: complex) -> tuple:
    """The two connection matrices built from (phi, phi_z, f)."""
    ep = np.exp(phi)
    em = np.exp(-phi)
    u = np.array(
        [
            [phi_z, 0.0, 0.0, ep],
            [0.0, -phi_z, f * em, 0.0],
            [f * em, 0.0, 0.0, 0.0],
            [0.0, ep, 0.0, 0.0],
        ],
        dtype=complex,
    )
    v = np.array(
        [
            [-np.conj(phi_z), 0.0, np.conj(f) * em, 0.0],
            [0.0, np.conj(phi_z), 0.0, ep],
            [0.0, np.conj(f) * em, 0.0, 0.0],
            [ep, 0.0, 0.0, 0.0],
        ],
        dtype=complex,
    )
    return u, v


def _centered_derivative_nodes(values: np.ndarray, spacing: float, axis: int = 0) -> np.ndarray:
    """Fourth-order centered differences along a non-periodic axis.

    Returns derivatives at nodes 2..n-3 (the stencil needs two neighbours
    on each side).
    """
    v = np.moveaxis(values, axis, 0)
    num = -v[4:] + 8.0 * v[3:-1] - 8.0 * v[1:-3] + v[:-4]
    return np.moveaxis(num / (12.0 * spacing), 0, axis)


def _centered_derivative_periodic(values: np.ndarray, spacing: float, axis: int) -> np.ndarray:
    """Fourth-order centered differences along a periodic axis (all nodes)."""
    v = np.moveaxis(values, axis, 0)
    num = (
        -np.roll(v, -2, axis=0)
        + 8.0 * np.roll(v, -1, axis=0)
        - 8.0 * np.roll(v, 1, axis=0)
        + np.roll(v, 2, axis=0)
    )
    return np.moveaxis(num / (12.0 * spacing), 0, axis)


class RadialFrameSampler:
    """Connection data from a rotationally invariant conformal factor.

    Built from node values of v on a uniform rho grid; phi = v + log
    Lambda with the log Lambda part taken from the density's closed-form
    profile and derivative.
    """

    def __init__(self, rho: np.ndarray, values: np.ndarray, h: MetricDensity, q: QuadDiff):
        rho = np.asarray(rho, dtype=float)
        values = np.asarray(values, dtype=float)
        if rho.ndim != 1 or rho.shape != values.shape or rho.size < 8:
            raise FrameError("radial sampler needs matching 1D arrays of at least 8 nodes")
        spacing = rho[1] - rho[0]
        dv = _centered_derivative_nodes(values, spacing)
        core = slice(2, rho.size - 2)
        self._v_spline = make_interp_spline(rho[core], values[core], k=5)
        self._dv_spline = make_interp_spline(rho[core], dv, k=5)
        self.rho_lo = float(rho[2])
        self.rho_hi = float(rho[-3])
        self.h = h
        self.q = q
        if h.dlog_profile is None:
            raise FrameError("density lacks a closed-form log-derivative")

    def _require(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < self.rho_lo - 1e-12) or np.any(rho > self.rho_hi + 1e-12):
            raise FrameError(
                f"evaluation at rho = {float(np.atleast_1d(rho)[0]):.6g} outside the "
                f"sampler stencil range [{self.rho_lo:.6g}, {self.rho_hi:.6g}]"
            )
        return rho

    def phi(self, zeta: complex) -> float:
        rho = self._require(np.real(zeta))
        return float(self._v_spline(rho) + np.log(self.h.radial_profile(rho)))

    def phi_z(self, zeta: complex) -> complex:
        rho = self._require(np.real(zeta))
        d_rho = float(self._dv_spline(rho) + self.h.dlog_profile(rho))
        return 0.5 * d_rho

    def f_coeff(self, zeta: complex) -> complex:
        return complex(self.q.strip_coefficient(complex(zeta)))

    def connection(self, zeta: complex) -> tuple:
        return connection_matrices(self.phi(zeta), self.phi_z(zeta), self.f_coeff(zeta))


class GridFrameSampler:
    """Connection data from a full (rho, theta) conformal factor field."""

    _PAD = 5

    def __init__(self, field: ConformalFactorField, h: MetricDensity, q: QuadDiff):
        grid = field.grid
        rho = grid.rho
        theta = grid.theta
        values = field.values
        dv_rho = _centered_derivative_nodes(values, grid.drho, axis=0)
        dv_theta = _centered_derivative_periodic(values, grid.dtheta, axis=1)
        core = slice(2, rho.size - 2)

        pad = self._PAD
        theta_ext = np.concatenate([theta[-pad:] - 2 * np.pi, theta, theta[:pad] + 2 * np.pi])

        def extend(arr):
            return np.concatenate([arr[:, -pad:], arr, arr[:, :pad]], axis=1)

        self._v_spline = RectBivariateSpline(
            rho[core], theta_ext, extend(values[core, :]), kx=5, ky=5
        )
        self._dr_spline = RectBivariateSpline(
            rho[core], theta_ext, extend(dv_rho), kx=5, ky=5
        )
        self._dt_spline = RectBivariateSpline(
            rho[core], theta_ext, extend(dv_theta[core, :]), kx=5, ky=5
        )
        self.rho_lo = float(rho[2])
        self.rho_hi = float(rho[-3])
        self.h = h
        self.q = q
        if h.dlog_profile is None:
            raise FrameError("density lacks a closed-form log-derivative")

    def _split(self, zeta: complex) -> tuple:
        rho = float(np.real(zeta))
        if rho < self.rho_lo - 1e-12 or rho > self.rho_hi + 1e-12:
            raise FrameError(
                f"evaluation at rho = {rho:.6g} outside the sampler stencil range "
                f"[{self.rho_lo:.6g}, {self.rho_hi:.6g}]"
            )
        theta = float(np.imag(zeta)) % (2.0 * np.pi)
        return rho, theta

    def phi(self, zeta: complex) -> float:
        rho, theta = self._split(zeta)
        v = self._v_spline(rho, theta).item()
        return v + float(np.log(self.h.radial_profile(rho)))

    def phi_z(self, zeta: complex) -> complex:
        rho, theta = self._split(zeta)
        d_rho = self._dr_spline(rho, theta).item() + float(self.h.dlog_profile(rho))
        d_theta = self._dt_spline(rho, theta).item()
        return 0.5 * (d_rho - 1j * d_theta)

    def f_coeff(self, zeta: complex) -> complex:
        return complex(self.q.strip_coefficient(complex(zeta)))

    def connection(self, zeta: complex) -> tuple:
        return connection_matrices(self.phi(zeta), self.phi_z(zeta), self.f_coeff(zeta))


def sampler_from_field(field: ConformalFactorField, h: MetricDensity, q: QuadDiff):
    return GridFrameSampler(field, h, q)


def sampler_from_radial(rho, values, h: MetricDensity, q: QuadDiff) -> RadialFrameSampler:
    return RadialFrameSampler(rho, values, h, q)


def connection_at(field: ConformalFactorField, h: MetricDensity, q: QuadDiff, x: complex) -> tuple:
    """Connection matrices at the chart point x (interior to the grid)."""
    zeta = complex(np.log(complex(x)))
    return GridFrameSampler(field, h, q).connection(zeta)


@dataclass(frozen=True)
class FrameState:
    """Frame matrix at a strip point with its transport diagnostics."""

    matrix: np.ndarray
    zeta: complex
    gram_drift: float
    path_length: float
    steps: int

    def gram_defect(self) -> float:
        return float(np.max(np.abs(gram_matrix(self.matrix) - REFERENCE_GRAM)))


def theta_loop(rho: float, periods: int = 1, theta0: float = 0.0) -> tuple:
    """Straight strip segment winding `periods` times around the annulus."""
    start = complex(rho, theta0)
    return ((start, start + 2j * np.pi * periods),)


def rectangle_loop(zeta0: complex, drho: float, dtheta: float) -> tuple:
    """Closed contractible rectangle with lower-left corner zeta0."""
    a = complex(zeta0)
    b = a + drho
    c = b + 1j * dtheta
    d = a + 1j * dtheta
    return ((a, b), (b, c), (c, d), (d, a))


def _rk4_step(sampler, frame: np.ndarray, z0: complex, direction: complex, h: float) -> np.ndarray:
    def rate(mat, s):
        u, v = sampler.connection(z0 + s * direction)
        return mat @ (u * direction + v * np.conj(direction))

    k1 = rate(frame, 0.0)
    k2 = rate(frame + 0.5 * h * k1, 0.5 * h)
    k3 = rate(frame + 0.5 * h * k2, 0.5 * h)
    k4 = rate(frame + h * k3, h)
    return frame + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_frame(
    sampler,
    path: Sequence,
    init: Optional[np.ndarray] = None,
    tol: float = 1e-10,
) -> FrameState:
    """Adaptive fourth-order transport of a frame along straight strip segments.

    `path` is a sequence of (start, end) complex strip points.  Step halves
    and doubles by comparing a full step against two half steps; the
    per-unit-length error budget is tol/(total length).
    """
    frame = STANDARD_FRAME.copy() if init is None else np.array(init, dtype=complex)
    if frame.shape != (4, 4):
        raise FrameError("initial frame must be a 4x4 matrix")
    segments = [(complex(a), complex(b)) for a, b in path]
    total = sum(abs(b - a) for a, b in segments)
    start_zeta = segments[0][0] if segments else 0j
    if total == 0.0:
        return FrameState(frame, start_zeta, 0.0, 0.0, 0)
    budget = tol / total
    steps = 0
    for z0, z1 in segments:
        seg = z1 - z0
        length = abs(seg)
        if length == 0.0:
            continue
        direction = seg / length
        s = 0.0
        h = length / 8.0
        eps = float(np.finfo(float).eps)
        while s < length - 1e-14:
            h = min(h, length - s)
            z_here = z0 + s * direction
            big = _rk4_step(sampler, frame, z_here, direction, h)
            half = _rk4_step(sampler, frame, z_here, direction, 0.5 * h)
            half = _rk4_step(sampler, half, z_here + 0.5 * h * direction, direction, 0.5 * h)
            err = float(np.max(np.abs(big - half))) / 15.0
            # Error budget is relative to the transported frame magnitude,
            # with a round-off floor so end-of-segment slivers always pass.
            scale = max(1.0, float(np.max(np.abs(frame))))
            allowed = max(budget * h * scale, 64.0 * eps * scale)
            if err <= allowed:
                frame = half + (half - big) / 15.0
                s += h
                steps += 1
                grow = (allowed / err) ** 0.2 if err > 0 else 5.0
                h *= min(5.0, max(0.2, 0.9 * grow))
            else:
                if h <= 1e-12 * total:
                    raise FrameError("integrator step underflow (singular data on path)")
                h *= max(0.2, 0.9 * (allowed / err) ** 0.2)
    drift = float(np.max(np.abs(gram_matrix(frame) - gram_matrix(
        STANDARD_FRAME if init is None else np.asarray(init, dtype=complex)))))
    return FrameState(frame, segments[-1][1], drift, total, steps)


def deck_diag(gamma_prime: complex) -> np.ndarray:
    """Diagonal twist diag(g/|g|, conj(g)/|g|, 1, 1) of the deck derivative."""
    gamma_prime = complex(gamma_prime)
    if gamma_prime == 0:
        raise FrameError("deck derivative must be nonzero")
    unit = gamma_prime / abs(gamma_prime)
    return np.diag([unit, np.conj(unit), 1.0, 1.0]).astype(complex)


@dataclass(frozen=True)
class HolonomyResult:
    """Holonomy of the annulus core loop with its diagnostics."""

    matrix: np.ndarray          # real 4x4
    h_factor: np.ndarray        # path-ordered solution with identity start
    d_factor: np.ndarray        # deck twist (identity in the strip coordinate)
    realness_defect: float
    gram_drift: float
    loop_length: float
    base_rho: float
    periods: int
    steps: int


def holonomy(
    sampler,
    rho: float,
    periods: int = 1,
    theta0: float = 0.0,
    tol: float = 1e-10,
    realness_tol: float = 1e-6,
) -> HolonomyResult:
    """Holonomy rho(gamma^periods) of the core loop at fixed log-radius.

    The strip deck map zeta -> zeta + 2 pi i has derivative 1, so the
    diagonal twist is the identity; the conjugating factor is the standard
    base frame.  The result is truncated to its real part after checking
    the imaginary part is below `realness_tol`.
    """
    if periods < 1:
        raise FrameError("periods must be a positive integer")
    state = integrate_frame(sampler, theta_loop(rho, periods, theta0), tol=tol)
    d = deck_diag(1.0)
    raw = state.matrix @ d @ _STANDARD_FRAME_INV
    realness = float(np.max(np.abs(np.imag(raw))))
    scale = max(1.0, float(np.max(np.abs(np.real(raw)))))
    if realness > realness_tol * scale:
        raise FrameError(
            f"holonomy has imaginary part {realness:.3e} above tolerance "
            f"{realness_tol:.1e} relative to matrix scale {scale:.3g} "
            f"(integration error or non-equivariant data)"
        )
    h_factor = _STANDARD_FRAME_INV @ state.matrix
    return HolonomyResult(
        matrix=np.real(raw),
        h_factor=h_factor,
        d_factor=d,
        realness_defect=realness,
        gram_drift=state.gram_drift,
        loop_length=state.path_length,
        base_rho=float(rho),
        periods=periods,
        steps=state.steps,
    )


def core_length(h: MetricDensity, n_samples: int = 256) -> float:
    """Geodesic core circle length in the density, by numeric quadrature."""
    chart = h.chart
    rho_core = chart.core_rho
    theta = np.linspace(0.0, 2.0 * np.pi, n_samples + 1)
    lam = h.radial_profile(np.full(theta.shape, rho_core))
    return float(np.trapezoid(lam, theta))
