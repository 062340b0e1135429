"""Annulus and cusp charts with their conformal densities and Laurent data.

Charts are round: the plumbing annulus {|t|/c < |x| < c} for a gluing
parameter 0 < |t| < c^2, and the punctured disc {0 < |x| < c} at a cusp.
All radial formulas are written in the log coordinate rho = log|x|; the
strip coordinate zeta = rho + i*theta (x = exp(zeta)) makes every metric
here a profile Lambda(rho) against |dzeta|^2, with density
lambda(x) = Lambda(log|x|)/|x| against |dx|^2.

Density flavors:

* hyperbolic: the cusp chart carries 1/(|x| |log|x||), the restriction of
  the complete metric of the punctured unit disc.  The annulus carries the
  complete hyperbolic metric of the node-normalized annulus
  {|t| < |x| < 1} restricted to the chart,

      Lambda(rho) = (pi/T) / sin(pi (rho + T)/T),     T = -log|t|,

  the unique curvature -1 normalization whose densities converge to the
  cusp density on compact sub-annuli as t -> 0.  Its geodesic core sits on
  |x| = sqrt(|t|) = sqrt(r c) with r = |t|/c.
* grafting: for t != 0 a flat cylinder density A_t/|x|, normalized so that
  it agrees with the hyperbolic density at |x| = c; for t = 0 it coincides
  with the hyperbolic cusp density.
* perturbed: a piecewise interpolation that replaces the thin part by a
  flat collar of density 1/(2|log c| |x|) and returns to the grafting
  density through smooth transition bands of width |log c|.  On the
  annulus the flat collar occupies log|t| - K <= rho <= K with

      K(t, c) = (log|t|/pi) * arcsin(2 pi log(c)/log|t|),

  defined for 0 < |t| < c^{2 pi}; for larger |t| there is no collar and
  the perturbed metric is the grafting metric everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional

import numpy as np

from .errors import ConfigError, DomainError, PoleOrderError

_EDGE_SLACK = 1e-12


@dataclass(frozen=True)
class ConformalChart:
    """A round annulus or punctured-disc chart in the x coordinate."""

    kind: str
    c: float
    t: complex = 0j
    coordinate: str = "z"

    def __post_init__(self):
        if self.kind not in ("annulus", "cusp"):
            raise DomainError(f"unknown chart kind {self.kind!r}")
        if not 0.0 < self.c < 1.0:
            raise DomainError(f"chart scale c must lie in (0, 1), got {self.c}")
        if self.kind == "annulus":
            if not 0.0 < abs(self.t) < self.c**2:
                raise DomainError(
                    f"annulus needs 0 < |t| < c^2 = {self.c**2:.6g}, got |t| = {abs(self.t):.6g}"
                )
        elif self.t != 0:
            raise DomainError("cusp chart has no gluing parameter")
        if self.coordinate not in ("z", "w"):
            raise DomainError(f"coordinate label must be 'z' or 'w', got {self.coordinate!r}")

    @classmethod
    def annulus(cls, t: complex, c: float, coordinate: str = "z") -> "ConformalChart":
        return cls("annulus", c, complex(t), coordinate)

    @classmethod
    def cusp(cls, c: float, coordinate: str = "z") -> "ConformalChart":
        return cls("cusp", c, 0j, coordinate)

    @property
    def rho_min(self) -> float:
        if self.kind == "annulus":
            return float(np.log(abs(self.t) / self.c))
        return -np.inf

    @property
    def rho_max(self) -> float:
        return float(np.log(self.c))

    @property
    def modulus(self) -> float:
        """Conformal modulus log(c^2/|t|)/(2 pi) of the annulus."""
        if self.kind != "annulus":
            raise DomainError("modulus is defined for annulus charts only")
        return float(np.log(self.c**2 / abs(self.t)) / (2.0 * np.pi))

    @property
    def core_rho(self) -> float:
        """Log-radius of the hyperbolic geodesic core, log sqrt(|t|)."""
        if self.kind != "annulus":
            raise DomainError("the geodesic core is defined for annulus charts only")
        return float(0.5 * np.log(abs(self.t)))

    def contains_rho(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        return (rho > self.rho_min - _EDGE_SLACK) & (rho < self.rho_max + _EDGE_SLACK)

    def require_rho(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        if not np.all(self.contains_rho(rho)):
            bad = rho[~self.contains_rho(rho)]
            raise DomainError(
                f"log-radius {float(np.atleast_1d(bad)[0]):.6g} outside chart "
                f"({self.rho_min:.6g}, {self.rho_max:.6g})"
            )
        return rho

    def point(self, rho, theta) -> np.ndarray:
        """Chart point exp(rho + i theta)."""
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        return np.exp(rho + 1j * theta)


@dataclass(frozen=True)
class MetricDensity:
    """Rotationally invariant conformal density on a chart.

    ``profile`` returns Lambda(rho), the density against the strip element
    |dzeta|; ``dlog_profile`` its logarithmic rho-derivative when the
    branch has one in closed form; ``branch_curvature`` returns the exact
    Gaussian curvature where a branch is exactly flat or hyperbolic and
    NaN where only numerical differentiation applies.
    """

    flavor: str
    chart: ConformalChart
    profile: Callable[[np.ndarray], np.ndarray]
    dlog_profile: Optional[Callable[[np.ndarray], np.ndarray]] = None
    branch_curvature: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def density(self, x) -> np.ndarray:
        """lambda(x) against |dx|^2, validating chart membership."""
        x = np.asarray(x, dtype=complex)
        r = np.abs(x)
        if np.any(r == 0):
            raise DomainError("density undefined at the puncture")
        rho = self.chart.require_rho(np.log(r))
        return self.profile(rho) / r

    def radial_profile(self, rho) -> np.ndarray:
        return self.profile(self.chart.require_rho(rho))

    def curvature(self, rho, fallback_step: float = 2e-3) -> np.ndarray:
        """Gaussian curvature at log-radius rho, exact on exact branches.

        Transition bands (NaN from ``branch_curvature``) fall back to the
        finite-difference oracle.
        """
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        if self.branch_curvature is None:
            return metric_curvature(self, rho)
        out = np.asarray(self.branch_curvature(rho), dtype=float).copy()
        hole = np.isnan(out)
        if np.any(hole):
            out[hole] = metric_curvature(self, rho[hole], step=fallback_step)
        return out


def hyperbolic_density(chart: ConformalChart) -> MetricDensity:
    """Curvature -1 density of the chart (see the module docstring)."""
    if chart.kind == "cusp":
        profile = lambda rho: -1.0 / rho
        dlog = lambda rho: -1.0 / rho
        curv = lambda rho: np.full(np.shape(rho), -1.0)
    else:
        big_t = -np.log(abs(chart.t))

        def profile(rho, big_t=big_t):
            return (np.pi / big_t) / np.sin(np.pi * (rho + big_t) / big_t)

        def dlog(rho, big_t=big_t):
            return -(np.pi / big_t) / np.tan(np.pi * (rho + big_t) / big_t)

        curv = lambda rho: np.full(np.shape(rho), -1.0)
    return MetricDensity("hyperbolic", chart, profile, dlog, curv)


def grafting_density(chart: ConformalChart) -> MetricDensity:
    """Flat cylinder density matched to the hyperbolic one at |x| = c.

    On a cusp chart (t = 0) this is the hyperbolic cusp density itself.
    """
    if chart.kind == "cusp":
        base = hyperbolic_density(chart)
        return MetricDensity("grafting", chart, base.profile, base.dlog_profile,
                             base.branch_curvature)
    hyp = hyperbolic_density(chart)
    level = float(hyp.profile(np.asarray(chart.rho_max)))
    profile = lambda rho, level=level: np.full(np.shape(rho), level)
    dlog = lambda rho: np.zeros(np.shape(rho))
    curv = lambda rho: np.zeros(np.shape(rho))
    return MetricDensity("grafting", chart, profile, dlog, curv)


def collar_K(t: complex, c: float) -> float:
    """Half-width parameter of the flat collar in the perturbed metric.

    K(t, c) = (log|t|/pi) * arcsin(2 pi log(c)/log|t|), real and negative
    for 0 < |t| < c^{2 pi}; at |t| = c^{2 pi} it equals log|t|/2 = pi log c,
    and K -> 2 log c as |t| -> 0.
    """
    if not 0.0 < c < 1.0:
        raise DomainError(f"need 0 < c < 1, got {c}")
    mag = abs(t)
    if mag == 0.0:
        raise DomainError("collar width is defined for t != 0")
    if mag > c ** (2.0 * np.pi):
        raise DomainError(
            f"collar branch needs |t| <= c^(2 pi) = {c ** (2.0 * np.pi):.6g}, got |t| = {mag:.6g}"
        )
    log_t = float(np.log(mag))
    ratio = np.clip(2.0 * np.pi * np.log(c) / log_t, -1.0, 1.0)
    return float(log_t / np.pi * np.arcsin(ratio))


def _bump(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(u) -> np.ndarray:
    """C-infinity monotone step: 0 for u <= 0, 1 for u >= 1."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    rising = _bump(u)
    falling = _bump(1.0 - u)
    return rising / (rising + falling)


def perturbed_density(chart: ConformalChart) -> MetricDensity:
    """Flat-collar modification of the grafting metric (module docstring tables)."""
    log_c = float(np.log(chart.c))
    flat_level = 1.0 / (2.0 * abs(log_c))
    graft = grafting_density(chart)

    if chart.kind == "cusp":
        # flat for rho <= 2 log c, grafting (= hyperbolic cusp) at rho >= log c,
        # multiplicative interpolation on the band between.
        lo, hi = 2.0 * log_c, log_c

        def profile(rho):
            rho = np.atleast_1d(np.asarray(rho, dtype=float))
            lam_g = graft.profile(rho)
            s = smooth_step((rho - lo) / (hi - lo))
            factor = (1.0 - s) * (flat_level / lam_g) ** 2 + s
            out = np.sqrt(factor) * lam_g
            out = np.where(rho <= lo, flat_level, out)
            return out

        def branch_curvature(rho):
            rho = np.atleast_1d(np.asarray(rho, dtype=float))
            out = np.full(rho.shape, np.nan)
            out[rho <= lo] = 0.0
            out[rho >= hi] = -1.0
            return out

        return MetricDensity("perturbed", chart, profile, None, branch_curvature)

    mag_t = abs(chart.t)
    if mag_t >= chart.c ** (2.0 * np.pi):
        # No collar at this size: the perturbed metric is the grafting metric.
        return MetricDensity("perturbed", chart, graft.profile, graft.dlog_profile,
                             graft.branch_curvature)

    log_t = float(np.log(mag_t))
    half_k = collar_K(chart.t, chart.c)
    graft_level = float(graft.profile(np.asarray(chart.rho_max)))
    flat_lo, flat_hi = log_t - half_k, half_k
    upper_hi = half_k - log_c           # grafting from here up
    lower_lo = log_t - half_k + log_c   # grafting from here down
    if not (chart.rho_min < lower_lo < flat_lo <= flat_hi < upper_hi < chart.rho_max):
        raise ConfigError(
            f"perturbed-metric bands degenerate for |t| = {mag_t:.6g}, c = {chart.c:.6g}"
        )
    ratio_sq = (flat_level / graft_level) ** 2

    def profile(rho):
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        out = np.full(rho.shape, graft_level)
        out[(rho >= flat_lo) & (rho <= flat_hi)] = flat_level
        up = (rho > flat_hi) & (rho < upper_hi)
        if np.any(up):
            s = smooth_step((rho[up] - flat_hi) / (upper_hi - flat_hi))
            out[up] = np.sqrt((1.0 - s) * ratio_sq + s) * graft_level
        down = (rho > lower_lo) & (rho < flat_lo)
        if np.any(down):
            s = smooth_step((flat_lo - rho[down]) / (flat_lo - lower_lo))
            out[down] = np.sqrt((1.0 - s) * ratio_sq + s) * graft_level
        return out

    def branch_curvature(rho):
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        out = np.full(rho.shape, np.nan)
        out[(rho >= flat_lo) & (rho <= flat_hi)] = 0.0
        out[(rho >= upper_hi) | (rho <= lower_lo)] = 0.0
        return out

    return MetricDensity("perturbed", chart, profile, None, branch_curvature)


def metric_curvature(density: MetricDensity, rho, step: Optional[float] = None) -> np.ndarray:
    """Finite-difference Gaussian curvature oracle, K = -(log Lambda)''/Lambda^2.

    Differentiates the radial profile with a fourth-order centered stencil,
    never trusting any closed-form curvature attached to the density.  The
    step shrinks near chart edges so the stencil stays inside; points
    closer than 1e-3 to an edge are rejected.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    chart = density.chart
    dist = np.minimum(rho - chart.rho_min, chart.rho_max - rho)
    if np.any(dist < 1e-3):
        raise DomainError("point too close to the chart edge for the curvature stencil")
    if step is None:
        h = np.minimum(4e-3 * np.maximum(1.0, np.abs(rho) / 2.0), dist / 120.0)
    else:
        h = np.minimum(np.full(rho.shape, float(step)), dist / 2.5)
    f = lambda r: np.log(density.profile(r))
    second = (
        -f(rho - 2 * h) + 16 * f(rho - h) - 30 * f(rho) + 16 * f(rho + h) - f(rho + 2 * h)
    ) / (12.0 * h**2)
    return -second / density.profile(rho) ** 2


# ---------------------------------------------------------------------------
# Quadratic differentials as truncated Laurent series q = sum a_k x^k dx^2.

MAX_TRUNCATION = 64


@dataclass(frozen=True)
class QuadDiff:
    """Truncated Laurent series of a quadratic differential on a chart.

    Orders run from -2 (the deepest admissible pole) up to the truncation
    degree.  On cusp charts, orders >= 0 are rejected: rewriting such a
    term in a coordinate at the opposite side of a node would create a
    pole of order > 2.
    """

    chart: ConformalChart
    coefficients: tuple
    truncation_degree: int = 8

    def __post_init__(self):
        if not 0 <= self.truncation_degree <= MAX_TRUNCATION:
            raise ConfigError(f"truncation degree out of range: {self.truncation_degree}")
        seen = set()
        for order, value in self.coefficients:
            if order in seen:
                raise ConfigError(f"duplicate Laurent order {order}")
            seen.add(order)
            if order < -2:
                raise PoleOrderError(f"pole order {-order} exceeds 2")
            if order > self.truncation_degree:
                raise ConfigError(
                    f"order {order} above truncation degree {self.truncation_degree}"
                )
            if self.chart.kind == "cusp" and order >= 0 and value != 0:
                raise PoleOrderError(
                    "constant or positive-degree terms are not admissible on a cusp "
                    "chart: their pushforward across a node has pole order > 2"
                )

    @classmethod
    def from_dict(
        cls,
        chart: ConformalChart,
        coeffs: Mapping[int, complex],
        truncation_degree: int = 8,
    ) -> "QuadDiff":
        items = tuple(sorted((int(k), complex(v)) for k, v in coeffs.items()))
        return cls(chart, items, truncation_degree)

    def as_dict(self) -> dict:
        return {k: v for k, v in self.coefficients}

    @property
    def residue(self) -> complex:
        """Coefficient of order -2 (preserved exactly across node charts)."""
        for order, value in self.coefficients:
            if order == -2:
                return value
        return 0j

    @property
    def is_pure_residue(self) -> bool:
        return all(order == -2 or value == 0 for order, value in self.coefficients)

    def value(self, x) -> np.ndarray:
        """Series coefficient function q_hat(x) with q = q_hat(x) dx^2."""
        x = np.asarray(x, dtype=complex)
        out = np.zeros_like(x)
        for order, coeff in self.coefficients:
            out = out + coeff * x ** order
        return out

    def strip_coefficient(self, zeta) -> np.ndarray:
        """Coefficient f with q = f(zeta) dzeta^2 in the strip coordinate x = e^zeta.

        Each monomial a_k x^k dx^2 becomes a_k e^{(k+2) zeta} dzeta^2; a pure
        residue is the constant a_{-2}.
        """
        zeta = np.asarray(zeta, dtype=complex)
        out = np.zeros_like(zeta)
        for order, coeff in self.coefficients:
            out = out + coeff * np.exp((order + 2) * zeta)
        return out


def push_chart(q: QuadDiff) -> QuadDiff:
    """Rewrite q in the opposite plumbing coordinate w = t/x.

    Under x = t/w, dx^2 = (t^2/w^4) dw^2, a monomial a_k x^k dx^2 becomes
    a_k t^{k+2} w^{-k-4} dw^2.  Only the order -2 term lands back at order
    -2 (with an exactly equal coefficient); every other nonzero term would
    need a pole of order > 2 and is rejected.
    """
    if q.chart.kind != "annulus":
        raise DomainError("pushforward w = t/x needs an annulus chart (t != 0)")
    for order, value in q.coefficients:
        if order != -2 and value != 0:
            raise PoleOrderError(
                f"pushforward of the order {order} term has pole order {order + 4} > 2"
            )
    flipped = "w" if q.chart.coordinate == "z" else "z"
    new_chart = ConformalChart.annulus(q.chart.t, q.chart.c, coordinate=flipped)
    return QuadDiff.from_dict(new_chart, {-2: q.residue}, q.truncation_degree)


def residue_match(q_left: QuadDiff, q_right: QuadDiff, tol: float = 1e-12) -> bool:
    """Node compatibility: order -2 coefficients agree within tol."""
    return abs(q_left.residue - q_right.residue) <= tol


def q_norm_sq(q: QuadDiff, density: MetricDensity, x) -> np.ndarray:
    """Pointwise squared norm |q_hat(x)|^2 / lambda(x)^4 of q in the metric."""
    x = np.asarray(x, dtype=complex)
    lam = density.density(x)
    return np.abs(q.value(x)) ** 2 / lam**4


def q_norm_sq_profile(q: QuadDiff, density: MetricDensity, rho, theta=0.0) -> np.ndarray:
    """Squared norm on strip points zeta = rho + i theta, |f|^2 / Lambda^4."""
    rho = np.asarray(rho, dtype=float)
    zeta = rho + 1j * np.asarray(theta, dtype=float)
    f = q.strip_coefficient(zeta)
    lam = density.radial_profile(rho)
    return np.abs(f) ** 2 / lam**4
