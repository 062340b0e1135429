"""Maximal-surface cylinders in anti-de Sitter 3-space.

The package is organized by pipeline stage:

``adscore``
    The signature (2,2) quadric model, isometry membership, and the
    PSL(2,R) x PSL(2,R) splitting of boundary actions.
``domains``
    Annulus and cusp charts, hyperbolic / grafting / perturbed conformal
    densities, and Laurent data for quadratic differentials.
``gauss``
    The quasi-linear curvature equation for the conformal factor of a
    maximal surface, with sub/super-solution bracketing and a radial
    oracle solver.
``frames``
    First-order moving-frame system, path-ordered integration, and
    holonomy of cylinder generators.
``pinch``
    Degenerating families: sweeps over pinching parameters with
    convergence defect reports.
``cli``
    Batch entry points over TOML run configurations.
"""

__version__ = "0.1.0"
