"""Explicit solutions of the natural PDE system of minimal surfaces in R^4.

A pair of holomorphic generators ``(w1, w2)`` produces the Gauss curvature
``K`` and normal curvature ``kappa``; this package evaluates them, checks the
PDEs numerically, tests the SU(2) gauge equivalence of generators and
integrates the associated minimal surfaces in R^3.
"""

__version__ = "0.1.0"

from .expr import HoloFn, Jet, ParseError, SingularityError, UnknownIdentifierError, parse, render
from .geometry import (AlphaBeta, CurvaturePair, DomainError, MoebiusParams, NormalizationError,
                       PQ, WeierstrassPair, alpha_beta_from_curvatures, canonical_derivatives,
                       curvature_pair, curvatures_from_pq, liouville_density, moebius,
                       pq_from_alpha_beta, pq_from_w, su2_transform, weierstrass_FG)
from .numerics import (GridSpec, ResidualReport, convergence_order, residual_chain,
                       residual_liouville, residual_system)
from .surface import (SurfacePatch, conformality_residual, export_mesh, harmonicity_residual,
                      integrate_patch, path_independence_check)

__all__ = [
    "HoloFn", "Jet", "ParseError", "SingularityError", "UnknownIdentifierError", "parse",
    "render", "AlphaBeta", "CurvaturePair", "DomainError", "MoebiusParams",
    "NormalizationError", "PQ", "WeierstrassPair", "alpha_beta_from_curvatures",
    "canonical_derivatives", "curvature_pair", "curvatures_from_pq", "liouville_density",
    "moebius", "pq_from_alpha_beta", "pq_from_w", "su2_transform", "weierstrass_FG",
    "GridSpec", "ResidualReport", "convergence_order", "residual_chain",
    "residual_liouville", "residual_system", "SurfacePatch", "conformality_residual",
    "export_mesh", "harmonicity_residual", "integrate_patch", "path_independence_check",
]
