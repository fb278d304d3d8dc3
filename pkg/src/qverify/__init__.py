"""Exact and high-precision verification of a reduced-energy construction
for the prescribed Q-curvature problem.

Submodules: scalars, weyl, radial, transcripts, reduced_energy, bubble,
curvature, crosscheck, report, cli.  The curvature lab imports jax, so it is
not loaded here.
"""

from .scalars import SymScalar, gamma_ratio, sphere_area, dim_constants
from .weyl import WeylForm, project_weyl, h_matrix, weyl_quad_norm, random_weyl, default_weyl
from .radial import FPoly, energy_constant, radial_master
from .reduced_energy import assemble_F0, assemble_hessian, hessian_matrix, solve_tau, verify_lemma81
from .bubble import BubbleParams, flat_residual, u0_value

__version__ = "0.1.0"

__all__ = [
    "SymScalar",
    "gamma_ratio",
    "sphere_area",
    "dim_constants",
    "WeylForm",
    "project_weyl",
    "h_matrix",
    "weyl_quad_norm",
    "random_weyl",
    "default_weyl",
    "FPoly",
    "energy_constant",
    "radial_master",
    "assemble_F0",
    "assemble_hessian",
    "hessian_matrix",
    "solve_tau",
    "verify_lemma81",
    "BubbleParams",
    "flat_residual",
    "u0_value",
]
