"""Exact and numeric analysis of polynomial kinetic ODE models."""

from .modeldsl import Model, check_hungarian, kinetic_decomposition, load_model, parse_model, print_model
from .equilibria import EquilibriumError, Substitution, dfe, fixed_points_numeric, rur_reduce
from .threshold import ThresholdError, jacobian, ngm, r0_jacfact, r0_ngm, unique_dfe
from .crn import CrnError, crn_stats, to_crn
from .sirph import SirPhSpec, build_sirph, kernel, kernel_quadrature_check, r0_integral, spec_from_section
from .geometry import geometry_objects
from .bifurcation import (
    BifurcationError,
    branch_scan,
    bt_candidates,
    eliminated_locus,
    hurwitz,
    product_scalars,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "Model", "parse_model", "load_model", "print_model", "check_hungarian", "kinetic_decomposition",
    "EquilibriumError", "Substitution", "dfe", "rur_reduce", "fixed_points_numeric",
    "ThresholdError", "jacobian", "unique_dfe", "ngm", "r0_ngm", "r0_jacfact",
    "CrnError", "to_crn", "crn_stats",
    "SirPhSpec", "spec_from_section", "build_sirph", "kernel", "r0_integral", "kernel_quadrature_check",
    "geometry_objects",
    "BifurcationError", "hurwitz", "product_scalars", "eliminated_locus", "bt_candidates", "branch_scan",
    "simulate",
]
