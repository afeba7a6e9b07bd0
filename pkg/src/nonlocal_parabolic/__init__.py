"""Parabolic equations with singular jump kernels: solver and verification harness."""

from .discretization import Assembler, Grid, apply_L, assemble, bilinear_form, build_grid
from .geometry import Cylinder, SpaceTimeBox, harnack_domains, q_minus, q_plus, rho_hat, scale_problem
from .kernels import (
    Kernel,
    MembershipReport,
    check_K1,
    check_K2,
    check_K3,
    eval_k,
    make_cone_kernel,
    make_fractional,
    make_sequence_kernel,
)
from .solver import SolutionField, residual_weak, solve, steklov

__all__ = [
    "Assembler",
    "Cylinder",
    "Grid",
    "Kernel",
    "MembershipReport",
    "SolutionField",
    "SpaceTimeBox",
    "apply_L",
    "assemble",
    "bilinear_form",
    "build_grid",
    "check_K1",
    "check_K2",
    "check_K3",
    "eval_k",
    "harnack_domains",
    "make_cone_kernel",
    "make_fractional",
    "make_sequence_kernel",
    "q_minus",
    "q_plus",
    "residual_weak",
    "rho_hat",
    "scale_problem",
    "solve",
    "steklov",
]
