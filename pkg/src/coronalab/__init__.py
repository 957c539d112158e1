"""Numerical laboratory for weighted corona problems on the unit ball of C^n."""

__version__ = "0.1.0"

from .ball import NonisotropicBall, Tent, automorphism, in_tent, pseudo_distance
from .corona import CoronaProblem, koszul_solve, t2_solve, verify_solution
from .fields import CauchyKernelField, PolyHolo, SmoothField
from .kernels import KernelConstants, LParams, SolverRule, apply_kernel, calibrate
from .quad import QuadratureRule, ball_rule, integrate, sphere_rule
from .weights import Weight

__all__ = [
    "CauchyKernelField", "CoronaProblem", "KernelConstants", "LParams", "NonisotropicBall",
    "PolyHolo", "QuadratureRule", "SmoothField", "SolverRule", "Tent", "Weight",
    "apply_kernel", "automorphism", "ball_rule", "calibrate", "in_tent", "integrate",
    "koszul_solve", "pseudo_distance", "sphere_rule", "t2_solve", "verify_solution",
]
