"""Solve a two-generator corona problem on the ball of C^2 and inspect the answer.

g = (1 + z1/2, z2/2) has no common zero on the closed ball (|g| >= 1/2), so
for every bounded holomorphic f there are bounded holomorphic F with
g1 F1 + g2 F2 = f.  The construction starts from the smooth solution
G = conj(g)/|g|^2 and corrects it with a dbar-solving kernel.
"""

import numpy as np

from coronalab import CoronaProblem, PolyHolo, SolverRule, calibrate, koszul_solve, verify_solution
from coronalab.corona import certify_lower_bound, sample_points, standard_generators
from coronalab.kernels import calibration_points, standard_test_forms

g = standard_generators(2)
grid_min, certified = certify_lower_bound(g)
print(f"|g| on a lattice: min {grid_min:.3f}; certified lower bound on the ball {certified:.3f}")

# The kernel constants are not known in closed form; fit them on dbar-exact forms.
rule = SolverRule(6, 12)
constants = calibrate(3.0, 2, standard_test_forms(2), calibration_points(2), rule)
print("calibrated constants:", ", ".join(f"{c:.6f}" for c in constants.c))
print(f"relative calibration residual: {constants.residual:.1e}")

problem = CoronaProblem(g, PolyHolo.parse("z1", 2), 2, N=3.0, rule=rule, constants=constants)
pts = sample_points(2, 8, 0.7, seed=0)
report = verify_solution(problem, lambda z: koszul_solve(problem, z), pts)

# The identity holds to rounding error whatever the kernel accuracy; holomorphy
# is what the calibration buys.
print(f"max |g1 F1 + g2 F2 - f| = {report.residual:.1e}")
print("max finite-difference |dbar F_j|:", np.array2string(report.dbar, precision=2))
