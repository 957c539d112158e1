"""Norms of the test functions f_z(w) = (1 - <w, z>)^-N as z approaches the sphere.

The weighted Hardy norm of f_z scales like theta(I_z)^(1/p) (1 - |z|^2)^-N,
and its Morrey norm like (1 - |z|^2)^(s - N).  Both are the quantities the
necessity arguments for the corona theorem rely on.
"""

import numpy as np

from coronalab.spaces import (HardyNormParams, MorreyParams, fit_growth_exponent,
                              focused_sphere_rule, geometric_radii, hardy_norm, morrey_balls,
                              morrey_norm, test_function)
from coronalab.weights import Weight, ball_mass

zeta = np.array([0.6, 0.8j])
theta = Weight.power(0.5, zeta)
params = HardyNormParams(2.0, theta, geometric_radii(20), focused_sphere_rule(zeta))
radii = np.array([0.9, 0.99, 0.999])
N = 2.0
for r in radii:
    d = 1 - r * r
    h = hardy_norm(test_function(r * zeta, N), params)
    print(f"|z| = {r}: ||f_z||^2 (1-|z|^2)^4 / theta(I_z) = {h ** 2 * d ** 4 / ball_mass(theta, zeta, d):.4f}")

s = 0.5
vals = [morrey_norm(test_function(r * zeta, N), MorreyParams(2.0, s, morrey_balls([zeta])), 2)
        for r in radii]
print(f"Morrey norm exponent {-fit_growth_exponent(vals, radii):.3f}, predicted s - N = {s - N}")
