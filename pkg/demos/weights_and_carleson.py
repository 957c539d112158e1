"""Muckenhoupt constants of power weights and Carleson ratios of simple measures.

|1 - <zeta, e1>|^a is in A_p exactly for -n < a < n(p - 1).  Inside that
range the sampled A_p constant settles as the averages resolve the singular
point; outside it grows without bound.
"""

import numpy as np

from coronalab.carleson import carleson_stability, power_density
from coronalab.weights import Weight, ap_values, boundary_samples

e1 = np.array([1.0, 0.0], complex)
samples = boundary_samples(2, e1, depths=(1, 2, 3), count=2)
p = 2.0
print("A_2 constants of |1 - zeta_1|^a at cap depths 20 / 40 / 60 (A_2 range is -2 < a < 2)")
for a in (-2.5, -1.0, 0.5, 1.5, 2.5):
    th = Weight.power(a, e1)
    vals = [np.max(ap_values(th, p, samples, d)) for d in (20, 40, 60)]
    print(f"  a = {a:+.1f}: " + " / ".join(f"{v:.4g}" for v in vals))

# (1 - |w|^2)^(t-1) dnu is a Carleson measure for H^p exactly when t > 0.
one = Weight.constant(2)
for t in (1.0, 0.5, 0.0):
    rep = carleson_stability(power_density(t, 2), one, radii=(0.9, 0.99), depth=10, extra=10,
                             order=4, n_psi=6, n_xi=4)
    print(f"t = {t}: ratios {np.array2string(rep.ratios, precision=4)}, "
          f"+{100 * rep.refinement_growth:.0f}% under refinement")
