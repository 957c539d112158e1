"""Boundary behaviour of the kernels L^N_{M,L} against their type n + N - M - 2L.

For negative type the integral of the kernel blows up like (1 - |z|^2)^type.
For positive type it stays bounded, and the distance to its boundary value
shrinks like (1 - |z|^2)^min(type, 1), up to a logarithm at integer type.
"""

from coronalab.kernels import LParams, kernel_type, type_exponent

deltas = [1e-4, 1e-5, 1e-6, 1e-7]
for N, M in [(1, 4), (2, 4), (2, 3), (2, 2.5)]:
    prm = LParams(N, M, 0)
    kappa = kernel_type(prm, 2)
    fit = type_exponent(prm, 2, deltas)
    print(f"N={N} M={M}: type {kappa:+.2f}, fitted boundary exponent {fit:+.3f}")
print("type 0 gives a logarithm, so its fitted slope is small but not zero")
print("type +1 fits low by about 1/log(1/delta) because of the log factor")
print("above +1 the smooth O(delta) correction to the boundary value dominates, so fits saturate at 1")
