"""Carleson measures: tent masses, the measures built from corona data, embeddings."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ball import NonisotropicBall, Tent, ball_of, in_tent_batch, norm2
from .quad import QuadratureRule, cap_rule, dyadic_panels
from .weights import Weight, average_batch, ball_mass


@dataclass
class MeasureField:
    """A measure with density against dnu on the ball (vectorized callable)."""

    density: Callable
    n: int

    def __call__(self, w) -> np.ndarray:
        vals = np.asarray(self.density(np.asarray(w, dtype=complex)), dtype=float)
        if np.any(vals < 0):
            raise ValueError("measure density must be nonnegative")
        return vals

    def scaled(self, c: float) -> "MeasureField":
        return MeasureField(lambda w: c * self.density(w), self.n)


def power_density(t: float, n: int) -> MeasureField:
    """(1 - |w|^2)^(t - 1) dnu."""
    return MeasureField(lambda w: (1.0 - norm2(w)) ** (t - 1.0), n)


def _gradient_terms(g: list, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(|dg|^2, |d_T g|^2) with |dg|^2 = sum_i |d g_i|^2 and sums of moduli per component."""
    from .fields import grad_norms

    full = np.zeros(w.shape[:-1])
    tang = np.zeros(w.shape[:-1])
    for gi in g:
        a, b = grad_norms(gi, w)
        full = full + a ** 2
        tang = tang + b ** 2
    return full, tang


def mu_g_theta(g: list, theta: Weight, average_depth: int = 8) -> MeasureField:
    """Density Theta(z) [(1 - |z|^2)|dg(z)|^2 + |d_T g(z)|^2].

    Theta comes from light cap rules resolving ``average_depth`` dyadic
    levels, which keeps tent integrals over many nodes affordable.
    """
    n = g[0].n

    def dens(w):
        w = np.asarray(w, dtype=complex)
        full, tang = _gradient_terms(g, w)
        Th = average_batch(theta, w, depth=average_depth, order=3, n_psi=4, n_xi=4)
        return Th * ((1.0 - norm2(w)) * full + tang)

    return MeasureField(dens, n)


def tent_rule(tent: Tent, depth: int = 20, order: int = 6, cap_depth: int = 4,
              n_psi: int = 8, n_xi: int = 6) -> QuadratureRule:
    """Local ball rule covering the tent, graded toward the sphere.

    Every point w of a tent over I(zeta, r) has w/|w| in I(zeta, r), so the
    rule takes directions from a cap rule on I(zeta, r) and 1 - |w|^2 from
    dyadic panels reaching ``depth`` levels below r.  Nodes outside the tent
    are dropped by the exact membership test.
    """
    base = tent.base
    n = base.center.shape[0]
    r = min(float(base.radius), 2.0)
    levels = depth + max(0, int(np.ceil(-np.log2(r))))
    v, wv = dyadic_panels(levels, order)  # v = 1 - tau
    tau = 1.0 - v
    s = cap_rule(base.center, r if r < 2 else 2.0, depth=cap_depth, order=order, n_psi=n_psi, n_xi=n_xi)
    nodes = np.sqrt(tau)[:, None, None] * s.nodes[None, :, :]
    weights = (0.5 * wv * tau ** (n - 1))[:, None] * s.weights[None, :]
    nodes = nodes.reshape(-1, n)
    weights = weights.ravel()
    keep = in_tent_batch(nodes, tent) & (weights > 0)
    return QuadratureRule(nodes[keep], weights[keep], "ball", ("tent", r, depth, order))


def tent_mass(mu: MeasureField, tent: Tent, depth: int = 20, **rule_opts) -> float:
    rule = tent_rule(tent, depth, **rule_opts)
    return float(np.sum(rule.weights * mu(rule.nodes)))


@dataclass
class CarlesonReport:
    constant: float
    ratios: np.ndarray
    points: list


def carleson_ratios(mu: MeasureField, theta: Weight, points, aperture: float = 1.0,
                    depth: int = 20, **rule_opts) -> np.ndarray:
    """mu(T(I_z)) / theta(I_z) for each sample z."""
    out = []
    for z in points:
        base = ball_of(z)
        th = ball_mass(theta, base.center, base.radius)
        if th == 0:
            raise ZeroDivisionError("theta(I_z) vanishes")
        out.append(tent_mass(mu, Tent(base, aperture), depth, **rule_opts) / th)
    return np.array(out)


def carleson_constant(mu: MeasureField, theta: Weight, points, aperture: float = 1.0,
                      depth: int = 20) -> CarlesonReport:
    """max over sampled z of mu(T(I_z)) / theta(I_z)."""
    r = carleson_ratios(mu, theta, points, aperture, depth)
    return CarlesonReport(constant=float(np.max(r)), ratios=r, points=list(points))


@dataclass
class StabilityReport:
    """Carleson ratios along a ray at two resolutions."""

    ratios: np.ndarray
    refined: np.ndarray
    radial_growth: float
    refinement_growth: float

    def stable(self, radial: float = 3.0, growth: float = 0.1) -> bool:
        return self.radial_growth <= radial and self.refinement_growth <= growth

    def divergent(self) -> bool:
        return self.refinement_growth > 0.5 or self.radial_growth > 10.0


def carleson_stability(mu: MeasureField, theta: Weight, radii=(0.9, 0.99, 0.999), zeta=None,
                       depth: int = 16, extra: int = 16, **rule_opts) -> StabilityReport:
    """Compare Carleson ratios across |z| and under ``extra`` more dyadic levels toward the sphere.

    radial_growth is the largest ratio over |z| divided by the ratio at the
    innermost radius, so a bounded family that decays toward the sphere scores
    1.  refinement_growth is the largest relative increase when the boundary
    resolution is refined.  ``rule_opts`` are passed on to tent_rule.
    """
    n = theta.n
    zeta = np.eye(n, dtype=complex)[0] if zeta is None else np.asarray(zeta, dtype=complex)
    pts = [t * zeta for t in sorted(radii)]
    a = carleson_ratios(mu, theta, pts, depth=depth, **rule_opts)
    b = carleson_ratios(mu, theta, pts, depth=depth + extra, **rule_opts)
    radial = float(np.max(a) / a[0]) if a[0] > 0 else float("inf")
    growth = float(np.max((b - a) / a))
    return StabilityReport(a, b, radial, growth)


def embedding_check(mu: MeasureField, theta: Weight, p: float, tests: list, rule_for: Callable,
                    hardy_norm_for: Callable) -> np.ndarray:
    """Ratios (int |f|^p dmu) / ||f||^p_{H^p(theta)} over test functions.

    ``rule_for(f)`` returns a ball rule resolving f and ``hardy_norm_for(f)``
    the Hardy norm; both are supplied by the caller so the singularities of
    the test family can be resolved.
    """
    out = []
    for f in tests:
        rule = rule_for(f)
        num = float(np.sum(rule.weights * np.abs(f(rule.nodes)) ** p * mu(rule.nodes)))
        out.append(num / hardy_norm_for(f) ** p)
    return np.array(out)
