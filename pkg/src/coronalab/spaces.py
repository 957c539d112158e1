"""Weighted Hardy, Morrey and Campanato norms and related growth diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ball import as_boundary_point, inner
from .quad import QuadratureRule, cap_rule, sphere_rule, unitary_from
from .weights import Weight

DEFAULT_K = 12


def geometric_radii(K: int = DEFAULT_K) -> np.ndarray:
    """r = 1 - 2^-k, k = 1..K."""
    if K < 1:
        raise ValueError("need at least one radius")
    return 1.0 - 2.0 ** -np.arange(1, K + 1)


def focused_sphere_rule(center, depth: int = 30, order: int = 8, n_psi: int = 16,
                        n_xi: int = 12) -> QuadratureRule:
    """Whole-sphere rule graded toward ``center``, for integrands peaked there."""
    return cap_rule(as_boundary_point(center), 2.0, depth=depth, order=order, n_psi=n_psi, n_xi=n_xi)


@dataclass
class HardyNormParams:
    p: float
    theta: Weight
    radii: np.ndarray = field(default_factory=geometric_radii)
    rule: QuadratureRule | None = None

    def __post_init__(self):
        self.radii = np.sort(np.atleast_1d(np.asarray(self.radii, dtype=float)))
        if self.radii.size == 0 or self.radii[-1] >= 1.0 or self.radii[0] <= 0.0:
            raise ValueError("radii must be a nonempty subset of (0, 1)")
        if self.p <= 0:
            raise ValueError("p must be positive")
        if self.rule is None:
            self.rule = sphere_rule(self.theta.n, 12)


def hardy_means(f, params: HardyNormParams) -> np.ndarray:
    """(int |f(r zeta)|^p theta dsigma)^(1/p) for each grid radius."""
    rule = params.rule
    th = params.theta(rule.nodes)
    out = []
    for r in params.radii:
        vals = np.abs(f(r * rule.nodes)) ** params.p
        out.append(np.sum(rule.weights * th * vals) ** (1.0 / params.p))
    return np.array(out)


def hardy_norm(f, params: HardyNormParams) -> float:
    """Max over the radius grid of the weighted integral means."""
    return float(np.max(hardy_means(f, params)))


def test_function(z, N: float) -> "CauchyKernelField":
    """f_z(w) = (1 - <w, z>)^-N."""
    from .fields import CauchyKernelField

    return CauchyKernelField(np.asarray(z, dtype=complex), {float(N): 1.0})


@dataclass
class MorreyParams:
    p: float
    s: float
    balls: list
    depth: int = 30
    boundary_radius: float = 1.0

    def __post_init__(self):
        if not self.balls:
            raise ValueError("no balls to sample")


def _ball_integral(f, zeta, eps, p, depth, radius, center_value=None):
    rule = cap_rule(zeta, eps, depth=depth, order=8, n_psi=16, n_xi=12)
    vals = f(radius * rule.nodes)
    if center_value is not None:
        vals = vals - center_value
    return float(np.sum(rule.weights * np.abs(vals) ** p))


def morrey_norm(f, params: MorreyParams, n: int | None = None) -> float:
    """sup over sampled (zeta, eps) of (eps^(sp-n) int_I |f|^p dsigma)^(1/p)."""
    n = n or len(params.balls[0][0])
    if not 0 < params.s < n / params.p:
        raise ValueError(f"Morrey index s must lie in (0, n/p) = (0, {n / params.p})")
    best = 0.0
    for zeta, eps in params.balls:
        zeta = as_boundary_point(zeta, n)
        m = _ball_integral(f, zeta, eps, params.p, params.depth, params.boundary_radius)
        best = max(best, (eps ** (params.s * params.p - n) * m) ** (1.0 / params.p))
    return best


def campanato_norm(f, params: MorreyParams, n: int | None = None,
                   rule: QuadratureRule | None = None) -> float:
    """||f||_p plus sup over sampled balls of the scaled oscillation about f(zeta)."""
    n = n or len(params.balls[0][0])
    if not -1 < params.s <= n / params.p:
        raise ValueError(f"Campanato index s must lie in (-1, n/p] = (-1, {n / params.p}]")
    rule = rule or sphere_rule(n, 12)
    base = float(np.sum(rule.weights * np.abs(f(params.boundary_radius * rule.nodes)) ** params.p)
                 ) ** (1.0 / params.p)
    osc = 0.0
    for zeta, eps in params.balls:
        zeta = as_boundary_point(zeta, n)
        c = f(params.boundary_radius * zeta[None, :])[0]
        m = _ball_integral(f, zeta, eps, params.p, params.depth, params.boundary_radius, c)
        osc = max(osc, (eps ** (params.s * params.p - n) * m) ** (1.0 / params.p))
    return base + osc


def morrey_balls(centers, eps=None) -> list:
    """All pairs (zeta, eps) for a geometric eps grid."""
    if eps is None:
        eps = 2.0 ** -np.arange(0, 14)
    return [(np.asarray(c, dtype=complex), float(e)) for c in centers for e in eps]


def admissible_grid(zeta: np.ndarray, alpha: float, depths=None) -> np.ndarray:
    """Sample points of Gamma(zeta, alpha) for boundary points zeta of shape (Z, n).

    Returns shape (Z, G, n).  The radial points (1 - 2^-k) zeta are included.
    """
    if alpha < 1:
        raise ValueError("aperture must be >= 1")
    zeta = np.atleast_2d(np.asarray(zeta, dtype=complex))
    Z, n = zeta.shape
    if depths is None:
        depths = np.arange(1, 21)
    U = unitary_from(zeta)  # first column zeta
    # offsets in the local frame: x = 1 - delta*(a + ib), |v|^2 = delta * c
    a = np.linspace(0.05, 2.0 * alpha, 7)
    b = np.linspace(-alpha, alpha, 7)
    c = np.linspace(0.0, alpha, 4) if n > 1 else np.zeros(1)
    A, B, C = np.meshgrid(a, b, c, indexing="ij")
    A, B, C = A.ravel(), B.ravel(), C.ravel()
    phases = np.exp(2j * np.pi * np.arange(4) / 4) if n > 1 else np.ones(1)
    pts = []
    for k in depths:
        d = 2.0 ** -float(k)
        x = 1.0 - d * (A + 1j * B)
        for ph in phases:
            local = np.zeros((x.size, n), dtype=complex)
            local[:, 0] = x
            if n > 1:
                local[:, 1] = np.sqrt(d * C) * ph
            pts.append(local)
        radial = np.zeros((1, n), dtype=complex)
        radial[0, 0] = 1.0 - d
        pts.append(radial)
    local = np.concatenate(pts, axis=0)
    z = np.einsum("zij,gj->zgi", U, local)
    r2 = np.sum(np.abs(z) ** 2, axis=-1)
    inside = (r2 < 1.0) & (np.abs(1.0 - inner(z, zeta[:, None, :])) < alpha * (1.0 - r2))
    # replace excluded points by the radial point at depth 1 (always admissible)
    fallback = 0.5 * zeta[:, None, :]
    return np.where(inside[..., None], z, fallback)


def maximal_admissible(f, zeta, alpha: float, depths=None, chunk: int = 1_000_000) -> np.ndarray:
    """max |f| over sampled points of Gamma(zeta, alpha); batched over zeta."""
    if alpha <= 1:
        raise ValueError("aperture must exceed 1")
    zeta = np.atleast_2d(np.asarray(zeta, dtype=complex))
    size = admissible_grid(zeta[:1], alpha, depths).shape[1]
    step = max(1, chunk // size)
    out = [np.max(np.abs(f(admissible_grid(zeta[s:s + step], alpha, depths))), axis=-1)
           for s in range(0, zeta.shape[0], step)]
    return np.concatenate(out)


@dataclass
class PairingResult:
    value: complex
    values: np.ndarray
    cauchy_gap: float


def pairing(f, g, radii=None, rule: QuadratureRule | None = None, n: int | None = None) -> PairingResult:
    """int_S f_r conj(g_r) dsigma at the largest grid radius with a convergence diagnostic."""
    radii = geometric_radii() if radii is None else np.sort(np.asarray(radii, dtype=float))
    if rule is None:
        if n is None:
            n = getattr(f, "n", None)
        if n is None:
            raise ValueError("dimension needed to build the default rule")
        rule = sphere_rule(n, 12)
    vals = np.array([np.sum(rule.weights * f(r * rule.nodes) * np.conj(g(r * rule.nodes)))
                     for r in radii])
    gap = float(np.abs(vals[-1] - vals[-2])) if len(vals) > 1 else float("nan")
    return PairingResult(value=complex(vals[-1]), values=vals, cauchy_gap=gap)


def fit_growth_exponent(values, t) -> float:
    """Slope of log|value| against -log(1 - t^2) along a ray."""
    values = np.abs(np.asarray(values))
    t = np.asarray(t, dtype=float)
    if values.size < 3:
        raise ValueError("need at least three samples")
    return float(np.polyfit(-np.log(1.0 - t * t), np.log(values), 1)[0])


def ray_growth(f, zeta0, ts) -> float:
    """fit_growth_exponent of f along t * zeta0."""
    zeta0 = as_boundary_point(zeta0)
    ts = np.asarray(ts, dtype=float)
    return fit_growth_exponent(f(ts[:, None] * zeta0[None, :]), ts)
