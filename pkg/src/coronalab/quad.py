"""Quadrature rules on the unit sphere S^{2n-1} and the unit ball of C^n.

Points are stored as complex arrays of shape ``(P, n)``.  Measures are the
unnormalized Lebesgue measures: ``sigma(S) = 2 pi^n / (n-1)!`` and
``nu(B) = pi^n / n!``.

Tensor rules use the coordinates ``zeta_j = sqrt(t_j) exp(i alpha_j)`` with
``(t_1, ..., t_n)`` on the standard simplex, where
``d sigma = 2^{1-n} dt_1 ... dt_{n-1} d alpha_1 ... d alpha_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


def sphere_area(n: int) -> float:
    """Surface measure of S^{2n-1}."""
    return 2.0 * math.pi**n / math.factorial(n - 1)


def ball_volume(n: int) -> float:
    """Lebesgue measure of the unit ball of C^n."""
    return math.pi**n / math.factorial(n)


@dataclass(frozen=True)
class QuadratureRule:
    """Weighted node set on the sphere or the ball."""

    nodes: np.ndarray
    weights: np.ndarray
    domain: str
    provenance: tuple = field(default=())

    def __post_init__(self):
        if self.domain not in ("sphere", "ball"):
            raise ValueError(f"unknown domain {self.domain!r}")
        nodes = np.asarray(self.nodes, dtype=complex)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 2 or weights.shape != (nodes.shape[0],):
            raise ValueError("nodes must be (P, n) and weights (P,)")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite and nonnegative")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return self.nodes.shape[1]

    def __len__(self) -> int:
        return self.nodes.shape[0]

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))

    def signature(self) -> str:
        return f"{self.domain}:" + ",".join(str(p) for p in self.provenance)

    def restrict(self, mask: np.ndarray) -> "QuadratureRule":
        mask = np.asarray(mask, dtype=bool)
        return QuadratureRule(self.nodes[mask], self.weights[mask], self.domain,
                              self.provenance + ("restricted",))


def gauss_legendre01(m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(m)
    return 0.5 * (x + 1.0), 0.5 * w


def gauss_jacobi01(m: int, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on [0,1] for the weight (1-x)^alpha x^beta."""
    x, w = roots_jacobi(m, alpha, beta)
    scale = 0.5 ** (alpha + beta + 1.0)
    return 0.5 * (x + 1.0), w * scale


def dyadic_panels(depth: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss rule on [0,1] graded geometrically toward 0.

    Panels are [2^{-k-1}, 2^{-k}] for k < depth plus [0, 2^{-depth}].
    Integrable power singularities at 0 are resolved to relative accuracy
    of order 2^{-depth * (exponent + 1)}.
    """
    x, w = gauss_legendre01(order)
    xs, ws = [], []
    for k in range(depth):
        a, b = 2.0 ** (-k - 1), 2.0 ** (-k)
        xs.append(a + (b - a) * x)
        ws.append((b - a) * w)
    b = 2.0 ** (-depth)
    xs.append(b * x)
    ws.append(b * w)
    return np.concatenate(xs), np.concatenate(ws)


def _simplex_rule(n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Rule for (t_1..t_n) on the simplex sum t = 1, weights w.r.t. dt_1..dt_{n-1}."""
    if n == 1:
        return np.ones((1, 1)), np.ones(1)
    # collapsed coordinates: t_1 = u_1, t_2 = (1-u_1) u_2, ...
    coords = np.zeros((1, 0))
    wts = np.ones(1)
    for d in range(n - 1):
        # remaining variables after this one: n-2-d, Jacobian (1-u)^{n-2-d}
        u, wu = gauss_jacobi01(m, float(n - 2 - d), 0.0)
        coords = np.concatenate(
            [np.repeat(coords, m, axis=0), np.tile(u, coords.shape[0])[:, None]], axis=1)
        wts = np.repeat(wts, m) * np.tile(wu, len(wts))
    t = np.empty((coords.shape[0], n))
    rem = np.ones(coords.shape[0])
    for d in range(n - 1):
        t[:, d] = rem * coords[:, d]
        rem = rem * (1.0 - coords[:, d])
    t[:, n - 1] = rem
    return t, wts


def sphere_rule(n: int, level: int) -> QuadratureRule:
    """Product rule on S^{2n-1} exact for zeta^a conj(zeta)^b, |a|+|b| <= 2*level."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if level < 1:
        raise ValueError("level must be >= 1")
    m_t = level + 1
    m_a = 2 * level + 1
    t, wt = _simplex_rule(n, m_t)
    angles = 2.0 * np.pi * np.arange(m_a) / m_a
    wa = 2.0 * np.pi / m_a
    grids = np.meshgrid(*([angles] * n), indexing="ij")
    ang = np.stack([g.ravel() for g in grids], axis=1)
    phase = np.exp(1j * ang)
    nodes = np.sqrt(t)[:, None, :] * phase[None, :, :]
    nodes = nodes.reshape(-1, n)
    weights = (wt[:, None] * np.full(ang.shape[0], wa**n)[None, :]).ravel() * 2.0 ** (1 - n)
    return QuadratureRule(nodes, weights, "sphere", ("tensor", level))


def ball_rule(n: int, level: int) -> QuadratureRule:
    """Product rule on the ball: Gauss-Jacobi in tau = |w|^2 times sphere_rule.

    d nu = (1/2) tau^{n-1} d tau d sigma; the Gauss-Jacobi rule absorbs
    tau^{n-1} and is exact on (1-|w|^2)^k |w|^{2j} for k + j <= 2*level + 1 - (n-1).
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    s = sphere_rule(n, level)
    tau, wtau = gauss_jacobi01(level + 1, 0.0, float(n - 1))
    nodes = np.sqrt(tau)[:, None, None] * s.nodes[None, :, :]
    weights = 0.5 * wtau[:, None] * s.weights[None, :]
    return QuadratureRule(nodes.reshape(-1, n), weights.ravel(), "ball", ("tensor", level))


def montecarlo_rule(n: int, count: int, seed: int, domain: str = "sphere") -> QuadratureRule:
    """Equal-weight Monte Carlo rule; a fixed seed gives bit-identical nodes."""
    if count < 1:
        raise ValueError("count must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.standard_normal((count, 2 * n))
    z = x[:, :n] + 1j * x[:, n:]
    z /= np.linalg.norm(x, axis=1)[:, None]
    if domain == "sphere":
        return QuadratureRule(z, np.full(count, sphere_area(n) / count), "sphere",
                              ("montecarlo", count, seed))
    if domain == "ball":
        r = rng.random(count) ** (1.0 / (2 * n))
        return QuadratureRule(z * r[:, None], np.full(count, ball_volume(n) / count), "ball",
                              ("montecarlo", count, seed))
    raise ValueError(f"unknown domain {domain!r}")


class IntegrationError(RuntimeError):
    pass


def integrate(rule: QuadratureRule, fn: Callable[[np.ndarray], np.ndarray]) -> complex:
    """Weighted sum of ``fn`` over the rule nodes.

    ``fn`` is evaluated on the full ``(P, n)`` node array.  Non-finite values
    raise with the first offending node identified.
    """
    if len(rule) == 0:
        raise IntegrationError("empty quadrature rule")
    vals = np.asarray(fn(rule.nodes))
    if vals.shape != (len(rule),):
        vals = np.broadcast_to(vals, (len(rule),))
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise IntegrationError(f"non-finite integrand at node {i}: {rule.nodes[i]}")
    return complex(np.sum(rule.weights * vals))


def unitary_from(zeta: np.ndarray) -> np.ndarray:
    """Unitary matrices U with U e_1 = zeta, batched over leading axes."""
    zeta = np.asarray(zeta, dtype=complex)
    n = zeta.shape[-1]
    lead = zeta.shape[:-1]
    z1 = zeta[..., 0]
    phase = np.where(np.abs(z1) > 0, z1 / np.where(np.abs(z1) > 0, np.abs(z1), 1.0), 1.0)
    y = zeta / phase[..., None]
    v = -y.copy()
    v[..., 0] += 1.0
    vv = np.sum(np.abs(v) ** 2, axis=-1)
    eye = np.broadcast_to(np.eye(n, dtype=complex), lead + (n, n))
    safe = np.where(vv > 1e-30, vv, 1.0)
    H = eye - 2.0 * v[..., :, None] * np.conj(v[..., None, :]) / safe[..., None, None]
    H = np.where((vv > 1e-30)[..., None, None], H, eye)
    return phase[..., None, None] * H


def cap_rule(center: np.ndarray, radius: float, depth: int = 30, order: int = 8,
             n_psi: int = 16, n_xi: int = 16) -> QuadratureRule:
    """Sphere rule on I_{center, radius} = {eta : |1 - <eta, center>| < radius}.

    Local coordinates: eta = U (x, sqrt(1-|x|^2) xi) with x = 1 - rho e^{i psi},
    d sigma = rho d rho d psi (1-|x|^2)^{n-2} d sigma_{2n-3}(xi).  The rho
    direction is graded dyadically toward the center so that power
    singularities |1 - <eta, center>|^a are resolved.  ``radius >= 2`` covers the
    whole sphere with grading toward ``center``.
    """
    center = np.asarray(center, dtype=complex)
    n = center.shape[0]
    r = float(radius)
    if r <= 0:
        raise ValueError("radius must be positive")
    u, wu = dyadic_panels(depth, order)
    if n == 1:
        # arc |beta| < 2 asin(r/2)
        bmax = np.pi if r >= 2 else 2.0 * math.asin(r / 2.0)
        beta = np.concatenate([bmax * u, -bmax * u])
        wb = np.concatenate([bmax * wu, bmax * wu])
        nodes = center[0] * np.exp(1j * beta)
        return QuadratureRule(nodes[:, None], wb, "sphere", ("cap", r, depth, order))
    xg, wg = gauss_legendre01(n_psi)
    if r >= 2.0:
        pieces = [(-np.pi / 2, np.pi / 2, False)]
    else:
        pc = math.acos(r / 2.0)
        pieces = [(-np.pi / 2, -pc, False), (-pc, pc, True), (pc, np.pi / 2, False)]
    psis, wpsis, rmaxs = [], [], []
    for a, b, flat in pieces:
        psi = a + (b - a) * xg
        psis.append(psi)
        wpsis.append((b - a) * wg)
        rmaxs.append(np.full(n_psi, r) if flat else 2.0 * np.cos(psi))
    psi = np.concatenate(psis)
    wpsi = np.concatenate(wpsis)
    rmax = np.concatenate(rmaxs)
    rho = rmax[:, None] * u[None, :]
    w2 = (wpsi * rmax)[:, None] * wu[None, :] * rho
    x = 1.0 - rho * np.exp(1j * psi)[:, None]
    one_minus = np.clip(1.0 - np.abs(x) ** 2, 0.0, None)
    w2 = w2 * one_minus ** (n - 2)
    x = x.ravel()
    w2 = w2.ravel()
    one_minus = one_minus.ravel()
    if n == 2:
        beta = 2.0 * np.pi * np.arange(n_xi) / n_xi
        xi = np.exp(1j * beta)[:, None]
        wxi = np.full(n_xi, 2.0 * np.pi / n_xi)
    else:
        srule = sphere_rule(n - 1, max(1, n_xi // 4))
        xi, wxi = srule.nodes, srule.weights
    local = np.empty((x.shape[0], xi.shape[0], n), dtype=complex)
    local[:, :, 0] = x[:, None]
    local[:, :, 1:] = np.sqrt(one_minus)[:, None, None] * xi[None, :, :]
    U = unitary_from(center)
    nodes = local.reshape(-1, n) @ U.T
    weights = (w2[:, None] * wxi[None, :]).ravel()
    return QuadratureRule(nodes, weights, "sphere", ("cap", r, depth, order, n_psi, n_xi))


def focused_ball_rule(center: np.ndarray, depth: int = 16, order: int = 6, n_psi: int = 12,
                      n_xi: int = 8, cap_depth: int | None = None) -> QuadratureRule:
    """Ball rule graded toward the boundary point ``center``.

    w = sqrt(tau) eta with 1 - tau graded dyadically toward 0 and eta from a
    whole-sphere cap rule graded toward ``center``.  Resolves integrands peaked
    near ``center`` such as (1-|w|^2)^a / |1 - <z, w>|^b with z -> center.
    """
    center = np.asarray(center, dtype=complex)
    n = center.shape[0]
    s = cap_rule(center, 2.0, depth=cap_depth or depth, order=order, n_psi=n_psi, n_xi=n_xi)
    v, wv = dyadic_panels(depth, order)
    tau = 1.0 - v
    wt = 0.5 * wv * tau ** (n - 1)
    nodes = np.sqrt(tau)[:, None, None] * s.nodes[None, :, :]
    weights = wt[:, None] * s.weights[None, :]
    return QuadratureRule(nodes.reshape(-1, n), weights.ravel(), "ball",
                          ("focused", depth, order, n_psi, n_xi))


def centered_ball_rule(z: np.ndarray, radial: int = 16, level: int = 8) -> QuadratureRule:
    """Ball rule in polar coordinates about the interior point ``z``.

    w = z + rho omega, d nu = rho^{2n-1} d rho d sigma(omega), rho in
    [0, rho_max(omega)].  Kernels with |w - z|^{1-2n} singularities become
    smooth integrands, so the rule converges spectrally for the solution
    kernels and moves smoothly with ``z``.
    """
    z = np.asarray(z, dtype=complex)
    n = z.shape[0]
    if np.sum(np.abs(z) ** 2) >= 1.0:
        raise ValueError("centered rule needs an interior point")
    s = sphere_rule(n, level)
    nodes, weights = centered_nodes(z[None, :], s, radial)
    return QuadratureRule(nodes[0], weights[0], "ball", ("centered", radial, level))


def centered_nodes(targets: np.ndarray, srule: QuadratureRule, radial: int):
    """Batched centered-rule nodes: returns (T, P, n) nodes and (T, P) weights."""
    targets = np.asarray(targets, dtype=complex)
    n = targets.shape[-1]
    om = srule.nodes
    x, wx = gauss_legendre01(radial)
    # |z + rho om|^2 = 1  ->  rho^2 + 2 rho Re<om, z> - (1 - |z|^2) = 0
    b = np.real(targets @ np.conj(om).T)
    c = 1.0 - np.sum(np.abs(targets) ** 2, axis=1)
    rmax = -b + np.sqrt(b * b + c[:, None])
    rho = rmax[:, :, None] * x[None, None, :]
    nodes = targets[:, None, None, :] + rho[..., None] * om[None, :, None, :]
    weights = (srule.weights[None, :, None] * rmax[:, :, None] ** (2 * n)
               * (wx * x ** (2 * n - 1))[None, None, :])
    T = targets.shape[0]
    return nodes.reshape(T, -1, n), weights.reshape(T, -1)
