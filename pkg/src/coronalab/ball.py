"""Geometry of the unit ball of C^n.

Conventions: ``<z, w> = sum_j z_j conj(w_j)``.  The nonisotropic ball
``I(zeta, r)`` is ``{eta in S : |1 - <eta, zeta>| < r}``, the admissible
region is ``Gamma(zeta, alpha) = {z : |1 - <z, zeta>| < alpha (1 - |z|^2)}``
and the tent over a boundary set A is the complement of the union of the
admissible regions of the points outside A.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quad import QuadratureRule

BOUNDARY_TOL = 1e-12


def as_point(z, n: int | None = None) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.ndim != 1 or z.shape[0] < 1:
        raise ValueError("a point is a 1-d array of n >= 1 complex coordinates")
    if n is not None and z.shape[0] != n:
        raise ValueError(f"dimension mismatch: expected {n}, got {z.shape[0]}")
    if np.sum(np.abs(z) ** 2) > 1.0 + BOUNDARY_TOL:
        raise ValueError(f"point {z} lies outside the closed unit ball")
    return z


def as_boundary_point(zeta, n: int | None = None) -> np.ndarray:
    zeta = as_point(zeta, n)
    if abs(np.linalg.norm(zeta) - 1.0) > BOUNDARY_TOL:
        raise ValueError(f"{zeta} is not on the unit sphere (|zeta| = {np.linalg.norm(zeta)!r})")
    return zeta


def inner(z, w) -> np.ndarray:
    """<z, w> over the last axis."""
    return np.sum(np.asarray(z) * np.conj(np.asarray(w)), axis=-1)


def norm2(z) -> np.ndarray:
    return np.sum(np.abs(np.asarray(z)) ** 2, axis=-1)


@dataclass(frozen=True)
class NonisotropicBall:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_boundary_point(self.center))
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def contains(self, eta) -> np.ndarray:
        d = np.abs(1.0 - inner(eta, self.center))
        # radius >= 2 is the whole sphere, including the antipode where d = 2
        return d < self.radius if self.radius < 2.0 else np.ones(d.shape, dtype=bool)


@dataclass(frozen=True)
class Tent:
    base: NonisotropicBall
    aperture: float = 1.0

    def __post_init__(self):
        if self.aperture < 1.0:
            raise ValueError("aperture must be >= 1")


def ball_of(z) -> NonisotropicBall:
    """I_z: center z/|z|, radius 1 - |z|^2; z = 0 gives the whole sphere (radius 2)."""
    z = as_point(z)
    r = np.linalg.norm(z)
    if r == 0:
        center = np.zeros_like(z)
        center[0] = 1.0
        return NonisotropicBall(center, 2.0)
    return NonisotropicBall(z / r, 1.0 - r * r)


def pseudo_distance(zeta, eta) -> float:
    """|1 - <eta, zeta>|."""
    zeta = as_point(zeta)
    eta = as_point(eta, zeta.shape[0])
    return float(abs(1.0 - inner(eta, zeta)))


def in_admissible(z, zeta, alpha: float) -> bool:
    z = as_point(z)
    zeta = as_boundary_point(zeta, z.shape[0])
    if alpha < 1.0:
        raise ValueError("aperture must be >= 1")
    return bool(abs(1.0 - inner(z, zeta)) < alpha * (1.0 - norm2(z)))


def _tent_sup(w: np.ndarray, center: np.ndarray, alpha: float, n: int) -> np.ndarray:
    """sup of |1 - <zeta, center>| over the admissible preimage {zeta : w in Gamma(zeta, alpha)}.

    With omega = w/|w|, t = |w| and x = <zeta, omega> the preimage is the disk
    |x - 1/t| < alpha (1-t^2)/t (clipped to |x| <= 1), and writing
    center = a omega + b nu with nu orthogonal to omega, the supremum over the
    orthogonal part is |1 - x conj(a)| + b sqrt(1 - |x|^2).  The remaining
    two-dimensional maximization is done on a polar grid plus the unit-circle
    arc, then refined locally.  Returns -inf for an empty preimage (w = 0).
    """
    t = np.sqrt(norm2(w))
    out = np.full(w.shape[0], -np.inf)
    live = t > 0
    if not np.any(live):
        return out
    w = w[live]
    t = t[live]
    omega = w / t[:, None]
    a = inner(center[None, :], omega)  # <center, omega>
    b = np.sqrt(np.clip(1.0 - np.abs(a) ** 2, 0.0, None)) if n > 1 else np.zeros_like(t)
    c = 1.0 / t
    R = alpha * (1.0 - t * t) / t

    def h(x):
        val = np.abs(1.0 - x * np.conj(a)[:, None])
        if n > 1:
            val = val + b[:, None] * np.sqrt(np.clip(1.0 - np.abs(x) ** 2, 0.0, None))
        return val

    def feasible(x):
        ok = np.abs(x - c[:, None]) <= R[:, None] * (1 + 1e-12)
        if n == 1:
            return ok
        return ok & (np.abs(x) <= 1.0 + 1e-12)

    # arc of the unit circle inside the disk: |e^{i psi} - c| <= R
    cosmax = np.clip((1.0 + c * c - R * R) / (2.0 * c), -1.0, 1.0)
    psimax = np.arccos(cosmax)
    s = np.linspace(-1.0, 1.0, 65)
    arc = np.exp(1j * psimax[:, None] * s[None, :])
    cands = [arc]
    if n > 1:
        rr = np.linspace(0.0, 1.0, 9)[1:]
        th = np.linspace(0.0, 2 * np.pi, 32, endpoint=False)
        disk = c[:, None] + (R[:, None, None] * rr[None, :, None] * np.exp(1j * th)[None, None, :]
                             ).reshape(len(t), -1)
        disk = disk / np.maximum(np.abs(disk), 1.0)
        cands.append(disk)
    x = np.concatenate(cands, axis=1)
    vals = np.where(feasible(x), h(x), -np.inf)
    best = x[np.arange(len(t)), np.argmax(vals, axis=1)]
    bestv = np.max(vals, axis=1)
    step = R / 8.0
    if n > 1:
        for _ in range(16):
            off = step[:, None] * np.exp(1j * np.linspace(0, 2 * np.pi, 8, endpoint=False))[None, :]
            xs = np.concatenate([best[:, None], best[:, None] + off], axis=1)
            xs = xs / np.maximum(np.abs(xs), 1.0)
            v = np.where(feasible(xs), h(xs), -np.inf)
            k = np.argmax(v, axis=1)
            best = xs[np.arange(len(t)), k]
            bestv = np.maximum(bestv, v[np.arange(len(t)), k])
            step = step * 0.6
    out[live] = bestv
    return out


def _tent_bounds(w: np.ndarray, center: np.ndarray, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Cheap (lower, upper) bounds for ``_tent_sup``.

    Every preimage point eta has |1 - <eta, omega>| <= rho = (1-t)/t + alpha(1-t^2)/t,
    and sqrt|1 - <.,.>| is a metric on the sphere, which gives the upper
    bound; omega itself lies in the preimage, which gives the lower bound.
    """
    t = np.sqrt(norm2(w))
    tt = np.maximum(t, 1e-300)
    omega = w / tt[:, None]
    d = np.abs(1.0 - inner(omega, center))
    rho = (1.0 - t) / tt + alpha * (1.0 - t * t) / tt
    upper = (np.sqrt(rho) + np.sqrt(d)) ** 2
    return np.where(t > 0, d, -np.inf), np.where(t > 0, upper, -np.inf)


def in_tent_batch(w: np.ndarray, tent: Tent, chunk: int = 2048) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    n = w.shape[-1]
    flat = w.reshape(-1, n)
    R = tent.base.radius
    lo, hi = _tent_bounds(flat, tent.base.center, tent.aperture)
    out = hi <= R
    todo = np.flatnonzero(~out & (lo <= R))
    for a in range(0, todo.size, chunk):
        idx = todo[a:a + chunk]
        out[idx] = _tent_sup(flat[idx], tent.base.center, tent.aperture, n) <= R
    return out.reshape(w.shape[:-1])


def in_tent(w, tent: Tent) -> bool:
    """Whether w lies in T_alpha(base).

    Decided by the exact reduction of the containment {zeta : w in
    Gamma(zeta, alpha)} subset base to a two-dimensional maximization (see
    ``_tent_sup``), not by a quasi-triangle sufficient condition.
    """
    w = as_point(w, tent.base.center.shape[0])
    return bool(in_tent_batch(w[None, :], tent)[0])


def set_measure(region, rule: QuadratureRule) -> float:
    """Quadrature estimate of sigma(I) or nu(tent) from an indicator on ``rule``."""
    if len(rule) == 0:
        raise ValueError("empty quadrature rule")
    if isinstance(region, NonisotropicBall):
        if rule.domain != "sphere":
            raise ValueError("nonisotropic balls are measured with sphere rules")
        mask = region.contains(rule.nodes)
    elif isinstance(region, Tent):
        if rule.domain != "ball":
            raise ValueError("tents are measured with ball rules")
        mask = in_tent_batch(rule.nodes, region)
    elif region == "sphere" or region == "ball":
        if rule.domain != region:
            raise ValueError("rule domain does not match region")
        return rule.total
    else:
        raise TypeError(f"unsupported region {region!r}")
    return float(np.sum(rule.weights[mask]))


def automorphism(a, z) -> np.ndarray:
    """The involutive ball automorphism phi_a exchanging a and 0 (batched over z)."""
    a = np.asarray(a, dtype=complex)
    z = np.asarray(z, dtype=complex)
    aa = norm2(a)
    za = inner(z, a)
    if aa == 0:
        return -z
    P = za[..., None] * a / aa
    Q = z - P
    s = np.sqrt(1.0 - aa)
    return (a - P - s * Q) / (1.0 - za)[..., None]
