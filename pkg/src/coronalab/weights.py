"""Muckenhoupt weights on the unit sphere."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .ball import as_boundary_point, as_point, inner
from .quad import cap_rule, unitary_from

# cap rule resolution used for ball averages
CAP_DEPTH = 30
CAP_ORDER = 8
CAP_NPSI = 16
CAP_NXI = 12


class Weight:
    """A nonnegative density on the sphere with a memoized ball-average evaluator.

    Parameters
    ----------
    density : callable
        Vectorized ``(..., n) -> (...)`` real values.
    n : int
    description : dict, optional
        Declarative form (see ``Weight.from_spec``); used for hashing and I/O.
    """

    def __init__(self, density: Callable, n: int, description: dict | None = None):
        self._density = density
        self.n = int(n)
        self.description = description or {"kind": "custom"}
        self._memo: dict = {}
        self._lock = threading.Lock()

    def __call__(self, zeta) -> np.ndarray:
        vals = np.asarray(self._density(np.asarray(zeta, dtype=complex)), dtype=float)
        if np.any(vals < 0) or np.any(~np.isfinite(vals)):
            raise ValueError("weight density must be finite and nonnegative")
        return vals

    @classmethod
    def constant(cls, n: int, value: float = 1.0) -> "Weight":
        if value <= 0:
            raise ValueError("constant weight must be positive")
        return cls(lambda z: np.full(z.shape[:-1], float(value)), n,
                   {"kind": "constant", "value": float(value)})

    @classmethod
    def power(cls, a: float, center) -> "Weight":
        """|1 - <zeta, center>|^a.

        Integrable iff a > -n.  Exponents outside that range are accepted so
        that divergence can be observed numerically.
        """
        center = as_boundary_point(center)
        n = center.shape[0]

        def dens(z):
            d = np.abs(1.0 - inner(z, center))
            with np.errstate(divide="ignore"):
                return np.where(d > 0, d ** float(a), np.inf if a < 0 else (0.0 if a > 0 else 1.0))

        return cls(dens, n, {"kind": "power", "a": float(a),
                             "center": [[c.real, c.imag] for c in center]})

    @classmethod
    def product(cls, *weights: "Weight") -> "Weight":
        if not weights:
            raise ValueError("empty product")
        n = weights[0].n
        if any(w.n != n for w in weights):
            raise ValueError("dimension mismatch in weight product")

        def dens(z):
            out = np.ones(z.shape[:-1])
            for w in weights:
                out = out * w(z)
            return out

        return cls(dens, n, {"kind": "product", "factors": [w.description for w in weights]})

    @classmethod
    def from_spec(cls, spec: dict, n: int) -> "Weight":
        kind = spec.get("kind")
        if kind == "constant":
            return cls.constant(n, spec.get("value", 1.0))
        if kind == "power":
            center = spec.get("center")
            if center is None:
                center = np.eye(n)[0]
            else:
                center = np.array([complex(*c) if isinstance(c, (list, tuple)) else complex(c)
                                   for c in center])
            return cls.power(spec["a"], center)
        if kind == "product":
            return cls.product(*(cls.from_spec(s, n) for s in spec["factors"]))
        raise ValueError(f"unknown weight kind {kind!r}")

    def power_dual(self, p: float) -> "Weight":
        """theta' = theta^(-p'/p) = theta^(-1/(p-1))."""
        if p <= 1:
            raise ValueError("p must exceed 1")
        e = -1.0 / (p - 1.0)
        return Weight(lambda z: self(z) ** e, self.n,
                      {"kind": "dual", "p": float(p), "of": self.description})

    def average(self, z, depth: int = CAP_DEPTH) -> float:
        """Theta(z) = theta(I_z)/|I_z|, memoized.

        ``depth`` is the number of dyadic levels the cap rule resolves toward
        the cap center.
        """
        z = as_point(z, self.n)
        key = (z.tobytes(), depth)
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        r = float(np.linalg.norm(z))
        if r == 0:
            center = np.eye(self.n, dtype=complex)[0]
            radius = 2.0
        else:
            center = z / r
            radius = 1.0 - r * r
        val = ball_average(self, center, radius, depth)
        with self._lock:
            self._memo[key] = val
        return val


def ball_average(theta: Weight, center, radius: float, depth: int = CAP_DEPTH) -> float:
    """Mean of theta over I(center, radius); radius >= 2 means the whole sphere."""
    rule = cap_rule(center, radius, depth=depth, order=CAP_ORDER, n_psi=CAP_NPSI, n_xi=CAP_NXI)
    return float(np.sum(rule.weights * theta(rule.nodes)) / rule.total)


def ball_mass(theta: Weight, center, radius: float) -> float:
    """theta(I(center, radius))."""
    rule = cap_rule(center, radius, depth=CAP_DEPTH, order=CAP_ORDER, n_psi=CAP_NPSI, n_xi=CAP_NXI)
    return float(np.sum(rule.weights * theta(rule.nodes)))


def average(theta: Weight, z) -> float:
    """Theta(z); z = 0 averages over the whole sphere."""
    return theta.average(z)


def average_batch(theta: Weight, z, depth: int = 12, order: int = 4, n_psi: int = 8,
                  n_xi: int = 6, chunk: int = 2_000_000) -> np.ndarray:
    """Theta at many points at once, for use inside outer quadratures.

    Points sharing |z| share one reference cap rule at e_1, which is carried
    to each I_z by a unitary fixing the pseudo-distance.
    """
    z = np.asarray(z, dtype=complex)
    n = theta.n
    flat = z.reshape(-1, n)
    r = np.linalg.norm(flat, axis=-1)
    out = np.empty(flat.shape[0])
    e1 = np.eye(n, dtype=complex)[0]
    for rv in np.unique(r):
        idx = np.nonzero(r == rv)[0]
        radius = 2.0 if rv == 0 else 1.0 - rv * rv
        ref = cap_rule(e1, radius, depth=depth, order=order, n_psi=n_psi, n_xi=n_xi)
        if rv == 0:
            out[idx] = np.sum(ref.weights * theta(ref.nodes)) / ref.total
            continue
        step = max(1, chunk // len(ref.weights))
        for s in range(0, idx.size, step):
            part = idx[s:s + step]
            U = unitary_from(flat[part] / rv)
            nodes = np.einsum("mij,pj->mpi", U, ref.nodes)
            out[part] = theta(nodes) @ ref.weights / ref.total
    return out.reshape(z.shape[:-1])


def dual_weight(theta: Weight, p: float) -> Weight:
    return theta.power_dual(p)


@dataclass
class ApReport:
    p: float
    constant: float
    samples: list
    values: np.ndarray
    doubling: tuple | None = field(default=None)


def ap_values(theta: Weight, p: float, samples, depth: int = CAP_DEPTH) -> np.ndarray:
    if p <= 1:
        raise ValueError("p must exceed 1")
    if len(samples) == 0:
        raise ValueError("no samples")
    pp = p / (p - 1.0)
    dual = theta.power_dual(p)
    return np.array([theta.average(z, depth) ** (1 / p) * dual.average(z, depth) ** (1 / pp) for z in samples])


def ap_constant(theta: Weight, p: float, samples, depth: int = CAP_DEPTH) -> ApReport:
    """Sample supremum of Theta(z)^(1/p) Theta'(z)^(1/p').

    Each average resolves ``depth`` dyadic levels toward the center of I_z;
    increasing it refines the sampling of a boundary singularity there.
    """
    vals = ap_values(theta, p, samples, depth)
    return ApReport(p=p, constant=float(np.max(vals)), samples=list(samples), values=vals)


def boundary_samples(n: int, toward=None, depths=(1, 2, 3, 4), count: int = 8, seed: int = 0):
    """Interior sample points: t*eta with 1 - t = 10^-k toward ``toward`` plus random directions."""
    rng = np.random.Generator(np.random.PCG64(seed))
    dirs = []
    if toward is not None:
        dirs.append(as_boundary_point(toward, n))
    for _ in range(count):
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        dirs.append(v / np.linalg.norm(v))
    pts = [np.zeros(n, dtype=complex)]
    for d in dirs:
        for k in depths:
            pts.append((1.0 - 10.0 ** (-k)) * d)
    return pts


def maximal_hl(theta: Weight, zeta, radii=None) -> float:
    """sup_t Theta(t zeta) over the dilation grid ``radii``."""
    zeta = as_boundary_point(zeta, theta.n)
    if radii is None:
        radii = np.concatenate([[0.0], 1.0 - np.logspace(-0.3, -4, 16)])
    return float(max(theta.average(t * zeta) for t in radii))


def a1_constant(theta: Weight, samples, radii=None) -> float:
    """max over boundary samples of M theta(zeta) / theta(zeta)."""
    best = 0.0
    for zeta in samples:
        zeta = as_boundary_point(zeta, theta.n)
        val = float(theta(zeta[None, :])[0])
        if val == 0:
            raise ValueError(f"weight vanishes at sample {zeta}")
        best = max(best, maximal_hl(theta, zeta, radii) / val)
    return best


@dataclass
class DoublingReport:
    C: float
    lam: float
    slopes: np.ndarray

    def consistent_with(self, p: float, n: int, tol: float = 0.2) -> bool:
        return self.lam < n * p + tol


def doubling(theta: Weight, samples) -> DoublingReport:
    """Fit theta(I(zeta, r)) ~ r^lambda per center and report (C, lambda).

    ``samples`` is a list of ``(zeta, radii)`` with at least three radii in
    (0, 1] each.  lambda is the largest fitted slope; C is the largest ratio
    theta(I_2r) / (2^lambda theta(I_r)) over the sampled radii.
    """
    slopes = []
    ratios = []
    for zeta, radii in samples:
        radii = np.asarray(radii, dtype=float)
        if radii.size < 3:
            raise ValueError("doubling fit needs at least three radii")
        if np.any(radii <= 0) or np.any(radii > 1):
            raise ValueError("radii must lie in (0, 1]")
        m1 = np.array([ball_mass(theta, zeta, r) for r in radii])
        m2 = np.array([ball_mass(theta, zeta, 2 * r) for r in radii])
        slope = np.polyfit(np.log(radii), np.log(m1), 1)[0]
        slopes.append(slope)
        ratios.append(m2 / m1)
    lam = float(max(slopes))
    C = float(max(np.max(r) for r in ratios) / 2.0 ** lam)
    return DoublingReport(C=C, lam=lam, slopes=np.array(slopes))
