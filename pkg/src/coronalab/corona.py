"""Corona solutions through the Koszul complex.

Elements of the exterior algebra over C^m are dicts keyed by increasing
tuples of 0-based generator indices.  Form-valued elements (``LambdaForm``
values) are dicts keyed by pairs (I, J): I indexes e_I, J the dzbar_J factor.
The product of such elements follows the convention
(eta e_I) ^ (theta e_J) = (eta ^ theta) e_I ^ e_J with no sign exchanged
between the two algebras.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Callable

import numpy as np

from . import _forms as fm
from .fields import PolyHolo, SmoothField
from .kernels import (KernelConstants, SolverRule, centered_nodes, contraction,
                      dbar_from_stencil, fd_stencil, kernel_terms)
from .ball import norm2

# ---------------------------------------------------------------- exterior algebra


def lam_wedge(a: dict, b: dict) -> dict:
    return fm.wedge(a, b)


def delta(v, x: dict) -> dict:
    """Interior multiplication sum_j v_j i(e_j^*) on an element of grade >= 1.

    On e_{i_1} ^ ... ^ e_{i_l} this is sum_j (-1)^(j-1) v_{i_j} e_I without i_j.
    Works for scalar or array ``v`` entries and for form-valued elements keyed
    by (I, J).
    """
    if not x:
        return {}
    first = next(iter(x))
    mixed = isinstance(first, tuple) and len(first) == 2 and all(isinstance(t, tuple) for t in first)
    if mixed:
        grades = {len(I) for I, _ in x}
    else:
        grades = {len(I) for I in x}
    if 0 in grades:
        raise ValueError("delta is not defined on grade 0")
    out: dict = {}
    for key, coef in x.items():
        I, J = key if mixed else (key, None)
        for pos, i in enumerate(I):
            rest = I[:pos] + I[pos + 1:]
            term = v[i] * coef
            if pos % 2:
                term = -term
            k = (rest, J) if mixed else rest
            out[k] = out[k] + term if k in out else term
    return out


def lf_wedge(a: dict, b: dict) -> dict:
    """Product of form-valued elements keyed by (I, J)."""
    out: dict = {}
    for (I, J), u in a.items():
        for (K, L), v in b.items():
            s1 = fm.perm_sign(I + K)
            s2 = fm.perm_sign(J + L)
            if s1 == 0 or s2 == 0:
                continue
            key = (tuple(sorted(I + K)), tuple(sorted(J + L)))
            term = u * v if s1 * s2 > 0 else -(u * v)
            out[key] = out[key] + term if key in out else term
    return out


# ---------------------------------------------------------------- corona data


class CoronaError(ValueError):
    pass


def _lipschitz_bound(g: list, radius: float) -> float:
    """sup over |z| <= radius of sum_j sum_k |d_k g_j| from coefficient moduli."""
    total = 0.0
    for gj in g:
        for alpha, c in gj.coefficients.items():
            deg = sum(alpha)
            if deg == 0:
                continue
            total += abs(c) * deg * radius ** (deg - 1)
    return total


def certify_lower_bound(g: list, spacing: float = 0.1) -> tuple[float, float]:
    """(grid minimum of |g|, certified lower bound of inf_B |g|).

    The grid is a cubic lattice of the given spacing on R^(2n) restricted to
    |x| <= 1 + r, r = spacing sqrt(2n)/2 its covering radius; the bound
    subtracts the Lipschitz slack L r with L from coefficient norms.
    """
    n = g[0].n
    r = spacing * np.sqrt(2 * n) / 2
    ticks = np.arange(-1.0 - r, 1.0 + r + spacing / 2, spacing)
    mins = []
    # stream over the first real coordinate to bound memory
    grids = np.meshgrid(*([ticks] * (2 * n - 1)), indexing="ij")
    rest = np.stack([x.ravel() for x in grids], axis=1)
    for t0 in ticks:
        x = np.concatenate([np.full((rest.shape[0], 1), t0), rest], axis=1)
        keep = np.sum(x * x, axis=1) <= (1 + r) ** 2
        if not np.any(keep):
            continue
        x = x[keep]
        z = x[:, 0::2] + 1j * x[:, 1::2]
        mins.append(np.min(np.sqrt(sum(np.abs(gj(z)) ** 2 for gj in g))))
    gmin = float(min(mins))
    return gmin, gmin - _lipschitz_bound(g, 1 + r) * r


@dataclass
class CoronaData:
    """G_j = conj(g_j)/|g|^2 with closed-form partials, and the forms built from it."""

    g: list
    G: list

    @property
    def m(self) -> int:
        return len(self.g)

    def values(self, z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(G (..., m), dG/dz (..., m, n), dG/dzbar (..., m, n))."""
        z = np.asarray(z, dtype=complex)
        gv = np.stack([gj(z) for gj in self.g], axis=-1)
        dg = np.stack([gj.partials(z)[0] for gj in self.g], axis=-2)  # (..., m, n)
        g2 = np.sum(np.abs(gv) ** 2, axis=-1)
        G = np.conj(gv) / g2[..., None]
        s_bar = np.einsum("...l,...lk->...k", gv, np.conj(dg))  # sum_l g_l conj(d_k g_l)
        s_hol = np.einsum("...l,...lk->...k", np.conj(gv), dg)  # sum_l conj(g_l) d_k g_l
        dGbar = np.conj(dg) / g2[..., None, None] - np.conj(gv)[..., :, None] * s_bar[..., None, :] / g2[..., None, None] ** 2
        dGhol = -np.conj(gv)[..., :, None] * s_hol[..., None, :] / g2[..., None, None] ** 2
        return G, dGhol, dGbar

    def G_lambda(self, z) -> dict:
        G, _, _ = self.values(z)
        return {((i,), ()): G[..., i] for i in range(self.m)}

    def dbarG_lambda(self, z) -> dict:
        _, _, dGbar = self.values(z)
        n = dGbar.shape[-1]
        return {((i,), (j,)): dGbar[..., i, j] for i in range(self.m) for j in range(n)}

    def omega(self, z, i: int = 0, j: int = 1) -> np.ndarray:
        """Omega_ij = G_i dbar G_j - G_j dbar G_i, shape (..., n)."""
        G, _, dGbar = self.values(z)
        return G[..., i, None] * dGbar[..., j, :] - G[..., j, None] * dGbar[..., i, :]

    def omega_closed(self, z) -> np.ndarray:
        """conj(g_1 d g_2 - g_2 d g_1) / |g|^4 (two generators)."""
        z = np.asarray(z, dtype=complex)
        g1, g2 = self.g[0], self.g[1]
        v1, v2 = g1(z), g2(z)
        d1, d2 = g1.partials(z)[0], g2.partials(z)[0]
        g2n = np.abs(v1) ** 2 + np.abs(v2) ** 2
        for gj in self.g[2:]:
            g2n = g2n + np.abs(gj(z)) ** 2
        return np.conj(v1[..., None] * d2 - v2[..., None] * d1) / g2n[..., None] ** 2

    def omega123_det(self, z) -> np.ndarray:
        """Leibniz expansion of the determinant with rows G, dbar G, dbar G: coefficient of dzbar_1 ^ dzbar_2."""
        G, _, dGbar = self.values(z)
        return self._omega3(G, dGbar, expanded=False)

    def omega123_cyclic(self, z) -> np.ndarray:
        """2 (G_1 dbarG_2 ^ dbarG_3 + G_2 dbarG_3 ^ dbarG_1 + G_3 dbarG_1 ^ dbarG_2)."""
        G, _, dGbar = self.values(z)
        return self._omega3(G, dGbar, expanded=True)

    @staticmethod
    def _omega3(G, dGbar, expanded):
        n = dGbar.shape[-1]
        Js = fm.multi_indices(n, 2)
        out = np.zeros(G.shape[:-1] + (len(Js),), dtype=complex)

        def wedge2(a, b):
            return np.stack([a[..., j] * b[..., k] - a[..., k] * b[..., j] for j, k in Js], axis=-1)

        if expanded:
            for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
                out = out + 2 * G[..., i, None] * wedge2(dGbar[..., j, :], dGbar[..., k, :])
            return out
        from itertools import permutations
        for p in permutations(range(3)):
            out = out + fm.perm_sign(p) * G[..., p[0], None] * wedge2(dGbar[..., p[1], :], dGbar[..., p[2], :])
        return out


def corona_data(g: list, delta_min: float | None = None, spacing: float = 0.1) -> CoronaData:
    """G_j = conj(g_j)/|g|^2; with ``delta_min`` the lower bound of |g| is certified first."""
    if len(g) < 1:
        raise CoronaError("need at least one generator")
    n = g[0].n
    if any(gj.n != n for gj in g):
        raise CoronaError("generators live in different dimensions")
    if delta_min is not None:
        gmin, cert = certify_lower_bound(g, spacing)
        if cert <= 0 or cert < delta_min:
            raise CoronaError(f"|g| lower bound not certified: grid min {gmin:.4g}, bound {cert:.4g}")
    data = CoronaData(g=list(g), G=[])

    def make(j):
        return SmoothField(lambda z: data.values(z)[0][..., j], n,
                           partials=lambda z: (data.values(z)[1][..., j, :], data.values(z)[2][..., j, :]))

    data.G = [make(j) for j in range(len(g))]
    return data


# ---------------------------------------------------------------- problems and solvers


@dataclass
class CoronaProblem:
    g: list
    f: SmoothField
    n: int
    N: float = 3.0
    rule: SolverRule = field(default_factory=SolverRule)
    inner_rule: SolverRule | None = None
    constants: KernelConstants | None = None
    delta_min: float | None = None

    def __post_init__(self):
        if self.n != self.g[0].n:
            raise CoronaError("dimension mismatch between n and generators")
        self.data = corona_data(self.g, self.delta_min)

    @property
    def m(self) -> int:
        return len(self.g)

    def require_constants(self) -> KernelConstants:
        c = self.constants
        if c is None:
            raise CoronaError("kernel constants are not calibrated")
        if c.n != self.n or c.N != float(self.N):
            raise CoronaError(f"constants are for (n, N) = ({c.n}, {c.N}), problem needs ({self.n}, {self.N})")
        return c


def _gvals(problem: CoronaProblem, z) -> np.ndarray:
    return np.stack([gj(z) for gj in problem.g], axis=-1)


def apply_kernel_lambda(constants: KernelConstants, q: int, X: Callable, targets,
                        rule: SolverRule) -> dict:
    """K^N_q applied coefficientwise to a form-valued element.

    ``X`` maps points (..., n) to a dict {(I, J): array}, all J of size q + 1.
    Returns {I: (T, C(n, q))}.
    """
    n = constants.n
    targets = np.atleast_2d(np.asarray(targets, dtype=complex))
    srule = rule.sphere(n)
    P = len(srule) * rule.radial
    step = max(1, rule.chunk // P)
    Jin = fm.multi_indices(n, q + 1)
    out: dict = {}
    c = np.asarray(constants.c, dtype=complex)
    for a in range(0, targets.shape[0], step):
        tz = targets[a:a + step]
        nodes, wts = centered_nodes(tz, srule, rule.radial)
        vals = X(nodes)
        zz = np.broadcast_to(tz[:, None, :], nodes.shape)
        M = sum(ck * contraction(n, q, form, nodes.shape[:-1])
                for ck, form in zip(c, kernel_terms(n, constants.N, nodes, zz, q=q)))
        Is = sorted({I for I, _ in vals})
        for I in Is:
            e = np.zeros(nodes.shape[:-1] + (len(Jin),), dtype=complex)
            for b, J in enumerate(Jin):
                if (I, J) in vals:
                    e[..., b] = vals[(I, J)]
            res = np.einsum("tp,tpji,tpi->tj", wts, M, e)
            if I not in out:
                out[I] = np.zeros((targets.shape[0], comb(n, q)), dtype=complex)
            out[I][a:a + step] = res
    return out


def delta_K(problem: CoronaProblem, X: Callable, grade: int, q: int, rule: SolverRule) -> Callable:
    """The operator delta_g K: X (grade, (0, q+1)) -> (grade - 1, (0, q)) as a callable."""
    constants = problem.require_constants()
    n = problem.n
    if not 0 <= q <= n - 1:
        raise CoronaError(f"bidegree violation: K_q with q = {q} for n = {n}")
    Jout = fm.multi_indices(n, q)

    def Y(pts):
        pts = np.asarray(pts, dtype=complex)
        flat = pts.reshape(-1, n)
        KX = apply_kernel_lambda(constants, q, X, flat, rule)
        for I in KX:
            if len(I) != grade:
                raise CoronaError(f"grade violation: expected {grade}, found {len(I)}")
        mixed = {(I, J): KX[I][:, b] for I in KX for b, J in enumerate(Jout)}
        gv = _gvals(problem, flat)
        res = delta([gv[:, i] for i in range(problem.m)], mixed)
        return {k: v.reshape(pts.shape[:-1]) for k, v in res.items()}

    return Y


def koszul_terms(problem: CoronaProblem) -> list:
    """Callables for (-1)^k (delta_g K)^k (f G ^ (dbar G)^k), k = 0..min(n, m-1)."""
    data = problem.data
    r = min(problem.n, problem.m - 1)
    terms = []
    for k in range(r + 1):
        def V(pts, k=k):
            pts = np.asarray(pts, dtype=complex)
            out = {key: problem.f(pts) * v for key, v in data.G_lambda(pts).items()}
            dG = data.dbarG_lambda(pts)
            for _ in range(k):
                out = lf_wedge(out, dG)
            return out

        fn = V
        # innermost application uses the coarse rule when nesting
        for step in range(k):
            q = k - 1 - step
            grade = k + 1 - step
            rule = problem.rule if step == k - 1 else (problem.inner_rule or problem.rule)
            fn = delta_K(problem, fn, grade, q, rule)
        terms.append((k, fn))
    return terms


def koszul_solve(problem: CoronaProblem, z) -> np.ndarray:
    """T_g^N(f)(z) = sum_k (-1)^k (delta_g K^N)^k (f G ^ (dbar G)^k); shape (T, m)."""
    if problem.m > 3 or problem.n > 3:
        raise CoronaError("generator count or dimension beyond the supported range")
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    if np.any(norm2(z) >= 1.0):
        raise CoronaError("solution points must be interior")
    out = np.zeros(z.shape[:-1] + (problem.m,), dtype=complex)
    for k, fn in koszul_terms(problem):
        vals = fn(z)
        for (I, J), v in vals.items():
            if len(I) != 1 or len(J) != 0:
                raise CoronaError("Koszul term has unexpected grade or bidegree")
            out[..., I[0]] += (-1) ** k * v
    return out


def t2_solve(problem: CoronaProblem, z) -> np.ndarray:
    """(f G_1 + g_2 K(f Omega), f G_2 - g_1 K(f Omega)) for two generators; shape (T, 2)."""
    if problem.m != 2:
        raise CoronaError("t2_solve needs exactly two generators")
    constants = problem.require_constants()
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    data = problem.data

    def X(pts):
        fo = problem.f(pts)[..., None] * data.omega(pts, 0, 1)
        return {((0, 1), (j,)): fo[..., j] for j in range(problem.n)}

    KO = apply_kernel_lambda(constants, 0, X, z, problem.rule)[(0, 1)][:, 0]
    G, _, _ = data.values(z)
    gv = _gvals(problem, z)
    fz = problem.f(z)
    return np.stack([fz * G[:, 0] + gv[:, 1] * KO, fz * G[:, 1] - gv[:, 0] * KO], axis=-1)


@dataclass
class VerificationReport:
    residual: float
    dbar: np.ndarray
    points: int
    extra: dict = field(default_factory=dict)


def verify_solution(problem: CoronaProblem, solver: Callable, points, h: float = 1e-4,
                    holomorphy: bool = True) -> VerificationReport:
    """Max |sum g_i F_i - f| and per-component finite-difference |dbar F_j| over ``points``."""
    points = np.atleast_2d(np.asarray(points, dtype=complex))
    n = problem.n
    if holomorphy:
        st = fd_stencil(points, h)
        vals = solver(st.reshape(-1, n)).reshape(st.shape[0], st.shape[1], -1)
        F = vals[:, 0, :]
        dbar = np.zeros((points.shape[0], problem.m))
        for j in range(problem.m):
            d = dbar_from_stencil(vals[:, :, j:j + 1], n, 0, h)
            dbar[:, j] = np.sum(np.abs(d), axis=-1)
    else:
        F = solver(points)
        dbar = np.full((points.shape[0], problem.m), np.nan)
    res = np.abs(np.sum(_gvals(problem, points) * F, axis=-1) - problem.f(points))
    return VerificationReport(residual=float(np.max(res)), dbar=np.max(dbar, axis=0), points=len(points))


def sample_points(n: int, count: int, radius: float = 0.7, seed: int = 0) -> np.ndarray:
    """Seeded interior sample points with |z| <= radius."""
    rng = np.random.Generator(np.random.PCG64(seed))
    v = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * radius * rng.uniform(0.0, 1.0, size=(count, 1)) ** (1.0 / (2 * n))


def standard_generators(m: int = 2) -> list:
    """g = (1 + z1/2, z2/2) and, for m = 3, the extra constant 1/3."""
    g = [PolyHolo.parse("1 + z1/2", 2), PolyHolo.parse("z2/2", 2)]
    if m == 3:
        g.append(PolyHolo({(0, 0): 1 / 3}, 2))
    return g
