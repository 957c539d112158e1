"""Integral kernels on the ball.

Contents: the distance function phi, the model kernels
L^N_{M,L}(w, z) = (1-|w|^2)^(N-1) / (|1 - <z, w>|^M phi(w, z)^L) and their
type, the weighted Berndtsson-Andersson type solution kernels K^N for the
dbar equation with their calibration and decomposition, and the Cauchy-Szego
and Poisson-Szego projections.

Form conventions: generator j stands for dw_j, n + j for dwbar_j and 2n + j
for dzbar_j (0-based j).  Forms in dzbar alone are stored as arrays whose last
axis runs over increasing multi-indices in lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from pathlib import Path
from typing import Callable

import numpy as np

from . import _forms as fm
from .ball import inner, norm2
from .quad import (QuadratureRule, ball_rule, centered_nodes, focused_ball_rule,
                   sphere_rule)

CONSTANTS_VERSION = 1


# ---------------------------------------------------------------- phi, L kernels

def phi_difference(w, z) -> np.ndarray:
    """|1 - <z, w>|^2 - (1-|w|^2)(1-|z|^2)."""
    return np.abs(1.0 - inner(z, w)) ** 2 - (1.0 - norm2(w)) * (1.0 - norm2(z))


def phi(w, z, check: bool = False) -> np.ndarray:
    """|<w - z, w>|^2 + (1-|w|^2)|w - z|^2, the cancellation-free form of phi.

    With ``check`` the difference form is evaluated too and agreement to
    1e-10 (relative to the size of its terms) is asserted.
    """
    w = np.asarray(w, dtype=complex)
    z = np.asarray(z, dtype=complex)
    d = w - z
    val = np.abs(inner(d, w)) ** 2 + (1.0 - norm2(w)) * norm2(d)
    if check:
        other = phi_difference(w, z)
        scale = np.abs(1.0 - inner(z, w)) ** 2 + 1.0
        if np.any(np.abs(val - other) > 1e-10 * scale):
            raise AssertionError("phi forms disagree")
    return val


@dataclass(frozen=True)
class LParams:
    N: float
    M: float
    L: float

    def __post_init__(self):
        if not self.N > 0:
            raise ValueError("N must be positive")

    def check(self, n: int) -> None:
        if not self.L < n:
            raise ValueError(f"L must be < n = {n}")


def kernel_type(params: LParams, n: int) -> float:
    """n + N - M - 2L."""
    params.check(n)
    return n + params.N - params.M - 2 * params.L


def l_kernel(params: LParams, w, z) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    z = np.asarray(z, dtype=complex)
    val = (1.0 - norm2(w)) ** (params.N - 1) / np.abs(1.0 - inner(z, w)) ** params.M
    if params.L != 0:
        ph = phi(w, z)
        if np.any(ph == 0) and params.L > 0:
            raise ZeroDivisionError("L kernel is singular at w = z")
        val = val / ph ** params.L
    return val


def default_l_rule(params: LParams, z, level: int = 10) -> QuadratureRule:
    """Ball rule adapted to the singularities of L^N_{M,L}(., z)."""
    z = np.asarray(z, dtype=complex)
    r = float(np.linalg.norm(z))
    if params.L > 0:
        from .quad import centered_ball_rule
        return centered_ball_rule(z, radial=24, level=level)
    if r == 0:
        return ball_rule(z.shape[0], level)
    return focused_ball_rule(z / r, depth=40, order=6, n_psi=12, n_xi=8)


def l_apply(params: LParams, psi: Callable | None, z, rule: QuadratureRule | None = None) -> complex:
    """int_B L^N_{M,L}(w, z) psi(w) dnu(w); psi = None means psi = 1."""
    z = np.asarray(z, dtype=complex)
    params.check(z.shape[0])
    rule = rule or default_l_rule(params, z)
    vals = l_kernel(params, rule.nodes, z)
    if psi is not None:
        vals = vals * psi(rule.nodes)
    return complex(np.sum(rule.weights * vals))


def type_exponent(params: LParams, n: int, deltas, zeta=None) -> float:
    """Fitted boundary exponent of z -> int L^N_{M,L}(w, z) dnu(w) along a ray.

    With z = sqrt(1 - delta) zeta (so 1 - |z|^2 = delta) the integral is
    computed with one rule graded toward zeta.  For negative type the
    exponent is the slope of log I against log delta; for positive type the
    integral stays bounded and the slope of log |I(z) - I(zeta)| is reported;
    that slope is min(type, 1), with a logarithmic correction at integer type.
    """
    if zeta is None:
        zeta = np.eye(n, dtype=complex)[0]
    if params.L != 0:
        raise ValueError("boundary fits are implemented for L = 0 kernels")
    deltas = np.asarray(deltas, dtype=float)
    rule = focused_ball_rule(zeta, depth=48, order=6, n_psi=12, n_xi=8)
    kappa = kernel_type(params, n)
    base = l_kernel(params, rule.nodes, zeta) if kappa > 0 else 0.0
    vals = []
    for d in deltas:
        z = np.sqrt(1.0 - d) * zeta
        vals.append(abs(np.sum(rule.weights * (l_kernel(params, rule.nodes, z) - base))))
    return float(np.polyfit(np.log(deltas), np.log(vals), 1)[0])


def bi_poisson(n: int, A: float, B: float, N: float, z, w, rule: QuadratureRule) -> float:
    """int_B (1-|u|^2)^(N-1) / (|1 - <z, u>|^(n+A) |1 - <u, w>|^(n+B)) dnu(u)."""
    u = rule.nodes
    val = (1.0 - norm2(u)) ** (N - 1) / (np.abs(1.0 - inner(z, u)) ** (n + A)
                                           * np.abs(1.0 - inner(u, w)) ** (n + B))
    return float(np.sum(rule.weights * val))


def composed_kernel(n: int, N: float, A: float, B: float, inner_params: LParams,
                    w, zeta, rule: QuadratureRule) -> float:
    """int_B L^N_{n+A,0}(z, zeta) L^{N+B}_{M+B,L}(w, z) dnu(z) for an L = 0 inner kernel."""
    if inner_params.L != 0:
        raise ValueError("composition is implemented for L = 0")
    z = rule.nodes
    first = (1.0 - norm2(z)) ** (N - 1) / np.abs(1.0 - inner(zeta, z)) ** (n + A)
    second = l_kernel(LParams(N + B, inner_params.M + B, 0.0), np.asarray(w)[None, :], z)
    return float(np.sum(rule.weights * first * second))


# ---------------------------------------------------------------- solution kernels

def _wn(n, j):
    return j


def _wbar(n, j):
    return n + j


def _zbar(n, j):
    return 2 * n + j


def kernel_pieces(n: int, w: np.ndarray, z: np.ndarray, dbar_z: bool = True) -> dict:
    """Building blocks s, dbar s, gamma and phi at arrays of points.

    s = (1 - <w, z>) d|w|^2 - (1 - |w|^2) d<w, z> (a (1,0)-form in w),
    dbar = dbar_w + dbar_z (``dbar_z=False`` keeps dbar_w only) and
    gamma = dbar (d|w|^2 / (1 - |w|^2)).
    """
    wz = inner(w, z)
    ww = norm2(w)
    rho = 1.0 - ww
    one = 1.0 - wz
    s = {(_wn(n, j),): one * np.conj(w[..., j]) - rho * np.conj(z[..., j]) for j in range(n)}
    ds: dict = {}
    gamma: dict = {}
    for j in range(n):
        for i in range(n):
            # ds_j/dwbar_i dwbar_i ^ dw_j = -(...) dw_j ^ dwbar_i
            a = w[..., i] * np.conj(z[..., j]) + (one if i == j else 0.0)
            ds[(_wn(n, j), _wbar(n, i))] = -a
            if dbar_z:
                b = -w[..., i] * np.conj(w[..., j]) - (rho if i == j else 0.0)
                ds[(_wn(n, j), _zbar(n, i))] = -b
            g = w[..., i] * np.conj(w[..., j]) / rho ** 2 + ((1.0 / rho) if i == j else 0.0)
            gamma[(_wn(n, j), _wbar(n, i))] = -g
    return {"s": s, "ds": ds, "gamma": gamma, "phi": phi(w, z), "rho": rho,
            "hol": 1.0 - inner(z, w)}


def kernel_terms(n: int, N: float, w: np.ndarray, z: np.ndarray, q: int | None = None,
                 dbar_z: bool = True) -> list[dict]:
    """The k-th summand of K^N without its constant, for k = 0..n-1.

    Each summand is ((1-|w|^2)/(1 - <z, w>))^(N+k) s ^ (dbar s)^(n-1-k) ^ gamma^k
    / phi^(n-k).  With ``q`` only monomials with q factors dzbar are kept.
    """
    P = kernel_pieces(n, w, z, dbar_z)
    out = []
    for k in range(n):
        form = fm.wedge(fm.wedge(P["s"], fm.power(P["ds"], n - 1 - k)), fm.power(P["gamma"], k))
        if q is not None:
            form = {m: v for m, v in form.items() if sum(g >= 2 * n for g in m) == q}
        factor = (P["rho"] / P["hol"]) ** (N + k) / P["phi"] ** (n - k)
        out.append({m: v * factor for m, v in form.items()})
    return out


def top_form_factor(n: int) -> complex:
    """dw_1^..^dw_n ^ dwbar_1^..^dwbar_n = factor * dnu."""
    return (-1) ** (n * (n - 1) // 2) * (-2j) ** n


def contraction(n: int, q: int, form: dict, shape) -> np.ndarray:
    """Matrix M[..., J, I] with (form ^ dwbar_I) = sum_J M[J, I] dnu(w) dzbar_J.

    I runs over (q+1)-subsets, J over q-subsets (lexicographic order).
    """
    Js = fm.multi_indices(n, q)
    Is = fm.multi_indices(n, q + 1)
    jpos = {J: a for a, J in enumerate(Js)}
    M = np.zeros(tuple(shape) + (len(Js), len(Is)), dtype=complex)
    vol = top_form_factor(n)
    for mono, coef in form.items():
        zb = tuple(g - 2 * n for g in mono if g >= 2 * n)
        if len(zb) != q:
            continue
        for b, I in enumerate(Is):
            seq = mono + tuple(n + i for i in I)
            s = fm.perm_sign(seq)
            if s == 0 or len(seq) != 2 * n + q:
                continue
            # sorted order is (dw..., dwbar..., dzbar_J); move dzbar_J in front
            M[..., jpos[zb], b] += s * vol * coef
    return M


@dataclass
class KernelConstants:
    """Calibrated constants c_k (k = 0..n-1) of K^N and the overall constant of Q^{N,1}."""

    n: int
    N: float
    c: tuple
    q1: complex | None = None
    residual: float = float("nan")
    rule: str = ""
    version: int = CONSTANTS_VERSION
    q1_residual: float = float("nan")

    def scaled(self, factor: complex) -> "KernelConstants":
        return KernelConstants(self.n, self.N, tuple(factor * x for x in self.c), self.q1,
                               self.residual, self.rule, self.version, self.q1_residual)

    def key(self) -> str:
        return f"n={self.n};N={self.N};rule={self.rule}"

    def to_text(self) -> str:
        lines = ["# coronalab kernel constants", f"version = {self.version}", f"n = {self.n}",
                 f"N = {self.N!r}", f"rule = {self.rule}", f"residual = {self.residual!r}"]
        for k, c in enumerate(self.c):
            lines.append(f"c_{k} = {complex(c).real!r} {complex(c).imag!r}")
        if self.q1 is not None:
            lines.append(f"q1 = {complex(self.q1).real!r} {complex(self.q1).imag!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "KernelConstants":
        kv = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            kv[key.strip()] = val.strip()
        version = int(kv.get("version", -1))
        if version != CONSTANTS_VERSION:
            raise ValueError(f"unsupported constants version {version}")
        n = int(kv["n"])

        def cplx(s):
            re, im = s.split()
            return complex(float(re), float(im))

        c = tuple(cplx(kv[f"c_{k}"]) for k in range(n))
        return cls(n=n, N=float(kv["N"]), c=c, q1=cplx(kv["q1"]) if "q1" in kv else None,
                   residual=float(kv["residual"]), rule=kv.get("rule", ""), version=version)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "KernelConstants":
        return cls.from_text(Path(path).read_text())


@dataclass(frozen=True)
class SolverRule:
    """Resolution of the centered polar rule used for solution operators."""

    level: int = 6
    radial: int = 12
    chunk: int = 200_000

    def sphere(self, n: int) -> QuadratureRule:
        return sphere_rule(n, self.level)

    def signature(self, n: int) -> str:
        return f"centered(level={self.level},radial={self.radial},n={n})"


def apply_kernel_terms(n: int, N: float, q: int, eta: Callable, targets,
                       rule: SolverRule = SolverRule()) -> np.ndarray:
    """Per-term values of int K_k(w, z) ^ eta(w) at the targets.

    ``eta`` maps points (..., n) to (0, q+1)-form coefficients (..., C(n, q+1)).
    Returns shape (T, n, C(n, q)): summand k, output component J.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=complex))
    if targets.shape[-1] != n:
        raise ValueError("dimension mismatch")
    if not 0 <= q <= n - 1:
        raise ValueError(f"q must lie in 0..{n - 1}")
    if np.any(norm2(targets) >= 1.0):
        raise ValueError("targets must be interior points")
    srule = rule.sphere(n)
    P = len(srule) * rule.radial
    step = max(1, rule.chunk // P)
    out = np.zeros((targets.shape[0], n, comb(n, q)), dtype=complex)
    for a in range(0, targets.shape[0], step):
        tz = targets[a:a + step]
        nodes, wts = centered_nodes(tz, srule, rule.radial)
        e = np.asarray(eta(nodes))
        zz = np.broadcast_to(tz[:, None, :], nodes.shape)
        for k, form in enumerate(kernel_terms(n, N, nodes, zz, q=q)):
            M = contraction(n, q, form, nodes.shape[:-1])
            out[a:a + step, k, :] = np.einsum("tp,tpji,tpi->tj", wts, M, e)
    return out


def apply_kernel(constants: KernelConstants, q: int, eta: Callable, targets,
                 rule: SolverRule = SolverRule()) -> np.ndarray:
    """u = K^N_q(eta) at the targets, shape (T, C(n, q))."""
    terms = apply_kernel_terms(constants.n, constants.N, q, eta, targets, rule)
    return np.einsum("k,tkj->tj", np.asarray(constants.c, dtype=complex), terms)


def fd_stencil(targets, h: float) -> np.ndarray:
    """Points z, z +- h e_j, z +- i h e_j, shape (T, 1 + 4n, n)."""
    targets = np.atleast_2d(np.asarray(targets, dtype=complex))
    n = targets.shape[-1]
    offs = [np.zeros(n, dtype=complex)]
    for j in range(n):
        for d in (h, -h, 1j * h, -1j * h):
            e = np.zeros(n, dtype=complex)
            e[j] = d
            offs.append(e)
    return targets[:, None, :] + np.array(offs)[None, :, :]


def dbar_from_stencil(vals: np.ndarray, n: int, q: int, h: float) -> np.ndarray:
    """dbar of a (0,q)-form from values on ``fd_stencil`` points.

    ``vals`` has shape (T, 1 + 4n, C(n, q)); returns (T, C(n, q+1)).
    """
    Js = fm.multi_indices(n, q)
    Ks = fm.multi_indices(n, q + 1)
    kpos = {K: a for a, K in enumerate(Ks)}
    out = np.zeros((vals.shape[0], len(Ks)), dtype=complex)
    for i in range(n):
        b = 1 + 4 * i
        fx = (vals[:, b] - vals[:, b + 1]) / (2 * h)
        fy = (vals[:, b + 2] - vals[:, b + 3]) / (2 * h)
        dzb = 0.5 * (fx + 1j * fy)
        for a, J in enumerate(Js):
            s = fm.perm_sign((i,) + J)
            if s == 0:
                continue
            out[:, kpos[tuple(sorted((i,) + J))]] += s * dzb[:, a]
    return out


def solve_dbar(constants: KernelConstants, q: int, eta: Callable, targets,
               rule: SolverRule = SolverRule()) -> np.ndarray:
    """K^N_q(eta) at interior targets; solves dbar u = eta for dbar-closed eta."""
    return apply_kernel(constants, q, eta, targets, rule)


def solve_dbar_01(constants: KernelConstants, theta, z, rule: SolverRule = SolverRule()) -> np.ndarray:
    """K^N_0(theta)(z) for a (0,1)-form ``theta`` (callable returning (..., n))."""
    z = np.asarray(z, dtype=complex)
    single = z.ndim == 1
    if np.any(norm2(np.atleast_2d(z)) >= 1.0):
        raise ValueError("z must be interior; use the boundary kernel on the sphere")
    u = apply_kernel(constants, 0, theta, np.atleast_2d(z), rule)[:, 0]
    return u[0] if single else u


def dbar_residual(constants: KernelConstants, q: int, eta: Callable, targets,
                  rule: SolverRule = SolverRule(), h: float = 1e-4) -> np.ndarray:
    """|dbar K(eta) - eta| (sum of moduli) at each target."""
    targets = np.atleast_2d(np.asarray(targets, dtype=complex))
    n = targets.shape[-1]
    st = fd_stencil(targets, h)
    vals = apply_kernel(constants, q, eta, st.reshape(-1, n), rule).reshape(st.shape[0], st.shape[1], -1)
    d = dbar_from_stencil(vals, n, q, h)
    return np.sum(np.abs(d - np.asarray(eta(targets))), axis=-1)


class CalibrationError(RuntimeError):
    pass


def calibration_points(n: int, count: int = 12, radius: float = 0.6, seed: int = 7) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    v = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * radius * rng.uniform(0.2, 1.0, size=(count, 1)) ** (1.0 / (2 * n))


def calibrate(N: float, n: int, forms: list, points=None, rule: SolverRule = SolverRule(),
              h: float = 1e-4, threshold: float = 0.1) -> KernelConstants:
    """Least-squares constants c_k making dbar K^N_0(eta_i) = eta_i on test forms.

    ``forms`` are callables returning dbar-exact (0,1)-form coefficients.
    The relative residual ||A c - b|| / ||b|| is stored; above ``threshold``
    or for a rank-deficient system a CalibrationError is raised.
    """
    if len(forms) < n:
        raise CalibrationError(f"need at least {n} test forms")
    points = calibration_points(n) if points is None else np.atleast_2d(points)
    st = fd_stencil(points, h)
    rows, rhs = [], []
    for eta in forms:
        terms = apply_kernel_terms(n, N, 0, eta, st.reshape(-1, n), rule)
        terms = terms.reshape(st.shape[0], st.shape[1], n, 1)
        cols = [dbar_from_stencil(terms[:, :, k, :], n, 0, h).ravel() for k in range(n)]
        rows.append(np.stack(cols, axis=1))
        rhs.append(np.asarray(eta(points)).ravel())
    A = np.concatenate(rows, axis=0)
    b = np.concatenate(rhs)
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise CalibrationError("rank-deficient calibration system")
    c, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = float(np.linalg.norm(A @ c - b) / np.linalg.norm(b))
    if resid > threshold:
        raise CalibrationError(f"calibration residual {resid:.3g} exceeds {threshold}")
    return KernelConstants(n=n, N=float(N), c=tuple(complex(x) for x in c), residual=resid,
                           rule=rule.signature(n))


def standard_test_forms(n: int) -> list:
    """dbar of zbar_1, zbar_j (j > 1), zbar_1 z_2, |z_1|^2 and z_1 zbar_n."""
    forms = []

    def unit(j):
        return lambda p: np.broadcast_to(np.eye(n, dtype=complex)[j], p.shape).copy()

    for j in range(n):
        forms.append(unit(j))

    def f_abs(p):
        out = np.zeros(p.shape, dtype=complex)
        out[..., 0] = p[..., 0]
        return out

    forms.append(f_abs)
    if n > 1:
        def f_mix(p):
            out = np.zeros(p.shape, dtype=complex)
            out[..., 0] = p[..., 1]
            return out

        def f_mix2(p):
            out = np.zeros(p.shape, dtype=complex)
            out[..., n - 1] = p[..., 0]
            return out

        forms += [f_mix, f_mix2]
    else:
        def f_sq(p):
            return 2 * np.conj(p) * p  # dbar(z zbar^2) = 2 z zbar

        forms.append(f_sq)
    return forms


# ---------------------------------------------------------------- decomposition

def _contract_dual(form: dict, gens, coeffs) -> dict:
    """Interior product with the metric dual of sum_i coeffs_i d(gens_i)."""
    out: dict = {}
    for g, c in zip(gens, coeffs):
        out = fm.add(out, fm.scale(fm.interior(g, form), np.conj(c)))
    return out


def form_norm(form: dict) -> np.ndarray:
    """Sum of moduli of the coefficients."""
    vals = [np.abs(v) for v in form.values()]
    return sum(vals) if vals else 0.0


@dataclass
class KqKernel:
    """The (0,q)-in-z component of K^N at (w, z) and its three-part decomposition.

    ``form = part1 + part2 ^ dbar|w|^2 + part3 ^ dbar|z|^2``, where part2 is
    the component along dbar|w|^2 obtained by orthogonal contraction, part3
    the component of the remainder along dbar|z|^2, and part1 what is left.
    """

    n: int
    q: int
    form: dict
    part1: dict
    part2: dict
    part3: dict

    def magnitudes(self) -> tuple:
        return form_norm(self.part1), form_norm(self.part2), form_norm(self.part3)


def kq_kernel(constants: KernelConstants, q: int, w, z) -> KqKernel:
    n = constants.n
    if not 0 <= q <= n - 1:
        raise ValueError(f"q must lie in 0..{n - 1}")
    w = np.asarray(w, dtype=complex)
    z = np.asarray(z, dtype=complex)
    form: dict = {}
    for c, term in zip(constants.c, kernel_terms(n, constants.N, w, z, q=q)):
        form = fm.add(form, fm.scale(term, c))
    a_gens = [n + i for i in range(n)]
    b_gens = [2 * n + i for i in range(n)]
    a = {(g,): w[..., i] for i, g in enumerate(a_gens)}
    b = {(g,): z[..., i] for i, g in enumerate(b_gens)}
    X = fm.scale(_contract_dual(form, a_gens, [w[..., i] for i in range(n)]), 1.0 / norm2(w))
    along_a = fm.wedge(a, X)
    rest = fm.add(form, fm.scale(along_a, -1.0))
    Y = fm.scale(_contract_dual(rest, b_gens, [z[..., i] for i in range(n)]), 1.0 / norm2(z))
    along_b = fm.wedge(b, Y)
    part1 = fm.add(rest, fm.scale(along_b, -1.0))
    # a ^ X = (-1)^deg(X) X ^ a
    degX = n + (n - q - 1) + q - 1
    sx = -1.0 if degX % 2 else 1.0
    part1 = {m: v for m, v in part1.items() if np.any(np.abs(v) > 0)}
    return KqKernel(n, q, form, part1, fm.scale(X, sx), fm.scale(Y, sx))


# ---------------------------------------------------------------- boundary splitting

def boundary_kernel_apply(constants: KernelConstants, theta: Callable, zeta,
                          rule: QuadratureRule | None = None) -> complex:
    """K^N_0(theta)(zeta) for zeta on the sphere, where phi(w, zeta) = |1 - <w, zeta>|^2."""
    zeta = np.asarray(zeta, dtype=complex)
    n = constants.n
    rule = rule or focused_ball_rule(zeta, depth=24, order=6, n_psi=12, n_xi=8)
    w = rule.nodes
    z = np.broadcast_to(zeta, w.shape)
    e = np.asarray(theta(w))
    total = 0.0
    for c, form in zip(constants.c, kernel_terms(n, constants.N, w, z, q=0)):
        M = contraction(n, 0, form, w.shape[:-1])
        total = total + c * np.sum(rule.weights * np.einsum("pji,pi->p", M, e))
    return complex(total)


def _q1_structure(n: int) -> np.ndarray:
    """C[i, j] with dwbar_i ^ dw_j ^ (sum_k dw_k ^ dwbar_k)^(n-1) = C[i, j] * top."""
    ddb = {(k, n + k): 1.0 for k in range(n)}
    base = fm.power(ddb, n - 1)
    C = np.zeros((n, n), dtype=complex)
    top = tuple(range(2 * n))
    for i in range(n):
        for j in range(n):
            f = fm.wedge(fm.wedge({(n + i,): 1.0}, {(j,): 1.0}), base)
            C[i, j] = f.get(top, 0.0) * top_form_factor(n)
    return C


def q1_terms(n: int, N: float, theta: Callable, zeta, rule: QuadratureRule) -> complex:
    """sum_{k=1}^{n+N} int (1-|w|^2)^N theta ^ d<w, zeta> ^ (d dbar |w|^2)^(n-1) / (1 - <w, zeta>)^k."""
    zeta = np.asarray(zeta, dtype=complex)
    w = rule.nodes
    e = np.asarray(theta(w))
    C = _q1_structure(n)
    dens = np.einsum("pi,ij,j->p", e, C, np.conj(zeta))
    x = 1.0 - inner(w, zeta)
    geo = sum(x ** (-k) for k in range(1, int(round(n + N)) + 1))
    return complex(np.sum(rule.weights * (1.0 - norm2(w)) ** N * dens * geo))


def q2_bound(N: float, theta, zeta, rule: QuadratureRule) -> float:
    """Majorant of the d(theta) part of K^N_0(theta)(zeta).

    ``theta`` is a sequence of n fields with partials (coefficients of dwbar_i).
    """
    zeta = np.asarray(zeta, dtype=complex)
    w = rule.nodes
    n = w.shape[-1]
    d = np.stack([f.partials(w)[0] for f in theta], axis=-2)  # [p, i, j] = d_j theta_i
    dth = {(j, n + i): d[..., i, j] for i in range(n) for j in range(n)}
    first = np.sum(np.abs(d), axis=(-1, -2))
    dw2 = {(j,): np.conj(w[..., j]) for j in range(n)}
    dbw2 = {(n + i,): w[..., i] for i in range(n)}
    second = form_norm(fm.wedge(fm.wedge(dth, dw2), dbw2))
    rho = 1.0 - norm2(w)
    den = np.abs(1.0 - inner(w, zeta)) ** (n + N)
    return float(np.sum(rule.weights * (rho ** (N + 1) * first + rho ** N * second) / den))


def calibrate_q1(constants: KernelConstants, forms, zetas, rule_fn=None) -> KernelConstants:
    """Fit the overall constant of Q^{N,1} against K^N_0 on forms with d(theta) = 0."""
    rule_fn = rule_fn or (lambda z: focused_ball_rule(z, depth=24, order=6, n_psi=12, n_xi=8))
    A, b = [], []
    for zeta in zetas:
        r = rule_fn(zeta)
        for th in forms:
            A.append(q1_terms(constants.n, constants.N, th, zeta, r))
            b.append(boundary_kernel_apply(constants, th, zeta, r))
    A = np.array(A)
    b = np.array(b)
    c = complex(np.vdot(A, b) / np.vdot(A, A))
    resid = float(np.linalg.norm(c * A - b) / np.linalg.norm(b))
    return KernelConstants(constants.n, constants.N, constants.c, c, constants.residual,
                           constants.rule, constants.version, resid)


def q_split(constants: KernelConstants, theta, zeta, rule: QuadratureRule | None = None) -> tuple:
    """(Q^{N,1}(theta)(zeta), majorant of the remaining term) at a boundary point.

    ``theta`` is a sequence of n fields (coefficients of dwbar_i) with partials.
    """
    if constants.q1 is None:
        raise ValueError("constants carry no calibrated Q^{N,1} constant")
    zeta = np.asarray(zeta, dtype=complex)
    rule = rule or focused_ball_rule(zeta, depth=24, order=6, n_psi=12, n_xi=8)

    def coeffs(p):
        return np.stack([f(p) for f in theta], axis=-1)

    q1 = constants.q1 * q1_terms(constants.n, constants.N, coeffs, zeta, rule)
    return complex(q1), q2_bound(constants.N, theta, zeta, rule)


# ---------------------------------------------------------------- projections

_REPRODUCING: dict = {}


def reproducing_constant(rule: QuadratureRule) -> float:
    """1/sigma(S) as integrated by ``rule``, cached per rule signature."""
    key = rule.signature()
    if key not in _REPRODUCING:
        _REPRODUCING[key] = 1.0 / rule.total
    return _REPRODUCING[key]


def cauchy_project(psi: Callable, z, rule: QuadratureRule | None = None) -> np.ndarray:
    """C(psi)(z) = (1/sigma(S)) int psi(zeta) / (1 - <z, zeta>)^n dsigma(zeta)."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    rule = rule or sphere_rule(n, 16)
    kern = (1.0 - np.atleast_2d(z) @ np.conj(rule.nodes).T) ** (-n)
    val = reproducing_constant(rule) * kern @ (rule.weights * psi(rule.nodes))
    return val[0] if z.ndim == 1 else val


def poisson_szego(psi: Callable, z, rule: QuadratureRule | None = None) -> np.ndarray:
    """P(psi)(z) with kernel (1-|z|^2)^n / |1 - <z, zeta>|^(2n), normalized to unit mass."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    rule = rule or sphere_rule(n, 16)
    zz = np.atleast_2d(z)
    kern = (1.0 - norm2(zz))[:, None] ** n / np.abs(1.0 - zz @ np.conj(rule.nodes).T) ** (2 * n)
    val = reproducing_constant(rule) * kern @ (rule.weights * psi(rule.nodes))
    return val[0] if z.ndim == 1 else val
