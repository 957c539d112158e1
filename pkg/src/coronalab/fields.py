"""Functions on the ball and the first-order operators acting on them.

All evaluators are vectorized: they take an array of points of shape
``(..., n)`` and return complex values of shape ``(...)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lgamma
from typing import Callable

import numpy as np

from .ball import inner

DEFAULT_STEP = 1e-4


def _pts(z) -> np.ndarray:
    return np.asarray(z, dtype=complex)


class SmoothField:
    """A smooth complex function with optional closed-form first partials.

    Parameters
    ----------
    evaluator : callable
        ``(..., n) -> (...)``.
    partials : callable, optional
        ``(..., n) -> (d, dbar)`` with ``d[..., j] = df/dz_j`` and
        ``dbar[..., j] = df/dzbar_j``.  Without it, central differences with
        step ``h`` are used.
    holomorphic : bool
        Declares ``df/dzbar = 0``; enables the slice-series form of ``radial_lk``.
    """

    def __init__(self, evaluator: Callable, n: int, partials: Callable | None = None,
                 h: float = DEFAULT_STEP, holomorphic: bool = False):
        self._f = evaluator
        self.n = int(n)
        self._partials = partials
        self.h = h
        self.holomorphic = holomorphic

    def __call__(self, z) -> np.ndarray:
        z = _pts(z)
        self._check_dim(z)
        return np.asarray(self._f(z), dtype=complex)

    def _check_dim(self, z):
        if z.shape[-1] != self.n:
            raise ValueError(f"field lives in C^{self.n}, got points of dimension {z.shape[-1]}")

    @property
    def has_partials(self) -> bool:
        return self._partials is not None

    def partials(self, z) -> tuple[np.ndarray, np.ndarray]:
        z = _pts(z)
        self._check_dim(z)
        if self._partials is not None:
            d, db = self._partials(z)
            return np.asarray(d, dtype=complex), np.asarray(db, dtype=complex)
        return fd_partials(self, z, self.h)


def _five_point(f, z, e, h):
    return (8 * (f(z + e) - f(z - e)) - (f(z + 2 * e) - f(z - 2 * e))) / (12 * h)


def fd_partials(f: Callable, z, h: float = DEFAULT_STEP) -> tuple[np.ndarray, np.ndarray]:
    """Five-point central-difference Wirtinger partials, O(h^4)."""
    z = _pts(z)
    n = z.shape[-1]
    d = np.empty(z.shape, dtype=complex)
    db = np.empty(z.shape, dtype=complex)
    for j in range(n):
        e = np.zeros(n, dtype=complex)
        e[j] = h
        fx = _five_point(f, z, e, h)
        fy = _five_point(f, z, 1j * e, h)
        d[..., j] = 0.5 * (fx - 1j * fy)
        db[..., j] = 0.5 * (fx + 1j * fy)
    return d, db


class PolyHolo(SmoothField):
    """Holomorphic polynomial sum_alpha c_alpha z^alpha with exact derivatives."""

    def __init__(self, coefficients: dict, n: int):
        clean = {}
        for alpha, c in coefficients.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n or min(alpha) < 0:
                raise ValueError(f"bad multi-index {alpha} for n = {n}")
            if c != 0:
                clean[alpha] = clean.get(alpha, 0) + complex(c)
        self.coefficients = clean
        super().__init__(self._eval, n, partials=self._exact_partials, holomorphic=True)

    @classmethod
    def parse(cls, expr: str, n: int) -> "PolyHolo":
        """Build from a polynomial expression in z1..zn, e.g. ``"1 + z1/2"``."""
        import sympy

        zs = sympy.symbols(f"z1:{n + 1}")
        poly = sympy.Poly(sympy.sympify(expr, locals={str(s): s for s in zs}), *zs)
        return cls({m: complex(c) for m, c in poly.terms()}, n)

    @classmethod
    def monomial(cls, alpha, coef=1.0) -> "PolyHolo":
        return cls({tuple(alpha): coef}, len(alpha))

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self.coefficients), default=0)

    def _eval(self, z):
        out = np.zeros(z.shape[:-1], dtype=complex)
        for alpha, c in self.coefficients.items():
            out = out + c * np.prod(z ** np.array(alpha), axis=-1)
        return out

    def derivative(self, j: int) -> "PolyHolo":
        """d/dz_j (0-based j)."""
        if not 0 <= j < self.n:
            raise IndexError(f"index {j} out of range for n = {self.n}")
        out = {}
        for alpha, c in self.coefficients.items():
            if alpha[j] > 0:
                beta = list(alpha)
                beta[j] -= 1
                out[tuple(beta)] = out.get(tuple(beta), 0) + c * alpha[j]
        return PolyHolo(out, self.n)

    def _exact_partials(self, z):
        d = np.stack([self.derivative(j)(z) for j in range(self.n)], axis=-1)
        return d, np.zeros_like(d)

    def __add__(self, other: "PolyHolo") -> "PolyHolo":
        out = dict(self.coefficients)
        for a, c in other.coefficients.items():
            out[a] = out.get(a, 0) + c
        return PolyHolo(out, self.n)

    def __mul__(self, other) -> "PolyHolo":
        if not isinstance(other, PolyHolo):
            return PolyHolo({a: c * other for a, c in self.coefficients.items()}, self.n)
        out: dict = {}
        for a, c in self.coefficients.items():
            for b, d in other.coefficients.items():
                k = tuple(x + y for x, y in zip(a, b))
                out[k] = out.get(k, 0) + c * d
        return PolyHolo(out, self.n)

    __rmul__ = __mul__

    def __repr__(self):
        return f"PolyHolo({self.coefficients!r}, n={self.n})"


class CauchyKernelField(SmoothField):
    """sum_p c_p (1 - <z, w0>)^(-p); holomorphic in z, closed under the radial operator."""

    def __init__(self, w0, terms: dict | float = 1.0):
        w0 = _pts(w0)
        if np.sum(np.abs(w0) ** 2) >= 1.0:
            raise ValueError("pole parameter w0 must lie in the open ball")
        if not isinstance(terms, dict):
            terms = {float(terms): 1.0}
        self.w0 = w0
        self.terms = {float(p): complex(c) for p, c in terms.items() if c != 0}
        super().__init__(self._eval, w0.shape[0], partials=self._exact_partials, holomorphic=True)

    def _eval(self, z):
        u = 1.0 - inner(z, self.w0)
        return sum(c * u ** (-p) for p, c in self.terms.items()) + 0 * u

    def _exact_partials(self, z):
        u = 1.0 - inner(z, self.w0)
        g = sum(c * p * u ** (-p - 1) for p, c in self.terms.items()) + 0 * u
        d = g[..., None] * np.conj(self.w0)
        return d, np.zeros_like(d)

    def shift(self, l: float) -> "CauchyKernelField":
        """(l I + R) applied exactly: R u^-p = p (u^-p-1 - u^-p)."""
        out: dict = {}
        for p, c in self.terms.items():
            out[p] = out.get(p, 0) + c * (l - p)
            out[p + 1] = out.get(p + 1, 0) + c * p
        return CauchyKernelField(self.w0, out)


@dataclass(frozen=True)
class ZeroOneForm:
    """Coefficients of dzbar_1..dzbar_n."""

    components: tuple = field(default_factory=tuple)

    def __call__(self, z) -> np.ndarray:
        return np.stack([c(z) for c in self.components], axis=-1)

    def norm(self, z) -> np.ndarray:
        return np.sum(np.abs(self(z)), axis=-1)


def _index(f: SmoothField, j: int) -> None:
    if not 0 <= j < f.n:
        raise IndexError(f"index {j} out of range for n = {f.n}")


def d_holo(f: SmoothField, j: int, z) -> np.ndarray:
    """df/dz_j at z (0-based j)."""
    _index(f, j)
    return f.partials(z)[0][..., j]


def d_tangential(f: SmoothField, i: int, j: int, z) -> np.ndarray:
    """D_ij f = conj(z_j) D_i f - conj(z_i) D_j f for i < j (0-based)."""
    _index(f, i)
    _index(f, j)
    if i >= j:
        raise ValueError("tangential derivative needs i < j")
    z = _pts(z)
    d = f.partials(z)[0]
    return np.conj(z[..., j]) * d[..., i] - np.conj(z[..., i]) * d[..., j]


def radial(f: SmoothField, z) -> np.ndarray:
    """R f = sum_j z_j df/dz_j."""
    z = _pts(z)
    return np.sum(z * f.partials(z)[0], axis=-1)


def _gamma_ratio(l: float, k: int) -> float:
    return float(np.exp(lgamma(l) - lgamma(l + k)))


def radial_lk(f: SmoothField, l: float, k: int, z, n_slice: int = 512) -> np.ndarray:
    """Gamma(l)/Gamma(l+k) ((l+k-1)I + R) ... (l I + R) f at z.

    Exact for polynomials and Cauchy kernel fields.  Other holomorphic fields
    are expanded on the complex line through z, lambda -> f(lambda z), whose
    Taylor coefficients are eigenvectors of R.
    """
    if not l > 0:
        raise ValueError("l must be positive")
    if int(k) != k or k < 0:
        raise ValueError("k must be a nonnegative integer")
    k = int(k)
    z = _pts(z)
    scale = _gamma_ratio(l, k)
    if isinstance(f, PolyHolo):
        out = {}
        for a, c in f.coefficients.items():
            m = sum(a)
            out[a] = c * np.prod([l + j + m for j in range(k)]) * scale
        return PolyHolo(out, f.n)(z)
    if isinstance(f, CauchyKernelField):
        g = f
        for j in range(k):
            g = g.shift(l + j)
        return scale * g(z)
    if not f.holomorphic:
        raise ValueError("radial_lk is implemented for holomorphic fields")
    r = np.sqrt(np.sum(np.abs(z) ** 2, axis=-1))
    rho = np.where(r > 0, 0.5 * (1.0 + 1.0 / np.maximum(r, 1e-300)), 2.0)
    rho = np.minimum(rho, 2.0)
    lam = rho[..., None] * np.exp(2j * np.pi * np.arange(n_slice) / n_slice)
    vals = f(lam[..., None] * z[..., None, :])
    coef = np.fft.fft(vals, axis=-1) / n_slice / rho[..., None] ** np.arange(n_slice)
    m = np.arange(n_slice)
    mult = np.ones(n_slice)
    for j in range(k):
        mult = mult * (l + j + m)
    return scale * np.sum(coef * mult, axis=-1)


def grad_norms(f: SmoothField, z) -> tuple[np.ndarray, np.ndarray]:
    """(|df|, |d_T f|) as sums of moduli of D_j f and D_ij f."""
    z = _pts(z)
    d = f.partials(z)[0]
    full = np.sum(np.abs(d), axis=-1)
    tang = np.zeros(z.shape[:-1])
    for i in range(f.n):
        for j in range(i + 1, f.n):
            tang = tang + np.abs(np.conj(z[..., j]) * d[..., i] - np.conj(z[..., i]) * d[..., j])
    return full, tang


def dbar_fd(f: Callable, z, h: float = DEFAULT_STEP) -> np.ndarray:
    """Central-difference df/dzbar_j at z; z must keep distance > 2h from the sphere."""
    z = _pts(z)
    if np.any(1.0 - np.sqrt(np.sum(np.abs(z) ** 2, axis=-1)) <= 2 * h):
        raise ValueError("point too close to the boundary for the difference step")
    return fd_partials(f, z, h)[1]
