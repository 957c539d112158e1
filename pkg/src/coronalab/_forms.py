"""A small exterior algebra with array-valued coefficients.

A form is a dict mapping a strictly increasing tuple of generator indices to
a coefficient (scalar or ndarray; all coefficients of a form broadcast
together).  Which integer stands for which differential is up to the caller.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np


def perm_sign(seq) -> int:
    """Sign of the permutation sorting ``seq``; 0 if an entry repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    # count inversions; sequences here are short
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def add(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out[k] + v if k in out else v
    return out


def scale(a: dict, c) -> dict:
    return {k: c * v for k, v in a.items()}


def wedge(a: dict, b: dict) -> dict:
    out: dict = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            s = perm_sign(ka + kb)
            if s == 0:
                continue
            key = tuple(sorted(ka + kb))
            term = va * vb if s > 0 else -(va * vb)
            out[key] = out[key] + term if key in out else term
    return out


def power(a: dict, m: int) -> dict:
    out = {(): 1.0}
    for _ in range(m):
        out = wedge(out, a)
    return out


def interior(gen: int, a: dict) -> dict:
    """Contraction with the dual of generator ``gen`` (an antiderivation)."""
    out: dict = {}
    for k, v in a.items():
        if gen in k:
            pos = k.index(gen)
            key = k[:pos] + k[pos + 1:]
            term = v if pos % 2 == 0 else -v
            out[key] = out[key] + term if key in out else term
    return out


def multi_indices(n: int, q: int, offset: int = 0) -> list[tuple[int, ...]]:
    """Increasing q-tuples from offset, ..., offset + n - 1 in lexicographic order."""
    return [tuple(offset + i for i in c) for c in combinations(range(n), q)]


def det(mat: np.ndarray) -> np.ndarray:
    """Leibniz determinant over the last two axes (works for object/complex arrays)."""
    from itertools import permutations

    m = mat.shape[-1]
    total = 0
    for p in permutations(range(m)):
        term = perm_sign(p)
        for i, j in enumerate(p):
            term = term * mat[..., i, j]
        total = total + term
    return total
