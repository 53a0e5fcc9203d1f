"""Exact linear algebra over a Field on integer-coded numpy arrays."""
from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, DivisionByZero
from .gf import Field


def as_array(m) -> np.ndarray:
    return np.array(m, dtype=np.int64)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def rref(F: Field, m) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form with leftmost-pivot choice; returns (R, pivot columns)."""
    a = as_array(m).copy()
    if a.ndim != 2:
        raise DimensionMismatch("rref expects a matrix")
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        a[r] = F.vmul(F.inv(int(a[r, c])), a[r])
        others = np.nonzero(a[:, c])[0]
        others = others[others != r]
        if others.size:
            factors = a[others, c]
            a[others] = F.vsub(a[others], F.vmul(factors[:, None], a[r][None, :]))
        pivots.append(c)
        r += 1
    return a, pivots


def rank(F: Field, m) -> int:
    m = as_array(m)
    if m.size == 0:
        return 0
    return len(rref(F, m)[1])


def row_basis(F: Field, vectors, n: int | None = None) -> np.ndarray:
    """Canonical (reduced echelon) basis of the span of the given rows."""
    m = as_array(vectors)
    if m.size == 0:
        return np.zeros((0, n or 0), dtype=np.int64)
    r, piv = rref(F, m)
    return r[: len(piv)]


def nullspace(F: Field, m) -> np.ndarray:
    """Basis (as rows) of {x : m @ x = 0}."""
    m = as_array(m)
    cols = m.shape[1]
    r, piv = rref(F, m)
    free = [c for c in range(cols) if c not in piv]
    out = np.zeros((len(free), cols), dtype=np.int64)
    for i, fcol in enumerate(free):
        out[i, fcol] = 1
        for row, pc in enumerate(piv):
            out[i, pc] = F.neg(int(r[row, fcol]))
    return out


def inverse(F: Field, m) -> np.ndarray:
    m = as_array(m)
    n = m.shape[0]
    if m.shape != (n, n):
        raise DimensionMismatch("inverse of a non-square matrix")
    r, piv = rref(F, np.concatenate([m, identity(n)], axis=1))
    if piv[:n] != list(range(n)) or len(piv) < n or piv[n - 1] != n - 1:
        raise DivisionByZero("singular matrix")
    return r[:, n:]


def det(F: Field, m) -> int:
    a = as_array(m).copy()
    n = a.shape[0]
    d = 1
    for c in range(n):
        nz = np.nonzero(a[c:, c])[0]
        if nz.size == 0:
            return 0
        piv = c + int(nz[0])
        if piv != c:
            a[[c, piv]] = a[[piv, c]]
            d = F.neg(d)
        pv = int(a[c, c])
        d = F.mul(d, pv)
        inv = F.inv(pv)
        below = np.arange(c + 1, n)
        if below.size:
            factors = F.vmul(a[below, c], inv)
            a[below] = F.vsub(a[below], F.vmul(factors[:, None], a[c][None, :]))
    return d


def matmul(F: Field, a, b) -> np.ndarray:
    return np.asarray(F.matmul(as_array(a), as_array(b)), dtype=np.int64)


def matvec(F: Field, a, x) -> np.ndarray:
    return np.asarray(F.vdot(as_array(a), as_array(x)[None, :]), dtype=np.int64)


def in_span(F: Field, basis, v) -> bool:
    b = as_array(basis)
    if b.size == 0:
        return not np.any(as_array(v))
    return rank(F, np.vstack([b, as_array(v)[None, :]])) == rank(F, b)
