"""Vector spaces over GF(q) carrying a symplectic or hermitian form.

Vectors and covectors are tuples of integer-coded field elements. A covector
phi acts by x -> sum_i phi_i x_i.

Hermitian forms are conjugate-linear in the first argument and linear in the
second: f(u, v) = sigma(u)^T G v with sigma(a) = a^q0. Then f(v, u) = f(u, v)^sigma
holds for a gram matrix satisfying G^T = sigma(G).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch, ParseError
from .gf import Field

Vector = tuple
Covector = tuple


@dataclass(frozen=True)
class VectorSpace:
    field: Field
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be positive")

    def zero(self) -> Vector:
        return (0,) * self.n

    def e(self, i: int, scale: int = 1) -> Vector:
        """Standard basis vector e_i (0-based index)."""
        v = [0] * self.n
        v[i] = scale
        return tuple(v)

    def check(self, v: Sequence[int]) -> Vector:
        if len(v) != self.n:
            raise DimensionMismatch(f"expected length {self.n}, got {len(v)}")
        return tuple(int(x) for x in v)

    def add(self, u: Vector, v: Vector) -> Vector:
        F = self.field
        return tuple(F.add(a, b) for a, b in zip(u, v))

    def sub(self, u: Vector, v: Vector) -> Vector:
        F = self.field
        return tuple(F.sub(a, b) for a, b in zip(u, v))

    def scale(self, lam: int, v: Vector) -> Vector:
        F = self.field
        return tuple(F.mul(lam, a) for a in v)

    def axpy(self, lam: int, x: Vector, y: Vector) -> Vector:
        """lam*x + y."""
        F = self.field
        return tuple(F.add(F.mul(lam, a), b) for a, b in zip(x, y))

    def pair(self, phi: Covector, x: Vector) -> int:
        """phi(x)."""
        F = self.field
        acc = 0
        for a, b in zip(phi, x):
            if a and b:
                acc = F.add(acc, F.mul(a, b))
        return acc

    def conj(self, v: Vector) -> Vector:
        F = self.field
        return tuple(F.frob(a) for a in v)

    def normalize(self, v: Vector) -> tuple[Vector, int]:
        """Scale so that the first nonzero entry is 1; returns (scaled, that entry)."""
        for a in v:
            if a:
                inv = self.field.inv(a)
                return self.scale(inv, v), a
        raise ValueError("zero vector has no normal form")

    def vectors(self) -> Iterator[Vector]:
        return itertools.product(range(self.field.q), repeat=self.n)

    def points(self) -> Iterator[Vector]:
        """Projective points as normalized nonzero vectors, in lexicographic order."""
        q = self.field.q
        for lead in range(self.n):
            for tail in itertools.product(range(q), repeat=self.n - lead - 1):
                yield (0,) * lead + (1,) + tail

    def n_points(self) -> int:
        q = self.field.q
        return (q ** self.n - 1) // (q - 1)

    def random_vector(self, rng: np.random.Generator, nonzero: bool = True) -> Vector:
        while True:
            v = tuple(int(x) for x in rng.integers(0, self.field.q, self.n))
            if not nonzero or any(v):
                return v


@dataclass(frozen=True, eq=False)
class Form:
    """A form on a VectorSpace: kind is 'none', 'symplectic' or 'hermitian'."""
    space: VectorSpace
    kind: str
    gram: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        F, n = self.space.field, self.space.n
        if self.kind not in ("none", "symplectic", "hermitian"):
            raise ValueError(f"unknown form kind {self.kind!r}")
        g = np.asarray(self.gram, dtype=np.int64)
        object.__setattr__(self, "gram", g)
        if self.kind == "none":
            return
        if g.shape != (n, n):
            raise DimensionMismatch("gram has wrong shape")
        if linalg.det(F, g) == 0:
            raise ValueError("gram matrix is singular")
        if self.kind == "symplectic":
            if n % 2:
                raise ValueError("symplectic forms need even dimension")
            if np.any(np.diag(g)) or np.any(F.vadd(g, g.T)):
                raise ValueError("gram is not alternating")
        else:
            if F.q0 == F.q:
                raise ValueError("hermitian forms need a field with q0 = sqrt(q)")
            if np.any(g.T != F.vfrob(g)):
                raise ValueError("gram is not hermitian")
        g.setflags(write=False)

    def __eq__(self, other):
        return (isinstance(other, Form) and self.space == other.space and self.kind == other.kind
                and np.array_equal(self.gram, other.gram))

    def __hash__(self):
        return hash((self.space, self.kind, self.gram.tobytes()))

    @staticmethod
    def none(space: VectorSpace) -> "Form":
        return Form(space, "none", np.zeros((0, 0), dtype=np.int64))

    @staticmethod
    def symplectic(space: VectorSpace) -> "Form":
        """Block diagonal [[0,1],[-1,0]] gram."""
        n, F = space.n, space.field
        g = np.zeros((n, n), dtype=np.int64)
        for i in range(0, n - 1, 2):
            g[i, i + 1] = 1
            g[i + 1, i] = F.neg(1)
        return Form(space, "symplectic", g)

    @staticmethod
    def hermitian(space: VectorSpace) -> "Form":
        """Identity gram."""
        return Form(space, "hermitian", np.eye(space.n, dtype=np.int64))

    @property
    def sesqui(self) -> bool:
        return self.kind == "hermitian"

    def to_json(self) -> dict:
        F = self.space.field
        if self.kind == "none":
            return {"kind": "none", "gram": []}
        return {"kind": self.kind,
                "gram": [[F.coeffs(int(a)) for a in row] for row in self.gram]}

    @staticmethod
    def from_json(space: VectorSpace, obj) -> "Form":
        try:
            kind = obj.get("kind", "none")
            if kind == "none":
                return Form.none(space)
            gram = obj.get("gram")
            if gram is None:
                return Form.symplectic(space) if kind == "symplectic" else Form.hermitian(space)
            F = space.field
            g = [[F.elem_from_json(c) for c in row] for row in gram]
            return Form(space, kind, np.array(g, dtype=np.int64))
        except (AttributeError, TypeError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"bad form: {exc}") from exc


def form_eval(f: Form, u: Vector, v: Vector) -> int:
    """f(u, v); conjugate-linear in u for hermitian forms."""
    S = f.space
    if len(u) != S.n or len(v) != S.n:
        raise DimensionMismatch("vector length does not match the space")
    return S.pair(phi_u(f, u), v)


def phi_u(f: Form, u: Vector) -> Covector:
    """The covector x -> f(u, x)."""
    if f.kind == "none":
        raise ValueError("phi_u needs a form")
    S, F = f.space, f.space.field
    if len(u) != S.n:
        raise DimensionMismatch("vector length does not match the space")
    cu = S.conj(u) if f.sesqui else tuple(u)
    out = []
    for j in range(S.n):
        acc = 0
        for i in range(S.n):
            if cu[i] and f.gram[i, j]:
                acc = F.add(acc, F.mul(cu[i], int(f.gram[i, j])))
        out.append(acc)
    return tuple(out)


def phi_matrix(f: Form) -> np.ndarray:
    """Matrix whose rows are phi_{e_i}; phi_u = sum_i sigma(u_i) row_i."""
    return np.asarray(f.gram, dtype=np.int64)


def is_singular(f: Form, v: Vector) -> bool:
    return form_eval(f, v, v) == 0


def radical(f: Form, basis: Iterable[Vector]) -> list[Vector]:
    """Canonical basis of {v in span : f(v, s) = 0 for all s in span}."""
    S, F = f.space, f.space.field
    b = linalg.row_basis(F, [S.check(v) for v in basis], S.n)
    if b.shape[0] == 0:
        return []
    rows = [tuple(int(x) for x in r) for r in b]
    m = len(rows)
    # M[a][c] = f(b_a, b_c); v = sum c_a b_a is radical iff sum_a sigma(c_a) M[a][c] = 0
    M = np.array([[form_eval(f, ra, rc) for rc in rows] for ra in rows], dtype=np.int64)
    ns = linalg.nullspace(F, M.T)
    out = []
    for sc in ns:
        c = [F.frob(int(x)) for x in sc] if f.sesqui else [int(x) for x in sc]
        v = S.zero()
        for ca, ra in zip(c, rows):
            if ca:
                v = S.axpy(ca, ra, v)
        out.append(v)
    if not out:
        return []
    return [tuple(int(x) for x in r) for r in linalg.row_basis(F, out, S.n)]


def preserves_form(f: Form, g: np.ndarray) -> bool:
    """g^* G g == G with g^* = sigma(g)^T."""
    if f.kind == "none":
        return True
    F = f.space.field
    gc = F.vfrob(g) if f.sesqui else g
    lhs = F.matmul(F.matmul(np.asarray(gc).T, f.gram), g)
    return bool(np.array_equal(np.asarray(lhs), f.gram))


def singular_points(f: Form) -> list[Vector]:
    """All singular projective points (every point for symplectic forms)."""
    return [v for v in f.space.points() if f.kind == "symplectic" or is_singular(f, v)]
