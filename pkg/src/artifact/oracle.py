"""Brute-force ground truth for small groups.

Matrices over GF(p^k) are linearised to nk x nk matrices over GF(p) through
the regular representation of the field, so the closure kernel only ever
multiplies small integer matrices mod p.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence

import numpy as np

from . import kernels, linalg
from .errors import BudgetExceeded, CapExceeded, TooLarge, UnreachableTrace
from .geom import Form, VectorSpace, form_eval, is_singular
from .gf import Field
from .trans import GroupSpec, Transvection, tv_matrix

DEFAULT_CAP = 2 * 10 ** 6


# ---------------------------------------------------------------------------
# linearisation

def _regular(F: Field) -> np.ndarray:
    """R[a] is the k x k matrix of multiplication by a in the polynomial basis."""
    k = F.k
    out = np.zeros((F.q, k, k), dtype=np.uint8)
    basis = [F.p ** j for j in range(k)]  # x^j
    for a in range(F.q):
        for j, xj in enumerate(basis):
            out[a, :, j] = F.coeffs(F.mul(a, xj))
    return out


_REG_CACHE: dict = {}


def linearize(F: Field, m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.int64)
    if F.k == 1:
        return m.astype(np.uint8)
    reg = _REG_CACHE.get(F)
    if reg is None:
        reg = _REG_CACHE[F] = _regular(F)
    n = m.shape[0]
    k = F.k
    return reg[m].transpose(0, 2, 1, 3).reshape(n * k, n * k)


def delinearize(F: Field, big: np.ndarray, n: int) -> np.ndarray:
    k = F.k
    big = np.asarray(big, dtype=np.int64).reshape(n * k, n * k)
    if k == 1:
        return big
    blocks = big.reshape(n, k, n, k)[:, :, :, 0]  # column 0 of each block = coeffs
    pw = np.array([F.p ** i for i in range(k)], dtype=np.int64)
    return np.einsum("ikj,k->ij", blocks, pw)


def _to_matrix(g) -> np.ndarray:
    if isinstance(g, Transvection):
        return tv_matrix(g)
    return np.asarray(g, dtype=np.int64)


# ---------------------------------------------------------------------------

@dataclass
class ClosureResult:
    field: Field
    n: int
    order: int
    truncated: bool
    elements: np.ndarray = dc_field(repr=False)
    parent: np.ndarray = dc_field(repr=False)
    gen: np.ndarray = dc_field(repr=False)
    depth: np.ndarray = dc_field(repr=False)
    _index: dict | None = dc_field(default=None, repr=False)

    def index_of(self, m: np.ndarray) -> int | None:
        if self._index is None:
            self._index = {row.tobytes(): i for i, row in enumerate(self.elements)}
        key = linearize(self.field, m).astype(np.uint8).reshape(-1).tobytes()
        return self._index.get(key)

    def contains(self, m: np.ndarray) -> bool:
        return self.index_of(m) is not None

    def word(self, i: int) -> list[int]:
        """Generator indices whose product (left to right) is element i."""
        out = []
        while self.parent[i] >= 0:
            out.append(int(self.gen[i]))
            i = int(self.parent[i])
        return out[::-1]

    def matrix(self, i: int) -> np.ndarray:
        d = self.n * self.field.k
        return delinearize(self.field, self.elements[i].reshape(d, d), self.n)

    @property
    def max_depth(self) -> int:
        return int(self.depth.max()) if len(self.depth) else 0


def closure_enumerate(F: Field, gens: Sequence, cap: int = DEFAULT_CAP,
                      allow_truncate: bool = False) -> ClosureResult:
    mats = [_to_matrix(g) for g in gens]
    if not mats:
        raise ValueError("no generators")
    n = mats[0].shape[0]
    lin = np.stack([linearize(F, m) for m in mats]).astype(np.uint8)
    elems, parent, gen, depth, trunc = kernels.bfs_closure(np.ascontiguousarray(lin), F.p, cap)
    if trunc and not allow_truncate:
        raise CapExceeded(f"closure exceeds cap {cap}")
    return ClosureResult(F, n, len(elems), bool(trunc), elems, parent, gen, depth)


def _with_inverses(F: Field, mats: list[np.ndarray]) -> list[np.ndarray]:
    out = list(mats)
    for m in mats:
        inv = linalg.inverse(F, m)
        out.append(inv)
    return out


def cayley_diameter(F: Field, gens: Sequence, cap: int = DEFAULT_CAP) -> int:
    """Exact diameter of the undirected Cayley graph (generators and inverses)."""
    mats = _with_inverses(F, [_to_matrix(g) for g in gens])
    return closure_enumerate(F, mats, cap).max_depth


def _lin_key(F: Field, m: np.ndarray) -> bytes:
    return linearize(F, m).astype(np.uint8).tobytes()


def bidirectional_distance(F: Field, gens: Sequence, target: np.ndarray,
                           cap: int = DEFAULT_CAP) -> int:
    """Word length of target by meet-in-the-middle search (pure Python)."""
    mats = [_to_matrix(g) for g in gens]
    mats = _with_inverses(F, mats)
    n = mats[0].shape[0]
    p = F.p
    lin = [linearize(F, m).astype(np.int64) for m in mats]
    start = np.eye(n * F.k, dtype=np.int64)
    goal = linearize(F, target).astype(np.int64)
    if np.array_equal(start, goal):
        return 0
    fwd = {start.astype(np.uint8).tobytes(): 0}
    bwd = {goal.astype(np.uint8).tobytes(): 0}
    ff, bf = [start], [goal]
    df = db = 0
    visited = 2
    while ff and bf:
        # expand the smaller side; the generating set is inverse-closed
        if len(ff) <= len(bf):
            df += 1
            nxt = []
            for a in ff:
                for g in lin:
                    c = (a @ g) % p
                    key = c.astype(np.uint8).tobytes()
                    if key in bwd:
                        return df + bwd[key]
                    if key not in fwd:
                        fwd[key] = df
                        nxt.append(c)
            ff = nxt
        else:
            db += 1
            nxt = []
            for a in bf:
                for g in lin:
                    c = (a @ g) % p
                    key = c.astype(np.uint8).tobytes()
                    if key in fwd:
                        return db + fwd[key]
                    if key not in bwd:
                        bwd[key] = db
                        nxt.append(c)
            bf = nxt
        visited = len(fwd) + len(bwd)
        if visited > cap:
            raise CapExceeded("bidirectional search exceeded cap")
    raise ValueError("target is not in the generated group")


def cayley_diameter_bidirectional(F: Field, gens: Sequence, cap: int = 10 ** 5) -> int:
    """Diameter recomputed element by element with meet-in-the-middle searches."""
    res = closure_enumerate(F, [_to_matrix(g) for g in gens], cap)
    best = 0
    for i in range(res.order):
        best = max(best, bidirectional_distance(F, gens, res.matrix(i), cap))
    return best


# ---------------------------------------------------------------------------
# block word search

def restrict(F: Field, g: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Matrix of g on span(W) (rows of W form a basis) in that basis; None if not invariant."""
    W = np.asarray(W, dtype=np.int64)
    d = W.shape[0]
    imgs = np.asarray(F.matmul(W, np.asarray(g).T), dtype=np.int64)  # rows g(w_j)
    # solve coords: imgs = C @ W
    R, piv = linalg.rref(F, np.concatenate([W.T, imgs.T], axis=1))
    if any(pc >= d for pc in piv):
        return None
    return np.asarray(R[:d, d:], dtype=np.int64)  # columns: coordinates of g(w_j)


@dataclass
class BlockSearch:
    """Words over block generators (and inverses) for target elements."""
    words: list
    max_length: int
    explored: int


def block_word_search(F: Field, gens: Sequence, targets: Sequence, W=None,
                      budget: int = 10 ** 6) -> BlockSearch:
    """Shortest words over gens and their inverses for each target.

    Words are lists of (generator index, +1 or -1). The search runs on the
    restriction to span(W) (default: the whole space) and every word is
    re-evaluated on the full matrices before being returned.
    """
    mats = [_to_matrix(g) for g in gens]
    tmats = [_to_matrix(t) for t in targets]
    n = mats[0].shape[0]
    if W is None:
        small, tsmall = mats, tmats
    else:
        small = [restrict(F, m, W) for m in mats]
        tsmall = [restrict(F, m, W) for m in tmats]
        if any(x is None for x in small + tsmall):
            raise ValueError("block is not invariant under a generator or target")
    ext = _with_inverses(F, small)
    m = len(small)
    lin = np.stack([linearize(F, x) for x in ext]).astype(np.uint8)
    elems, parent, gen, depth, trunc = kernels.bfs_closure(np.ascontiguousarray(lin), F.p, budget)
    index = {row.tobytes(): i for i, row in enumerate(elems)}

    def path(i):
        w = []
        while parent[i] >= 0:
            gi = int(gen[i])
            w.append((gi % m, 1 if gi < m else -1))
            i = int(parent[i])
        return w[::-1]

    words = []
    for t in tsmall:
        lt = linearize(F, t).astype(np.uint8)
        i = index.get(lt.reshape(-1).tobytes())
        if i is not None:
            words.append(path(i))
            continue
        if not trunc:
            raise ValueError("target not in the block group")
        hit = _meet_in_middle(lt, elems, index, F.p)
        if hit is None:
            raise BudgetExceeded(f"block search exceeded budget {budget}")
        x, z = hit
        # t z = x with z^-1 in the ball, so t = x z^-1
        words.append(path(x) + [(g, -s) for g, s in reversed(path(z))])
    # full-size verification
    invs = [linalg.inverse(F, x) for x in mats]
    for w, t in zip(words, tmats):
        acc = np.eye(n, dtype=np.int64)
        for gi, sg in w:
            acc = linalg.matmul(F, acc, mats[gi] if sg > 0 else invs[gi])
        if not np.array_equal(acc, t):
            raise ValueError("block word does not evaluate to its target on the full space")
    return BlockSearch(words, max((len(w) for w in words), default=0), len(elems))


def _meet_in_middle(target: np.ndarray, elems: np.ndarray, index: dict, p: int,
                    chunk: int = 1 << 15):
    """(x, z) with target @ elems[z] == elems[x], preferring short words.

    The ball is closed under inverses (the generators are), so a hit writes
    the target as a product of two ball elements. Chunks follow BFS order,
    which keeps z short; the first hit in a chunk is taken.
    """
    d = target.shape[0]
    T = target.astype(np.int64)
    for lo in range(0, len(elems), chunk):
        block = elems[lo:lo + chunk].reshape(-1, d, d).astype(np.int64)
        prods = (np.einsum("ij,njk->nik", T, block) % p).astype(np.uint8).reshape(len(block), -1)
        for r in range(len(prods)):
            x = index.get(prods[r].tobytes())
            if x is not None:
                return x, lo + r
    return None


def sl2_word_search(F: Field, block_gens: Sequence, targets: Sequence, W=None,
                    budget: int = 10 ** 6) -> list:
    return block_word_search(F, block_gens, targets, W, budget).words


# ---------------------------------------------------------------------------

def invariant_subspace_search(F: Field, n: int, Y: Sequence) -> bool:
    """True iff no proper nonzero subspace is invariant under every element of Y."""
    if F.q ** n > 10 ** 6:
        raise TooLarge(f"q^n = {F.q ** n} exceeds the enumeration guard")
    mats = [_to_matrix(y) for y in Y]
    S = VectorSpace(F, n)
    for v in S.points():
        basis = linalg.row_basis(F, [v], n)
        while True:
            imgs = [np.asarray(F.matmul(basis, np.asarray(g).T)) for g in mats]
            nb = linalg.row_basis(F, np.vstack([basis] + imgs), n)
            if nb.shape[0] == basis.shape[0]:
                break
            basis = nb
            if basis.shape[0] == n:
                break
        if basis.shape[0] < n:
            return False
    return True


def group_order(spec: GroupSpec) -> int:
    n, q = spec.n, spec.q
    if spec.family == "SL":
        out = q ** (n * (n - 1) // 2)
        for i in range(2, n + 1):
            out *= q ** i - 1
        return out
    if spec.family == "Sp":
        m = n // 2
        out = q ** (m * m)
        for i in range(1, m + 1):
            out *= q ** (2 * i) - 1
        return out
    q0 = spec.q0
    out = q0 ** (n * (n - 1) // 2)
    for i in range(2, n + 1):
        out *= q0 ** i - (-1) ** i
    return out


def _complement_basis(F: Field, form: Form, U: list) -> list:
    """Basis of U-perp for a nondegenerate U (or a coordinate complement without a form)."""
    n = form.space.n
    if form.kind == "none":
        return [form.space.e(i) for i in range(2, n)]
    rows = [np.array([form_eval(form, u, form.space.e(j)) for j in range(n)]) for u in U]
    ns = linalg.nullspace(F, np.array(rows, dtype=np.int64))
    return [tuple(int(x) for x in r) for r in ns]


def _change_of_basis(F: Field, cols: list, action: np.ndarray) -> np.ndarray:
    P = np.array(cols, dtype=np.int64).T
    return linalg.matmul(F, linalg.matmul(F, P, action), linalg.inverse(F, P))


def _hyperbolic_pair(spec: GroupSpec):
    """x, y with f(x,x)=f(y,y)=0 and f(x,y)=1 (first found in point order)."""
    F, f, S = spec.field, spec.form, spec.space
    for x in S.points():
        if not is_singular(f, x):
            continue
        for y in S.points():
            c = form_eval(f, x, y)
            if c and is_singular(f, y):
                return x, S.scale(F.inv(c), y)
    raise ValueError("no hyperbolic pair")


def trace_witness(spec: GroupSpec, lam: int, b: int | None = None) -> np.ndarray:
    """A group element with trace lam, built on a small nondegenerate block."""
    F, S, n = spec.field, spec.space, spec.n
    if spec.family in ("SL", "Sp"):
        if spec.family == "SL":
            x, y = S.e(0), S.e(1)
        else:
            x, y = _hyperbolic_pair(spec)
        rest = _complement_basis(F, spec.form, [x, y])
        # g(x) = y + (lam - n + 2) x, g(y) = -x, identity on the complement
        c = F.sub(lam, F.from_int(n - 2))
        action = np.eye(n, dtype=np.int64)
        action[0, 0], action[1, 0] = c, 1
        action[0, 1], action[1, 1] = F.neg(1), 0
        g = _change_of_basis(F, [x, y] + rest, action)
    else:
        if n < 3:
            raise UnreachableTrace("SU witnesses need n >= 3")
        q0 = F.q0
        gens = [b] if b is not None else [a for a in range(1, F.q) if F.order(a) == F.q - 1]
        target = None
        for bb in gens:
            t = F.add(F.neg(F.pow(bb, q0 - 1)), F.from_int(n - 3))
            if t == lam:
                target = bb
                break
        if target is None:
            raise UnreachableTrace("trace is not of the form -b^(q0-1) + n - 3")
        bb = target
        x, y = _hyperbolic_pair(spec)
        perp = _complement_basis(F, spec.form, [x, y])
        z = next(v for v in VectorSpace(F, len(perp)).points()
                 if form_eval(spec.form, *(2 * [_comb(F, S, v, perp)])) != 0)
        z = _comb(F, S, z, perp)
        nz = form_eval(spec.form, z, z)
        # scale z so that f(z,z) = 1: need N(c) = c^(q0+1) = 1/nz
        c = next(a for a in range(1, F.q) if F.mul(F.pow(a, q0 + 1), nz) == 1)
        z = S.scale(c, z)
        rest = _complement_basis(F, spec.form, [x, y, z])
        action = np.eye(n, dtype=np.int64)
        action[:3, :3] = 0
        action[1, 0] = F.inv(F.pow(bb, q0))     # g(x) = b^-q0 y
        action[0, 1] = bb                       # g(y) = b x
        action[2, 2] = F.neg(F.pow(bb, q0 - 1))  # g(z) = -b^(q0-1) z
        g = _change_of_basis(F, [x, y, z] + rest, action)
    g = np.asarray(g, dtype=np.int64)
    if not spec.contains_matrix(g):
        raise AssertionError("trace witness left the group")
    return g


def _comb(F: Field, S: VectorSpace, coeffs, basis) -> tuple:
    v = S.zero()
    for c, b in zip(coeffs, basis):
        if c:
            v = S.axpy(c, b, v)
    return v


def matrix_trace(F: Field, g: np.ndarray) -> int:
    acc = 0
    for i in range(g.shape[0]):
        acc = F.add(acc, int(g[i, i]))
    return acc


def dickson_generators(F: Field, delta: int) -> list[np.ndarray]:
    """E12(1) and E21(delta) in SL(2, F)."""
    return [np.array([[1, 1], [0, 1]], dtype=np.int64),
            np.array([[1, 0], [delta, 1]], dtype=np.int64)]
