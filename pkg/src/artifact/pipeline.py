"""Word synthesis: from a generating set to explicit words for every transvection.

A :class:`GenSet` starts from the input generators and only ever grows. Each
new transvection is recorded with a derivation over earlier members, so its
word over the original generators and its length over any earlier snapshot
are both exact. The stages below establish the properties

* (P6) every pair of transvections outside an edge has a common neighbour in X,
* (P7) the two-way diameter of every superset of X is at most 6,
* (P8) X is closed under t -> t^lam for lam in the base field M,

and then produce every transvection (and any group element) as a word.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .errors import (BudgetExceeded, CapExceeded, CaseAnalysisExhausted, ExceptionalField,
                     HypothesisUnmet, NoTransvectionInX, NotInGroup, NotSingular, UnsupportedQ,
                     WrongFamily)
from .geom import Form, VectorSpace, form_eval, is_singular, phi_u, radical, singular_points
from .gf import Field, Subfield, subfield_generated_int
from .graph import (TransvectionGraph, bfs_path, build_graph, distance_matrix, find_cycle,
                    graph_metrics, L_k, parts)
from .trans import (GroupSpec, Transvection, _raw, tv_conjugate, tv_conjugate_by_matrix,
                    tv_make, tv_matrix, tv_power)

DEFAULT_BUDGET = 10 ** 6
SMALL_BLOCK_BUDGET = 10 ** 5


# ---------------------------------------------------------------------------
# words

class Word:
    """Product of original generators; letter (i, +1) is X[i], (i, -1) its inverse.

    Letters are packed as 2*i + (sign < 0) in an int32 array, which keeps
    sweeps over hundreds of thousands of words affordable.
    """
    __slots__ = ("code",)

    def __init__(self, letters: Iterable = (), _code: np.ndarray | None = None):
        if _code is not None:
            self.code = _code
        else:
            self.code = np.array([2 * int(g) + (1 if s < 0 else 0) for g, s in letters],
                                 dtype=np.int32)

    @staticmethod
    def gen(i: int, sign: int = 1) -> "Word":
        return Word(_code=np.array([2 * i + (1 if sign < 0 else 0)], dtype=np.int32))

    @property
    def letters(self) -> tuple:
        return tuple((int(c) >> 1, -1 if c & 1 else 1) for c in self.code)

    def __len__(self) -> int:
        return len(self.code)

    def inverse(self) -> "Word":
        return Word(_code=(self.code[::-1] ^ 1).astype(np.int32))

    def __add__(self, other: "Word") -> "Word":
        a, b = self.code, other.code
        i, j = len(a), 0
        while i > 0 and j < len(b) and a[i - 1] == (b[j] ^ 1):
            i -= 1
            j += 1
        return Word(_code=np.concatenate([a[:i], b[j:]]).astype(np.int32))

    def __pow__(self, m: int) -> "Word":
        base = self if m >= 0 else self.inverse()
        out = Word()
        for _ in range(abs(m)):
            out = out + base
        return out

    def __eq__(self, other):
        return isinstance(other, Word) and np.array_equal(self.code, other.code)

    def __hash__(self):
        return hash(self.code.tobytes())

    def __repr__(self):
        return f"Word({list(self.letters)})"

    def to_json(self) -> list:
        return [[g, s] for g, s in self.letters]

    @staticmethod
    def from_json(obj) -> "Word":
        return Word([(int(g), int(s)) for g, s in obj])

    def evaluate(self, F: Field, mats: Sequence[np.ndarray], invs: Sequence[np.ndarray]) -> np.ndarray:
        n = mats[0].shape[0]
        acc = np.eye(n, dtype=np.int64)
        for c in self.code:
            g = int(c) >> 1
            acc = np.asarray(F.matmul(acc, invs[g] if c & 1 else mats[g]), dtype=np.int64)
        return acc


def _compose(words: Sequence[Word], letters: Sequence[tuple]) -> Word:
    out = Word()
    for i, s in letters:
        out = out + (words[i] if s > 0 else words[i].inverse())
    return out


# ---------------------------------------------------------------------------
# generating sets

@dataclass
class SynthesisReport:
    stages: list = dc_field(default_factory=list)
    max_length: int = 0
    transvection_count: int = 0
    counters: dict = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        return {"stages": self.stages, "max_length": self.max_length,
                "transvection_count": self.transvection_count, "counters": self.counters}


class GenSet:
    """Transvections with words over the original generators X.

    ``deriv[i]`` lists (member index, sign) letters whose product is member i;
    it is None for members taken straight from the input.
    """

    def __init__(self, space: VectorSpace, originals: Sequence[np.ndarray],
                 spec: GroupSpec | None = None, verify: bool = True,
                 budget: int = DEFAULT_BUDGET):
        self.space = space
        self.field: Field = space.field
        self.spec = spec
        self.originals = [np.asarray(m, dtype=np.int64) for m in originals]
        self._invs = [linalg.inverse(self.field, m) for m in self.originals]
        self.elems: list[Transvection] = []
        self.words: list[Word] = []
        self.deriv: list = []
        self.index: dict[Transvection, int] = {}
        self.flags: set[str] = set()
        self.log: list[dict] = []
        self.meta: dict = {}
        self.verify = verify
        self.budget = budget
        self.counters = {"verified": 0, "block_searches": 0, "block_states": 0}
        self._local: dict[int, dict] = {}

    # -- construction ---------------------------------------------------------------
    @classmethod
    def from_transvections(cls, X: Sequence[Transvection], spec: GroupSpec | None = None,
                           verify: bool = True, budget: int = DEFAULT_BUDGET) -> "GenSet":
        X = list(X)
        if not X:
            raise HypothesisUnmet("empty generating set")
        gs = cls(X[0].space, [tv_matrix(t) for t in X], spec, verify, budget)
        for i, t in enumerate(X):
            if t not in gs.index:
                gs._append(t, Word.gen(i), None)
        gs.flags.add("P1")
        return gs

    @property
    def family(self) -> str | None:
        return None if self.spec is None else self.spec.family

    def __len__(self) -> int:
        return len(self.elems)

    def transvections(self) -> list[Transvection]:
        return list(self.elems)

    def _append(self, t: Transvection, word: Word, deriv) -> int:
        if self.verify:
            m = word.evaluate(self.field, self.originals, self._invs)
            if not np.array_equal(m, tv_matrix(t)):
                raise RuntimeError(f"word for {t} does not evaluate to it")
            self.counters["verified"] += 1
        i = len(self.elems)
        self.elems.append(t)
        self.words.append(word)
        self.deriv.append(deriv)
        self.index[t] = i
        return i

    def add(self, t: Transvection, letters: Sequence[tuple]) -> int:
        """Add t = product of members (idx, sign); existing members are kept."""
        if t in self.index:
            return self.index[t]
        letters = tuple((int(i), int(s)) for i, s in letters)
        return self._append(t, _compose(self.words, letters), letters)

    def add_conjugate(self, i: int, j: int, inverse: bool = False) -> int:
        """Member j i j^-1 (or j^-1 i j)."""
        ti, tj = self.elems[i], self.elems[j]
        if inverse:
            tj_inv = tv_power(tj, self.field.neg(1))
            return self.add(tv_conjugate(ti, tj_inv), [(j, -1), (i, 1), (j, 1)])
        return self.add(tv_conjugate(ti, tj), [(j, 1), (i, 1), (j, -1)])

    def find(self, t: Transvection) -> int | None:
        return self.index.get(t)

    # -- lengths ---------------------------------------------------------------------
    def length(self, i: int) -> int:
        return len(self.words[i])

    def local_length(self, i: int, base: int) -> int:
        """Length of member i over the first ``base`` members, by inlining derivations."""
        memo = self._local.setdefault(base, {})
        if i < base:
            return 1
        if i in memo:
            return memo[i]
        stack = [i]
        while stack:
            j = stack[-1]
            if j in memo:
                stack.pop()
                continue
            d = self.deriv[j]
            if d is None:
                memo[j] = 1
                stack.pop()
                continue
            pending = [k for k, _ in d if k >= base and k not in memo]
            if pending:
                stack.extend(pending)
                continue
            memo[j] = sum(1 if k < base else memo[k] for k, _ in d)
            stack.pop()
        return memo[i]

    # -- stages ------------------------------------------------------------------------
    def begin(self, name: str) -> int:
        return len(self.elems)

    def end(self, name: str, base: int, **extra) -> dict:
        added = range(base, len(self.elems))
        rec = {"stage": name, "added": len(added),
               "max_length": max((self.length(i) for i in added), default=0),
               "max_local_length": max((self.local_length(i, base) for i in added), default=0)}
        rec.update(extra)
        self.log.append(rec)
        return rec

    def report(self) -> SynthesisReport:
        return SynthesisReport(list(self.log), max((len(w) for w in self.words), default=0),
                               len(self.elems), dict(self.counters))

    # -- scalars ---------------------------------------------------------------------
    def class_key(self, t: Transvection) -> tuple:
        phat, _ = self.space.normalize(t.phi)
        return (t.u, phat)

    def scalar(self, t: Transvection) -> int:
        """lam with phi = lam * (normalized phi)."""
        _, lead = self.space.normalize(t.phi)
        return self.field.inv(lead)

    def power_index(self, i: int, lam: int) -> int | None:
        return self.index.get(tv_power(self.elems[i], lam))

    def is_closed(self, i: int, K: Subfield) -> bool:
        t = self.elems[i]
        return all(tv_power(t, lam) in self.index for lam in K.nonzero())

    def evaluate(self, word: Word) -> np.ndarray:
        return word.evaluate(self.field, self.originals, self._invs)


def _check_supported(gs: GenSet):
    if gs.spec is not None and gs.spec.excluded:
        raise UnsupportedQ(f"the synthesis pipeline excludes {gs.spec.name()}",
                           group=gs.spec.name())


def _graph(gs: GenSet) -> TransvectionGraph:
    return build_graph(gs.elems)


# ---------------------------------------------------------------------------
# seeding from arbitrary generators

def _as_transvection(space: VectorSpace, g: np.ndarray) -> Transvection | None:
    F = space.field
    n = space.n
    A = np.asarray(F.vsub(np.asarray(g, dtype=np.int64), np.eye(n, dtype=np.int64)), dtype=np.int64)
    if not A.any() or linalg.rank(F, A) != 1:
        return None
    if np.asarray(F.matmul(A, A)).any():
        return None
    j = int(np.nonzero(A.any(axis=0))[0][0])
    u = tuple(int(x) for x in A[:, j])
    r = next(i for i, x in enumerate(u) if x)
    phi = tuple(F.div(int(x), u[r]) for x in A[r, :])
    return tv_make(space, u, phi)


def seed_conjugate_class(X: Sequence, spec: GroupSpec, cap: int = 2 * 10 ** 5,
                         verify: bool = True, budget: int = DEFAULT_BUDGET) -> GenSet:
    """Transvection generating set built from conjugates of one transvection of X."""
    from .oracle import closure_enumerate, group_order
    S, F = spec.space, spec.field
    mats = [tv_matrix(x) if isinstance(x, Transvection) else np.asarray(x, dtype=np.int64)
            for x in X]
    if not mats:
        raise NoTransvectionInX("empty generating set")
    tvs = [x if isinstance(x, Transvection) else _as_transvection(S, m) for x, m in zip(X, mats)]
    gs = GenSet(S, mats, spec, verify, budget)
    for i, t in enumerate(tvs):
        if t is not None and t not in gs.index:
            gs._append(t, Word.gen(i), None)
    if all(t is not None for t in tvs):
        gs.flags.add("P1")
        gs.meta["seed_rounds"] = 0
        return gs
    if not gs.elems:
        raise NoTransvectionInX("X contains no transvection")
    base = gs.begin("seed_conjugate_class")
    m_max = max(1, math.ceil(math.log2(group_order(spec))))
    conj = [(i, m, linalg.inverse(F, m)) for i, (m, t) in enumerate(zip(mats, tvs)) if t is None]
    t0 = 0  # the seed transvection is the first one found in X
    level = [t0]
    prev_order = None
    rounds = 0
    for rounds in range(1, m_max + 1):
        nxt = []
        for j in level:
            t = gs.elems[j]
            for gi, g, ginv in conj:
                s = tv_conjugate_by_matrix(t, g, ginv)
                if s in gs.index:
                    continue
                word = Word.gen(gi) + gs.words[j] + Word.gen(gi, -1)
                k = gs._append(s, word, None)
                nxt.append(k)
        if not nxt:
            break
        level = nxt
        res = closure_enumerate(F, gs.elems, cap, allow_truncate=True)
        if not res.truncated:
            if prev_order == res.order:
                break
            prev_order = res.order
    gs.meta["seed_rounds"] = rounds
    gs.flags.add("P1")
    gs.end("seed_conjugate_class", base, rounds=rounds)
    return gs


# ---------------------------------------------------------------------------
# (P6) diameter two

def _universe(gs: GenSet) -> tuple[np.ndarray, np.ndarray]:
    """Points u_s and normalized covectors phi_t ranging over all transvections."""
    S = gs.space
    fam = gs.family
    if fam in (None, "SL"):
        pts = list(S.points())
        return np.array(pts, dtype=np.int64), np.array(pts, dtype=np.int64)
    form = gs.spec.form
    pts = singular_points(form) if fam == "SU" else list(S.points())
    hyps = [S.normalize(phi_u(form, w))[0] for w in pts]
    return np.array(pts, dtype=np.int64), np.array(hyps, dtype=np.int64)


def _nonzero_pairing(F: Field, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """(A @ B^T != 0) over the field; A rows covectors or vectors, B the other."""
    if len(A) == 0 or len(B) == 0:
        return np.zeros((len(A), len(B)), dtype=bool)
    return np.asarray(F.matmul(A, B.T)) != 0


def _coverage(gs: GenSet, P: np.ndarray, H: np.ndarray, members: Sequence[int]):
    """Boolean (hyperplane, point) matrix: some member r has [s, r] and [r, t]."""
    F = gs.field
    U = np.array([gs.elems[i].u for i in members], dtype=np.int64)
    Phi = np.array([gs.elems[i].phi for i in members], dtype=np.int64)
    A = _nonzero_pairing(F, P, Phi)   # phi_r(u)
    B = _nonzero_pairing(F, H, U)     # psi(u_r)
    C = (B.astype(np.float32) @ A.T.astype(np.float32)) > 0
    return C, A, B


def audit_diameter2(gs: GenSet) -> bool:
    """Every non-adjacent pair of transvections has a common neighbour in gs."""
    P, H = _universe(gs)
    Z = ~_nonzero_pairing(gs.field, H, P)
    C, _, _ = _coverage(gs, P, H, range(len(gs)))
    return bool((C | ~Z).all())


def _require_P2(gs: GenSet):
    pr = parts(gs.elems)
    n = gs.space.n
    if pr["V_span_dim"] < n or pr["Vstar_span_dim"] < n:
        raise HypothesisUnmet("the transvection parts do not span V and V*")
    if not graph_metrics(_graph(gs))["strongly_connected"]:
        raise HypothesisUnmet("the transvection graph is not strongly connected")
    gs.flags.add("P2")


def _conjugate_chain(gs: GenSet, path: Sequence[int]) -> tuple[Transvection, list]:
    """r_k ... r_2 r_1 r_2^-1 ... r_k^-1 and its letters."""
    t = gs.elems[path[0]]
    for r in path[1:]:
        t = tv_conjugate(t, gs.elems[r])
    tail = list(path[1:])
    letters = [(r, 1) for r in reversed(tail)] + [(path[0], 1)] + [(r, -1) for r in tail]
    return t, letters


def extend_diameter2(gs: GenSet) -> GenSet:
    """Add conjugates until every non-edge of the full graph has a neighbour in X."""
    _check_supported(gs)
    _require_P2(gs)
    base = gs.begin("extend_diameter2")
    F = gs.field
    P, H = _universe(gs)
    Z = ~_nonzero_pairing(F, H, P)
    entry = list(range(len(gs)))
    C, A, B = _coverage(gs, P, H, entry)
    adj = _graph(gs).adj
    open_ = Z & ~C
    while open_.any():
        h, p = (int(x) for x in np.argwhere(open_)[0])
        src = np.nonzero(A[p])[0]
        dst = np.nonzero(B[h])[0]
        path = bfs_path(adj, src, dst)
        if path is None:
            raise HypothesisUnmet("no path joins the required neighbours")
        t, letters = _conjugate_chain(gs, path)
        gs.add(t, letters)
        a = _nonzero_pairing(F, P, np.array([t.phi]))[:, 0]
        b = _nonzero_pairing(F, H, np.array([t.u]))[:, 0]
        if not (b[h] and a[p]):
            raise RuntimeError("conjugate chain failed to cover its pair")
        open_ &= ~np.outer(b, a)
    if not audit_diameter2(gs):
        raise RuntimeError("diameter audit failed after extend_diameter2")
    gs.flags.add("P6")
    gs.end("extend_diameter2", base)
    return gs


# ---------------------------------------------------------------------------
# (P7) two-way diameter six

def _twoway(S: VectorSpace, a: Transvection, b: Transvection) -> bool:
    return S.pair(b.phi, a.u) != 0 and S.pair(a.phi, b.u) != 0


def audit_twoway6(gs: GenSet) -> bool:
    """Two-way distance at most 6 between any two transvections, through gs."""
    F = gs.field
    P, H = _universe(gs)
    Z = ~_nonzero_pairing(F, H, P)
    hs, ps = np.nonzero(Z)
    m = len(gs)
    U = np.array([t.u for t in gs.elems], dtype=np.int64)
    Phi = np.array([t.phi for t in gs.elems], dtype=np.int64)
    A = _nonzero_pairing(F, P, Phi)
    B = _nonzero_pairing(F, H, U)
    N = A[ps] & B[hs]                       # flag -> two-way neighbours in gs
    if not N.any(axis=1).all():
        return False
    D = distance_matrix(_graph(gs).twoway)
    close = (D >= 0) & (D <= 4)
    core = gs.meta.get("twoway_core")
    if core is not None:
        core = np.array(core)
        if N[:, core].any(axis=1).all() and close[np.ix_(core, core)].all():
            return True
    # exact check: flags s, t with neighbours a ~ s, b ~ t and d(a, b) <= 4
    reach = (N.astype(np.float32) @ close.astype(np.float32)) > 0
    Nf = N.astype(np.float32).T
    for lo in range(0, len(reach), 2048):
        if not ((reach[lo:lo + 2048].astype(np.float32) @ Nf) > 0).all():
            return False
    return True


def extend_twoway6(gs: GenSet) -> GenSet:
    """Add conjugates so that any two transvections are joined by a short two-way path."""
    _check_supported(gs)
    if "P6" not in gs.flags:
        raise HypothesisUnmet("extend_twoway6 needs the diameter-two property")
    base = gs.begin("extend_twoway6")
    if gs.family in ("Sp", "SU"):
        gs.meta["twoway_core"] = list(range(len(gs)))
        if not audit_twoway6(gs):
            raise HypothesisUnmet("two-way audit failed for a form-preserving set")
        gs.flags.add("P7")
        gs.end("extend_twoway6", base)
        return gs
    S, F = gs.space, gs.field
    P, H = _universe(gs)
    Z = ~_nonzero_pairing(F, H, P)
    # step 1: a two-way neighbour in X for every transvection
    entry = list(range(len(gs)))
    C, A, B = _coverage(gs, P, H, entry)
    adj = _graph(gs).adj
    open_ = Z & ~C
    while open_.any():
        h, p = (int(x) for x in np.argwhere(open_)[0])
        u, phi = tuple(int(x) for x in P[p]), tuple(int(x) for x in H[h])
        s = Transvection(S, u, phi)
        done = False
        for r in np.nonzero(A[p])[0]:
            for t in np.nonzero(adj[r])[0]:
                if S.pair(phi, gs.elems[t].u) == 0:
                    continue
                cand = tv_conjugate(gs.elems[r], gs.elems[t])
                if _twoway(S, s, cand):
                    k = gs.add(cand, [(int(t), 1), (int(r), 1), (int(t), -1)])
                    a = _nonzero_pairing(F, P, np.array([cand.phi]))[:, 0]
                    b = _nonzero_pairing(F, H, np.array([cand.u]))[:, 0]
                    open_ &= ~np.outer(b, a)
                    done = True
                    break
            if done:
                break
        if not done:
            raise HypothesisUnmet("no two-way neighbour could be constructed")
    core = list(range(len(gs)))
    gs.meta["twoway_core"] = core
    # step 2: every one-way edge of X1 bridged by a two-way path of length 2
    g = _graph(gs)
    oneway = np.argwhere(g.adj & ~g.adj.T)
    tw = {i: set(np.nonzero(g.twoway[i])[0].tolist()) for i in core}

    def add_tw(k):
        t = gs.elems[k]
        for i in core:
            if _twoway(S, t, gs.elems[i]):
                tw[i].add(k)

    for r1, r2 in oneway:
        r1, r2 = int(r1), int(r2)
        if tw[r1] & tw[r2]:
            continue
        e1, e2 = gs.elems[r1], gs.elems[r2]
        found = None
        for t in np.nonzero(g.adj[r2] & g.adj[:, r1])[0]:
            t = int(t)
            if t in (r1, r2):
                continue
            for cand, letters in _twoway_candidates(gs, r1, r2, t):
                if _twoway(S, cand, e1) and _twoway(S, cand, e2):
                    found = (cand, letters)
                    break
            if found:
                break
        if found is None:
            raise HypothesisUnmet("one-way edge could not be bridged")
        k = gs.add(*found)
        add_tw(k)
    if not audit_twoway6(gs):
        raise RuntimeError("two-way audit failed after extend_twoway6")
    gs.flags.add("P7")
    gs.end("extend_twoway6", base)
    return gs


def _twoway_candidates(gs: GenSet, r1: int, r2: int, t: int):
    """t and its conjugates by r1, r2 in the orders used for bridging one-way edges."""
    E = gs.elems
    yield E[t], [(t, 1)]
    c1 = tv_conjugate(E[t], E[r1])
    l1 = [(r1, 1), (t, 1), (r1, -1)]
    yield c1, l1
    c2 = tv_conjugate(E[t], E[r2])
    l2 = [(r2, 1), (t, 1), (r2, -1)]
    yield c2, l2
    yield tv_conjugate(c1, E[r2]), [(r2, 1)] + l1 + [(r2, -1)]
    yield tv_conjugate(c2, E[r1]), [(r1, 1)] + l2 + [(r1, -1)]


# ---------------------------------------------------------------------------
# field of 2- and 3-cycles

def _tuple_weight(S: VectorSpace, ts: Sequence[Transvection]) -> int:
    F = S.field
    acc = 1
    k = len(ts)
    for i in range(k):
        lab = S.pair(ts[(i + 1) % k].phi, ts[i].u)
        if lab == 0:
            return 0
        acc = F.mul(acc, lab)
    return acc


def boost_L3(gs: GenSet) -> GenSet:
    """Shorten cycles until 3-cycles generate F_q and [F_q : L_2] <= 2."""
    _check_supported(gs)
    base = gs.begin("boost_L3")
    F, S = gs.field, gs.space
    g = _graph(gs)
    if not L_k(g, 5).is_full():
        raise HypothesisUnmet("cycles of length at most 5 do not generate the field")
    gs.flags.add("P3")
    while True:
        L3 = L_k(g, 3)
        if L3.is_full():
            break
        k = 4 if L_k(g, 4) != L3 else 5
        prev = L_k(g, k - 1)
        cyc = find_cycle(g, k, lambda w: not prev.contains(w))
        if cyc is None or len(cyc) != k:
            raise HypothesisUnmet("no cycle carries the missing weight")
        added = False
        for rot in range(k):
            r = list(cyc[rot:] + cyc[:rot])
            for inverse in (False, True):
                tk = gs.elems[r[-1]]
                if inverse:
                    tk = tv_power(tk, F.neg(1))
                new = tv_conjugate(gs.elems[r[-2]], tk)
                w = _tuple_weight(S, [gs.elems[i] for i in r[:-2]] + [new])
                if w and not prev.contains(w):
                    gs.add_conjugate(r[-2], r[-1], inverse)
                    added = True
                    break
            if added:
                break
        if not added:
            raise HypothesisUnmet("cycle shortening failed")
        g = _graph(gs)
    while True:
        L2 = L_k(g, 2)
        if L2.index_in_full() <= 2:
            break
        Q = F.subfield(2 * L2.divisor) if F.k % (2 * L2.divisor) == 0 else L2
        cyc = find_cycle(g, 3, lambda w: not Q.contains(w))
        if cyc is None:
            raise HypothesisUnmet("no triangle lies outside the quadratic extension of L2")
        grew = False
        for rot in range(3):
            r = list(cyc[rot:] + cyc[:rot])
            k = gs.add_conjugate(r[1], r[2])
            g = _graph(gs)
            if L2 < L_k(g, 2):
                grew = True
                break
        if not grew:
            raise HypothesisUnmet("triangle conjugation did not enlarge L2")
    gs.end("boost_L3", base, L2=repr(L_k(g, 2)), L3=repr(L_k(g, 3)))
    return gs


def fix_L2_sympunit(gs: GenSet) -> GenSet:
    """Make the 2-cycle weights generate F_q (Sp) or check they give F_q0 (SU)."""
    _check_supported(gs)
    if gs.family not in ("Sp", "SU"):
        raise WrongFamily("fix_L2_sympunit applies to Sp and SU only")
    base = gs.begin("fix_L2_sympunit")
    F, S = gs.field, gs.space
    g = _graph(gs)
    L2 = L_k(g, 2)
    if not L_k(g, 3).is_full() or L2.index_in_full() > 2:
        raise HypothesisUnmet("fix_L2_sympunit needs L3 = F_q and [F_q : L2] <= 2")
    if gs.family == "SU":
        if L2.size < F.q0:
            raise HypothesisUnmet(f"L2 = {L2} is smaller than GF({F.q0})")
        gs.end("fix_L2_sympunit", base, L2=repr(L2))
        return gs
    while not L2.is_full():
        cyc = find_cycle(g, 3, lambda w: not L2.contains(w))
        if cyc is None:
            raise HypothesisUnmet("no triangle outside L2")
        done = False
        for rot in range(3):
            r1, r2, r3 = cyc[rot:] + cyc[:rot]
            new = tv_conjugate(gs.elems[r2], gs.elems[r3])
            w = _tuple_weight(S, [gs.elems[r1], new])
            if w and not L2.contains(w):
                gs.add_conjugate(r2, r3)
                done = True
                break
        if not done:
            raise HypothesisUnmet("symplectic 2-cycle construction failed")
        g = _graph(gs)
        L2 = L_k(g, 2)
    gs.end("fix_L2_sympunit", base, L2=repr(L2))
    return gs


# ---------------------------------------------------------------------------
# (P8) closure over M

def base_field_M(gs: GenSet) -> Subfield:
    """F_q0 for Sp and SU; for SL the square-root field when q is a square."""
    F = gs.field
    if gs.family == "SU":
        return F.subfield_q0()
    if gs.family == "SL" and F.k % 2 == 0:
        return F.subfield(F.k // 2)
    return F.full()


def audit_closed(gs: GenSet, K: Subfield) -> bool:
    return all(gs.is_closed(i, K) for i in range(len(gs)))


def _signed(p: int, lam: int) -> int:
    return lam if lam <= p // 2 else lam - p


def _block(gs: GenSet, gens: Sequence[int], targets: Sequence[Transvection],
           W: np.ndarray | None, budget: int | None = None) -> list[int]:
    """Add targets as words over members ``gens`` via BFS in the block acting on W."""
    from .oracle import block_word_search
    todo = [t for t in targets if t not in gs.index]
    if todo:
        try:
            res = block_word_search(gs.field, [gs.elems[i] for i in gens], todo, W,
                                    budget or gs.budget)
        except ValueError as exc:
            raise HypothesisUnmet(f"block search failed: {exc}") from exc
        gs.counters["block_searches"] += 1
        gs.counters["block_states"] += res.explored
        for t, w in zip(todo, res.words):
            gs.add(t, [(gens[g], s) for g, s in w])
    return [gs.index[t] for t in targets]


def _prime_close(gs: GenSet, members: Iterable[int]):
    p = gs.field.p
    for i in list(members):
        t = gs.elems[i]
        for lam in range(2, p):
            m = _signed(p, lam)
            gs.add(tv_power(t, lam), [(i, 1 if m > 0 else -1)] * abs(m))


def close_over_M(gs: GenSet, L: Subfield | None = None) -> GenSet:
    """Add t^lam for every member t and lam in L (default L = L_2 of the graph)."""
    _check_supported(gs)
    base = gs.begin("close_over_M")
    F, S = gs.field, gs.space
    g = _graph(gs)
    if L is None:
        L = L_k(g, 2)
        M = base_field_M(gs) if gs.family is not None else L
        if not M <= L:
            raise HypothesisUnmet(f"L2 = {L} does not contain M = {M}")
    if L.size == 9:
        raise ExceptionalField("the closure field is GF(9)")
    _prime_close(gs, range(base))
    K = F.prime_subfield()
    # start from the largest subfield over which some member is already closed
    for d in sorted((d for d in range(1, F.k + 1) if L.divisor % d == 0), reverse=True):
        Kd = F.subfield(d)
        if d > 1 and any(gs.is_closed(i, Kd) for i in range(len(gs))):
            K = Kd
            break
    while True:
        _propagate(gs, K)
        if K == L:
            break
        K = _chain_step(gs, K, L)
    if not audit_closed(gs, L):
        raise RuntimeError("closure audit failed")
    gs.flags.add("P8")
    gs.meta["closed_over"] = L.divisor
    gs.end("close_over_M", base, field=repr(L))
    return gs


def _propagate(gs: GenSet, K: Subfield):
    """Spread K-closure along two-way edges with SL(2) blocks."""
    F, S = gs.field, gs.space
    if K.divisor == 1:
        _prime_close(gs, range(len(gs)))
        return
    Kn = K.nonzero()
    while True:
        open_ = [i for i in range(len(gs)) if not gs.is_closed(i, K)]
        if not open_:
            return
        closed = [i for i in range(len(gs)) if gs.is_closed(i, K)]
        if not closed:
            raise HypothesisUnmet("no member is closed over the current field")
        U = np.array([gs.elems[i].u for i in closed], dtype=np.int64)
        Phi = np.array([gs.elems[i].phi for i in closed], dtype=np.int64)
        progress = False
        for t in open_:
            if gs.is_closed(t, K):
                continue
            et = gs.elems[t]
            a = np.asarray(F.matmul(U, np.array(et.phi)[:, None]))[:, 0]
            b = np.asarray(F.matmul(Phi, np.array(et.u)[:, None]))[:, 0]
            for j in np.nonzero((a != 0) & (b != 0))[0]:
                s = closed[int(j)]
                es = gs.elems[s]
                w = F.mul(int(a[j]), int(b[j]))
                Kp = subfield_generated_int(F, [w]).join(K)
                if Kp.size == 9 and K.size != 9:
                    continue
                gens = [gs.index[tv_power(es, lam)] for lam in Kn] + [t]
                W = np.array([es.u, et.u], dtype=np.int64)
                _block(gs, gens, [tv_power(et, lam) for lam in Kn], W)
                progress = True
                break
        if not progress:
            raise HypothesisUnmet("closure cannot be propagated along two-way edges")


def _chain_step(gs: GenSet, K: Subfield, L: Subfield) -> Subfield:
    """Use a 2-cycle whose weight lies outside K to close one member over a larger field."""
    F = gs.field
    g = _graph(gs)
    best = None
    for s, t in np.argwhere(g.twoway):
        s, t = int(s), int(t)
        w = F.mul(g.label(s, t), g.label(t, s))
        Kp = subfield_generated_int(F, [w]).join(K)
        if K < Kp and Kp <= L and not (Kp.size == 9 and K.size != 9):
            if best is None or best[0].divisor < Kp.divisor:
                best = (Kp, s, t)
                if Kp == L:
                    break
    if best is None:
        raise HypothesisUnmet(f"no 2-cycle enlarges {K} inside {L}")
    Kp, s, t = best
    es, et = gs.elems[s], gs.elems[t]
    gens = [gs.index[tv_power(es, lam)] for lam in K.nonzero()] + [t]
    W = np.array([es.u, et.u], dtype=np.int64)
    targets = [tv_power(es, lam) for lam in Kp.nonzero()] + [tv_power(et, lam) for lam in Kp.nonzero()]
    _block(gs, gens, targets, W)
    return Kp


# ---------------------------------------------------------------------------
# SL over a square field: gluing triangles

def _require_sl_square(gs: GenSet) -> Subfield:
    _check_supported(gs)
    if gs.family != "SL":
        raise WrongFamily("this step applies to SL only")
    F = gs.field
    if F.k % 2:
        raise HypothesisUnmet("q is not a square")
    M = F.subfield(F.k // 2)
    if M.size < 5:
        raise ExceptionalField("|M| must be at least 5")
    return M


def _du3(F: Field, w: int, wrev: int) -> int:
    return F.add(w, F.sqrt_frob(wrev))


def find_nonunitary_triangle(gs: GenSet) -> tuple[int, int, int]:
    """Member indices of a triangle with d_u != 0, shortening cycles if needed."""
    _require_sl_square(gs)
    F, S = gs.field, gs.space
    g = _graph(gs)
    oneway = np.argwhere(g.adj & ~g.adj.T)
    for r, s in oneway:
        r, s = int(r), int(s)
        mids = np.nonzero(g.adj[s] & g.adj[:, r])[0]
        if len(mids):
            return (r, s, int(mids[0]))
    from .graph import simple_cycles, d_u
    for _ in range(8):
        g = _graph(gs)
        best = None
        for cyc in simple_cycles(g, 5, budget=10 ** 7):
            # 2-cycles cannot be shortened to a triangle
            if len(cyc) > 2 and d_u(g, cyc) != 0 and (best is None or len(cyc) < len(best)):
                best = cyc
                if len(cyc) == 3:
                    return cyc
        if best is None:
            raise HypothesisUnmet("no non-unitary cycle of length at most 5")
        k = len(best)
        shortened = False
        for rot in range(k):
            r = list(best[rot:] + best[:rot])
            new = tv_conjugate(gs.elems[r[-2]], gs.elems[r[-1]])
            pieces = [[gs.elems[i] for i in r[:-2]] + [new],
                      [gs.elems[r[0]], new, gs.elems[r[-1]]],
                      [gs.elems[r[-1]], new, gs.elems[r[-2]]],
                      [gs.elems[r[-2]], new, gs.elems[r[-3]]]]
            for pc in pieces:
                w = _tuple_weight(S, pc)
                wr = _tuple_weight(S, pc[::-1])
                sign = 1 if len(pc) % 2 else F.neg(1)
                if w and F.add(w, F.mul(sign, F.sqrt_frob(wr))) != 0:
                    gs.add_conjugate(r[-2], r[-1])
                    shortened = True
                    break
            if shortened:
                break
        if not shortened:
            raise HypothesisUnmet("non-unitary cycle could not be shortened")
    raise HypothesisUnmet("shortening did not reach a triangle")


def _in_mask(F: Field, K: Subfield) -> np.ndarray:
    mask = np.zeros(F.q, dtype=bool)
    mask[K.elements()] = True
    return mask


def _class_reps(gs: GenSet) -> list[int]:
    seen, reps = set(), []
    for i, t in enumerate(gs.elems):
        key = gs.class_key(t)
        if key not in seen:
            seen.add(key)
            reps.append(i)
    return reps


def _triangle_scan(F: Field, L: np.ndarray, a: np.ndarray, b: np.ndarray, inM: np.ndarray):
    """Triangles (y1, y2, x) through a new vertex x.

    L is the label matrix of the existing vertices, a[y] = phi_x(u_y) and
    b[y] = phi_y(u_x). Returns the weight matrix W[y1, y2] = w(y1, y2, x),
    the reversed weights and masks for the shortcut and the good-triangle tests.
    """
    W = F.vmul(F.vmul(b[:, None], L), a[None, :])
    R = W.T  # w(x, y2, y1) as a function of (y1, y2)
    nz = W != 0
    outside = nz & ~inM[W]
    good = outside & (F.vadd(W, F.vsqrt_frob(R)) != 0)
    # w(x, y1, y2) - w(x, y2, y1) for the abc-acb shortcut, rotations of the same triangles
    diff = F.vsub(W, R)
    shortcut = nz & ~inM[diff]
    return W, good, shortcut


def _two_cycle_outside(gs: GenSet, M: Subfield, members: Sequence[int] | None = None):
    F = gs.field
    g = _graph(gs) if members is None else build_graph([gs.elems[i] for i in members])
    inM = _in_mask(F, M)
    W2 = F.vmul(g.labels, g.labels.T)
    hit = np.argwhere((W2 != 0) & ~inM[W2])
    if len(hit):
        s, t = (int(x) for x in hit[0])
        idx = [gs.index[g.verts[s]], gs.index[g.verts[t]]]
        return idx[0], idx[1]
    return None


def _shortcut_pair(gs: GenSet, s1: int, s2: int, s3: int, M: Subfield):
    """(s1^{s2}, s3) with s1^{s2} = s2^-1 s1 s2; weight outside M by the abc-acb identity."""
    F, S = gs.field, gs.space
    k = gs.add_conjugate(s1, s2, inverse=True)
    w = _tuple_weight(S, [gs.elems[k], gs.elems[s3]])
    if w and not M.contains(w):
        return k, s3
    return None


def _good_triangle_pair(gs: GenSet, tri: Sequence[int], M: Subfield):
    """Search conjugates inside <s1^M, s2^M, s3^M> for a 2-cycle with weight outside M."""
    F, S = gs.field, gs.space
    inM = _in_mask(F, M)
    gens = [gs.index[tv_power(gs.elems[i], lam)] for i in tri for lam in M.nonzero()]
    gens = sorted(set(gens))
    states: list[Transvection] = [gs.elems[i] for i in gens]
    letters: list[list] = [[(i, 1)] for i in gens]
    seen = {t: k for k, t in enumerate(states)}
    U = [list(t.u) for t in states]
    Phi = [list(t.phi) for t in states]
    frontier = list(range(len(states)))
    while frontier and len(states) < gs.budget:
        nxt = []
        for k in frontier:
            for gi in gens:
                t = tv_conjugate(states[k], gs.elems[gi])
                if t in seen:
                    continue
                Ua = np.array(U, dtype=np.int64)
                Pa = np.array(Phi, dtype=np.int64)
                a = np.asarray(F.matmul(Ua, np.array(t.phi)[:, None]))[:, 0]
                b = np.asarray(F.matmul(Pa, np.array(t.u)[:, None]))[:, 0]
                w = F.vmul(a, b)
                hit = np.nonzero((w != 0) & ~inM[w])[0]
                lt = [(gi, 1)] + letters[k] + [(gi, -1)]
                seen[t] = len(states)
                states.append(t)
                letters.append(lt)
                U.append(list(t.u))
                Phi.append(list(t.phi))
                nxt.append(len(states) - 1)
                if len(hit):
                    y = int(hit[0])
                    i1 = _add_letters(gs, t, lt, states, letters)
                    i2 = _add_letters(gs, states[y], letters[y], states, letters)
                    return i1, i2
        frontier = nxt
    return None


def _add_letters(gs: GenSet, t: Transvection, lt: list, states, letters) -> int:
    if t in gs.index:
        return gs.index[t]
    if len(lt) == 1:
        return lt[0][0]
    # lt = g + inner + g^-1 with inner the letters of an earlier state
    g = lt[0][0]
    inner_t = tv_conjugate(t, tv_power(gs.elems[g], gs.field.neg(1)))
    k = states.index(inner_t)
    inner = _add_letters(gs, inner_t, letters[k], states, letters)
    return gs.add(t, [(g, 1), (inner, 1), (g, -1)])


def find_nonM_2cycle(gs: GenSet) -> tuple[int, int]:
    """Two members forming a 2-cycle whose weight lies outside M = GF(sqrt q)."""
    M = _require_sl_square(gs)
    if not audit_closed(gs, M):
        raise HypothesisUnmet("find_nonM_2cycle needs an M-closed set")
    base = gs.begin("find_nonM_2cycle")
    F, S = gs.field, gs.space
    inM = _in_mask(F, M)

    def done(pair, how):
        gs.end("find_nonM_2cycle", base, route=how)
        gs.meta["nonM_pair"] = pair
        return pair

    pair = _two_cycle_outside(gs, M)
    if pair:
        return done(pair, "direct")
    reps = _class_reps(gs)
    g = build_graph([gs.elems[i] for i in reps])
    L = g.labels
    good = None
    for x in range(len(reps)):
        a, b = L[:, x], L[x, :]
        W, gmask, smask = _triangle_scan(F, L, a, b, inM)
        for y1, y2 in np.argwhere(smask):
            y1, y2 = int(y1), int(y2)
            if x in (y1, y2):
                continue
            # w(x,y1,y2) - w(x,y2,y1) outside M
            res = _shortcut_pair(gs, reps[x], reps[y1], reps[y2], M)
            if res:
                return done(res, "abc-acb")
        if good is None:
            hits = [(int(y1), int(y2)) for y1, y2 in np.argwhere(gmask) if x not in (y1, y2)]
            if hits:
                y1, y2 = hits[0]
                good = (reps[y1], reps[y2], reps[x])
    if good is not None:
        res = _good_triangle_pair(gs, good, M)
        if res:
            return done(res, "good-triangle")
    # conjugate vertices by M-powers of members (red1 and the af lambda searches)
    res = _lambda_search(gs, reps, M, inM)
    if res:
        return done(res, "lambda-search")
    raise CaseAnalysisExhausted("no 2-cycle with weight outside M was found")


def _lambda_search(gs: GenSet, reps: list[int], M: Subfield, inM: np.ndarray):
    F, S = gs.field, gs.space
    g = build_graph([gs.elems[i] for i in reps])
    L = g.labels
    U = np.array([gs.elems[i].u for i in reps], dtype=np.int64)
    Phi = np.array([gs.elems[i].phi for i in reps], dtype=np.int64)
    tried = 0
    for si in reps:
        for gi in reps:
            if si == gi:
                continue
            for lam in M.nonzero():
                x = tv_conjugate(gs.elems[si], tv_power(gs.elems[gi], F.neg(lam)))
                tried += 1
                if tried > gs.budget:
                    raise BudgetExceeded("lambda search exceeded its budget")
                if x == gs.elems[si]:
                    continue
                a = np.asarray(F.matmul(U, np.array(x.phi)[:, None]))[:, 0]
                b = np.asarray(F.matmul(Phi, np.array(x.u)[:, None]))[:, 0]
                W, gmask, smask = _triangle_scan(F, L, a, b, inM)
                w2 = F.vmul(a, b)
                direct = (w2 != 0) & ~inM[w2]
                if not (gmask.any() or smask.any() or direct.any()):
                    continue
                gl = gs.index[tv_power(gs.elems[gi], lam)]
                k = gs.add(x, [(gl, -1), (si, 1), (gl, 1)])
                if direct.any():
                    return k, reps[int(np.nonzero(direct)[0][0])]
                if smask.any():
                    y1, y2 = (int(v) for v in np.argwhere(smask)[0])
                    res = _shortcut_pair(gs, k, reps[y1], reps[y2], M)
                    if res:
                        return res
                y1, y2 = (int(v) for v in np.argwhere(gmask)[0])
                _prime_close(gs, [k])
                _close_member(gs, k, M)
                res = _good_triangle_pair(gs, (reps[y1], reps[y2], k), M)
                if res:
                    return res
    return None


def _close_member(gs: GenSet, k: int, M: Subfield):
    """M-powers of a member obtained as a conjugate g^-lam s g^lam of M-closed members."""
    F = gs.field
    d = gs.deriv[k]
    if d is None or len(d) != 3:
        raise HypothesisUnmet("member is not a simple conjugate")
    (g, _), (s, _), _ = d
    for mu in M.nonzero():
        sp = gs.index[tv_power(gs.elems[s], mu)]
        t = tv_conjugate(gs.elems[sp], tv_power(gs.elems[g], F.neg(1)))
        gs.add(t, [(g, -1), (sp, 1), (g, 1)])


# ---------------------------------------------------------------------------
# adding parameters (Sp and SU)

def _vec(S: VectorSpace, v) -> tuple:
    return tuple(int(x) for x in v)


def _T_elem(gs: GenSet, v, lam: int) -> Transvection:
    """1 + lam v (x) phi_v."""
    S = gs.space
    return tv_make(S, v, S.scale(lam, phi_u(gs.spec.form, v)))


def _scalars(gs: GenSet) -> list[int]:
    F = gs.field
    return list(range(1, F.q)) if gs.family == "Sp" else F.trace_zero_elements()


def T_indices(gs: GenSet, v) -> list[int] | None:
    """Member indices of T_v, or None if some element is missing."""
    out = []
    for lam in _scalars(gs):
        k = gs.index.get(_T_elem(gs, v, lam))
        if k is None:
            return None
        out.append(k)
    return out


def _require_form_family(gs: GenSet):
    _check_supported(gs)
    if gs.family not in ("Sp", "SU"):
        raise WrongFamily("parameter addition applies to Sp and SU only")


def _has_T(gs: GenSet, v) -> bool:
    return T_indices(gs, v) is not None


def _X_directions(gs: GenSet, base: int) -> list[tuple]:
    """Directions v (normalized) with T_v among the first ``base`` members."""
    out, seen = [], set()
    for i in range(base):
        u = gs.elems[i].u
        if u not in seen:
            seen.add(u)
            out.append(u)
    return out


def _sp_case1(gs: GenSet, x, y) -> list[int]:
    """T_{x+y} from T_x, T_y with f(x, y) != 0 by a single conjugation."""
    F, S, f = gs.field, gs.space, gs.spec.form
    xy = S.add(x, y)
    have = T_indices(gs, xy)
    if have is not None:
        return have
    fyx, fxy = form_eval(f, y, x), form_eval(f, x, y)
    base = gs.meta.get("_local_base", 0)

    def plan(a, b, fba):
        lam = F.inv(fba)
        cj = gs.index[_T_elem(gs, b, lam)]
        out, worst = [], 0
        for nu in _scalars(gs):
            ia = gs.index[_T_elem(gs, a, nu)]
            worst = max(worst, gs.local_length(ia, base) + 2 * gs.local_length(cj, base))
            out.append((ia, cj))
        return worst, out

    wa, pa = plan(x, y, fyx)
    wb, pb = plan(y, x, fxy)
    chosen = pa if wa <= wb else pb
    res = []
    for ia, cj in chosen:
        t = tv_conjugate(gs.elems[ia], gs.elems[cj])
        res.append(gs.add(t, [(cj, 1), (ia, 1), (cj, -1)]))
    if T_indices(gs, xy) is None:
        raise RuntimeError("conjugation did not produce T_{x+y}")
    return T_indices(gs, xy)


def _sp_add_two(gs: GenSet, a, b, base: int):
    F, S, f = gs.field, gs.space, gs.spec.form
    if form_eval(f, a, b) != 0:
        return _sp_case1(gs, a, b), "case1"
    dirs = _X_directions(gs, base)
    ab = S.add(a, b)

    def via(c):
        x = S.add(a, c)
        y = S.sub(b, c)
        _sp_case1(gs, a, c)
        _sp_case1(gs, b, S.scale(F.neg(1), c))
        return _sp_case1(gs, x, y)

    cs = [c for c in dirs if form_eval(f, c, a) != 0 and form_eval(f, b, c) != 0]
    if not cs:
        raise HypothesisUnmet("no common neighbour of T_a and T_b in X")
    for c in cs:
        if form_eval(f, c, ab) != 0:
            return via(c), "case2a"
    c = cs[0]
    ds = [d for d in dirs if form_eval(f, d, ab) != 0]
    if not ds:
        raise HypothesisUnmet("no transvection of X separates a+b")
    for d in ds:
        if form_eval(f, d, a) != 0 and form_eval(f, d, b) != 0:
            return via(d), "case2a"
    d = ds[0]
    if form_eval(f, d, a) == 0:
        a, b = b, a
    dp = d if form_eval(f, c, d) != 0 else S.add(a, d)
    if dp != d:
        _sp_case1(gs, a, d)
    tau = next(t for t in range(1, F.q)
               if form_eval(f, S.add(S.scale(t, c), dp), a) != 0)
    tc = S.scale(tau, c)
    e = S.add(tc, dp)
    _sp_case1(gs, tc, dp)
    x = S.add(a, e)
    y = S.sub(b, e)
    _sp_case1(gs, a, e)
    _sp_case1(gs, b, S.scale(F.neg(1), e))
    return _sp_case1(gs, x, y), "case2b"


def _form_block(gs: GenSet, vecs: Sequence, target) -> list[int]:
    """T_target from the subgroups T_v (v in vecs) by BFS on span(vecs)."""
    F = gs.field
    W = linalg.row_basis(F, [list(v) for v in vecs], gs.space.n)
    gens = []
    for v in vecs:
        gens.extend(T_indices(gs, v))
    targets = [_T_elem(gs, target, lam) for lam in _scalars(gs)]
    return _block(gs, sorted(set(gens)), targets, W)


def _su_add_two(gs: GenSet, a, b, base: int):
    F, S, f = gs.field, gs.space, gs.spec.form
    if form_eval(f, a, b) != 0:
        return _form_block(gs, [a, b], S.add(a, b)), "edge"
    dirs = _X_directions(gs, base)
    cs = [c for c in dirs if form_eval(f, c, a) != 0 and form_eval(f, b, c) != 0]
    if not cs:
        raise HypothesisUnmet("no common neighbour of T_a and T_b in X")
    # the group <T_a, T_b, T_c> is small and often already holds T_{a+b}
    targets = [_T_elem(gs, S.add(a, b), lam) for lam in _scalars(gs)]
    for c in cs:
        gens = sorted(set(T_indices(gs, a) + T_indices(gs, b) + T_indices(gs, c)))
        try:
            return _block(gs, gens, targets, None, SMALL_BLOCK_BUDGET), "three"
        except (HypothesisUnmet, BudgetExceeded):
            continue
    last = None
    for c in cs:
        for d in dirs:
            span = [a, b, c, d]
            if radical(f, span):
                continue
            try:
                return _form_block(gs, span, S.add(a, b)), "block"
            except (HypothesisUnmet, BudgetExceeded) as exc:
                last = exc
    if last is not None:
        raise last
    raise HypothesisUnmet("no nondegenerate four-space around a, b")


def add_two(gs: GenSet, a, b) -> GenSet:
    """Add T_{a+b} given T_a and T_b in gs."""
    _require_form_family(gs)
    F, S, f = gs.field, gs.space, gs.spec.form
    a, b = S.check(a), S.check(b)
    ab = S.add(a, b)
    if not any(ab):
        raise NotSingular("a + b is zero")
    if not is_singular(f, ab):
        raise NotSingular("a + b is not singular")
    if not (_has_T(gs, a) and _has_T(gs, b)):
        raise HypothesisUnmet("T_a and T_b must already be members")
    base = gs.begin("add_two")
    prev = gs.meta.get("_local_base")
    gs.meta["_local_base"] = base
    try:
        if linalg.rank(F, [a, b]) == 1:
            idx, how = T_indices(gs, ab), "parallel"
        elif gs.family == "Sp":
            idx, how = _sp_add_two(gs, a, b, base)
        else:
            idx, how = _su_add_two(gs, a, b, base)
    finally:
        if prev is None:
            gs.meta.pop("_local_base", None)
        else:
            gs.meta["_local_base"] = prev
    local = max(gs.local_length(i, base) for i in idx)
    gs.meta["last_add"] = {"indices": idx, "local_length": local, "route": how}
    gs.end("add_two", base, route=how, target_local_length=local)
    return gs


def split_singular(gs: GenSet | None, summands: Sequence, form: Form | None = None):
    """(i, lam) with lam in F_q0 and sum(summands) - lam * summands[i] singular."""
    if form is None:
        form = gs.spec.form
    S = form.space
    F = S.field
    v = S.zero()
    for s in summands:
        if not is_singular(form, S.check(s)):
            raise NotSingular("summands must be singular")
        v = S.add(v, S.check(s))
    fvv = form_eval(form, v, v)
    if fvv == 0:
        return 0, 0
    for i, s in enumerate(summands):
        tr = F.trace(form_eval(form, v, S.check(s)))
        if tr:
            return i, F.div(fvv, tr)
    raise NotSingular("no summand splits off a singular remainder")


def add_three(gs: GenSet, v1, v2, v3) -> GenSet:
    """Add T_{v1+v2+v3} (unitary case) from T_{v1}, T_{v2}, T_{v3}."""
    _require_form_family(gs)
    F, S, f = gs.field, gs.space, gs.spec.form
    vs = [S.check(v) for v in (v1, v2, v3)]
    total = S.add(S.add(vs[0], vs[1]), vs[2])
    if not any(total) or not is_singular(f, total):
        raise NotSingular("v1 + v2 + v3 must be nonzero and singular")
    nz = [v for v in vs if any(v)]
    base = gs.begin("add_three")
    if len(nz) == 1:
        idx, how = T_indices(gs, nz[0]), "single"
    elif len(nz) == 2:
        add_two(gs, nz[0], nz[1])
        idx, how = T_indices(gs, total), "two"
    else:
        idx, how = _add_three(gs, vs, total)
    local = max(gs.local_length(i, base) for i in idx)
    gs.meta["last_add"] = {"indices": idx, "local_length": local, "route": how}
    gs.end("add_three", base, route=how, target_local_length=local)
    return gs


def _add_three(gs: GenSet, vs: list, total) -> tuple[list[int], str]:
    F, S, f = gs.field, gs.space, gs.spec.form

    def ensure(x, y):
        if not any(x):
            return y
        if not any(y):
            return x
        s = S.add(x, y)
        if any(s) and not _has_T(gs, s):
            add_two(gs, x, y)
        return s

    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1), (1, 0, 2), (2, 1, 0)):
        vi, vj, vk = vs[i], vs[j], vs[k]
        for lam in range(F.q):
            x = S.add(S.scale(lam, vi), vj)
            y = S.add(S.scale(F.sub(1, lam), vi), vk)
            if not (is_singular(f, x) and is_singular(f, y)):
                continue
            if not any(x) or not any(y):
                continue
            xs = ensure(S.scale(lam, vi), vj)
            ys = ensure(S.scale(F.sub(1, lam), vi), vk)
            ensure(xs, ys)
            return T_indices(gs, total), ("trace-zero" if lam in (0, 1) else "affine")
    return _form_block(gs, vs, total), "block"


def generate_all_transvections(gs: GenSet) -> tuple[GenSet, SynthesisReport]:
    """Give every transvection of the group a word."""
    _check_supported(gs)
    if gs.family is None:
        raise WrongFamily("generate_all_transvections needs a group spec")
    base = gs.begin("generate_all_transvections")
    if gs.family == "SL":
        _sl_endgame(gs)
    else:
        if "P8" not in gs.flags:
            raise HypothesisUnmet("generate_all_transvections needs an M-closed set")
        _form_sweep(gs, base)
    from .trans import all_transvections
    missing = [t for t in all_transvections(gs.spec) if t not in gs.index]
    if missing:
        raise RuntimeError(f"{len(missing)} transvections have no word")
    gs.flags.add("all")
    gs.end("generate_all_transvections", base)
    rep = gs.report()
    rep.max_length = max(len(gs.words[gs.index[t]]) for t in all_transvections(gs.spec))
    rep.transvection_count = len(all_transvections(gs.spec))
    return gs, rep


def _form_sweep(gs: GenSet, base: int):
    F, S, f = gs.field, gs.space, gs.spec.form
    dirs = _X_directions(gs, base)
    basis, rows = [], []
    for u in dirs:
        if linalg.rank(F, rows + [list(u)]) > len(rows):
            rows.append(list(u))
            basis.append(u)
        if len(basis) == S.n:
            break
    if len(basis) < S.n:
        raise HypothesisUnmet("the directions of X do not span V")
    Bt = np.array(basis, dtype=np.int64).T
    targets = singular_points(f) if gs.family == "SU" else list(S.points())
    memo: set = set()

    def vec(terms):
        v = S.zero()
        for i, c in terms:
            v = S.axpy(c, basis[i], v)
        return v

    def ensure(terms) -> tuple:
        terms = [(i, c) for i, c in terms if c]
        v = vec(terms)
        key = S.normalize(v)[0]
        if key in memo or _has_T(gs, v):
            memo.add(key)
            return v
        if len(terms) == 1:
            raise RuntimeError("a basis direction lost its subgroup")
        if gs.family == "Sp":
            h = (len(terms) + 1) // 2
            v1, v2 = ensure(terms[:h]), ensure(terms[h:])
            add_two(gs, v1, v2)
        elif len(terms) == 2:
            add_two(gs, vec(terms[:1]), vec(terms[1:]))
        elif len(terms) == 3:
            add_three(gs, *(vec([t]) for t in terms))
        else:
            h = (len(terms) + 1) // 2
            first, second = terms[:h], terms[h:]
            i, lam = split_singular(gs, [vec([t]) for t in first])
            ti, ci = first[i]
            t1 = [(j, c) for j, c in first if j != ti] + [(ti, F.sub(ci, F.mul(lam, ci)))]
            rem = [(ti, F.mul(lam, ci))] + second
            rem = [(j, c) for j, c in rem if c]
            v1 = ensure(t1) if any(c for _, c in t1) else S.zero()
            rv = vec(rem)
            if is_singular(f, rv):
                v2, v3 = ensure(rem), S.zero()
            else:
                jj, mu = split_singular(gs, [vec([t]) for t in rem])
                tj, cj = rem[jj]
                v2 = S.scale(F.mul(mu, cj), basis[tj])
                t3 = [(j, c) for j, c in rem if j != tj] + [(tj, F.sub(cj, F.mul(mu, cj)))]
                v3 = ensure(t3)
            add_three(gs, v1, v2, v3)
        memo.add(key)
        return v

    for v in targets:
        coords = linalg.rref(F, np.concatenate([Bt, np.array(v)[:, None]], axis=1))[0][:, -1]
        terms = [(i, int(coords[i])) for i in range(S.n) if int(coords[i])]
        ensure(terms)


def _sl_endgame(gs: GenSet):
    F = gs.field
    full = F.full()
    if not audit_closed(gs, full):
        L2 = L_k(_graph(gs), 2)
        if not L2.is_full():
            M = _require_sl_square(gs)
            if L2 != M:
                raise HypothesisUnmet(f"L2 = {L2} is neither GF(q) nor GF(sqrt q)")
            if not audit_closed(gs, M):
                close_over_M(gs, M)
            find_nonM_2cycle(gs)
        close_over_M(gs, full)
    _sl_sweep(gs)


def _sl_sweep(gs: GenSet):
    """Every transvection as a conjugate of an F_q-closed member (flags reached by BFS)."""
    F, S = gs.field, gs.space
    reps = _class_reps(gs)
    conj = sorted(reps, key=lambda i: (gs.length(i), i))
    flags = {}
    frontier = []
    for i in reps:
        key = gs.class_key(gs.elems[i])
        flags[key] = (i, ())
        frontier.append(key)
    while frontier:
        nxt = []
        for key in frontier:
            src, prefix = flags[key]
            t = gs.elems[src]
            for g in prefix:
                t = tv_conjugate(t, gs.elems[g])
            for g in conj:
                s = tv_conjugate(t, gs.elems[g])
                k2 = gs.class_key(s)
                if k2 in flags:
                    continue
                flags[k2] = (src, prefix + (g,))
                nxt.append(k2)
        frontier = nxt
    for key, (src, prefix) in flags.items():
        if not prefix:
            continue
        for lam in range(1, F.q):
            x = tv_power(gs.elems[src], lam)
            xi = gs.index[x]
            t = x
            for g in prefix:
                t = tv_conjugate(t, gs.elems[g])
            letters = [(g, 1) for g in reversed(prefix)] + [(xi, 1)] + [(g, -1) for g in prefix]
            gs.add(t, letters)


# ---------------------------------------------------------------------------
# arbitrary elements

def _encode(q: int, v: np.ndarray) -> np.ndarray:
    return (v * (q ** np.arange(v.shape[-1]))).sum(axis=-1)


def decompose_element(gs: GenSet, g: np.ndarray, return_factors: bool = False):
    """Word for g: clear one column at a time with transvections fixing earlier columns."""
    from .trans import all_transvections
    F, S, spec = gs.field, gs.space, gs.spec
    n = S.n
    g = np.asarray(g, dtype=np.int64)
    if spec is None or not spec.contains_matrix(g):
        raise NotInGroup("g is not in the group")
    if "all" not in gs.flags:
        raise HypothesisUnmet("decompose_element needs every transvection")
    T = all_transvections(spec)
    idx = np.array([gs.index[t] for t in T])
    U = np.array([t.u for t in T], dtype=np.int64)
    Phi = np.array([t.phi for t in T], dtype=np.int64)
    h = g.copy()
    factors: list[int] = []
    for j in range(n):
        allowed = ~(Phi[:, :j] != 0).any(axis=1) if j else np.ones(len(T), dtype=bool)
        Ua, Pa, ia = U[allowed], Phi[allowed], idx[allowed]
        path = _vector_path(F, Ua, Pa, h[:, j], np.eye(n, dtype=np.int64)[j], gs.budget)
        if path is None:
            raise HypothesisUnmet(f"column {j} cannot be cleared")
        for k in path:
            t = gs.elems[int(ia[k])]
            h = np.asarray(F.matmul(tv_matrix(t), h), dtype=np.int64)
            factors.append(int(ia[k]))
    if not np.array_equal(h, np.eye(n, dtype=np.int64)):
        raise RuntimeError("column clearing did not reach the identity")
    # t_m ... t_1 g = 1, so g = t_1^-1 ... t_m^-1
    word = Word()
    for k in factors:
        word = word + gs.words[k].inverse()
    if gs.verify and not np.array_equal(gs.evaluate(word), g):
        raise RuntimeError("decomposition does not evaluate to g")
    if return_factors:
        return word, factors
    return word


def _vector_path(F: Field, U: np.ndarray, Phi: np.ndarray, start: np.ndarray,
                 goal: np.ndarray, budget: int) -> list[int] | None:
    """Shortest sequence of transvections (rows of U, Phi) moving start to goal."""
    q = F.q
    s_code, g_code = int(_encode(q, start)), int(_encode(q, goal))
    if s_code == g_code:
        return []
    parent = {s_code: None}
    vecs = {s_code: start}
    frontier = [s_code]
    explored = 0
    while frontier:
        nxt = []
        for c in frontier:
            v = vecs[c]
            coef = np.asarray(F.vdot(Phi, v[None, :]))
            imgs = np.asarray(F.vadd(v[None, :], F.vmul(coef[:, None], U)), dtype=np.int64)
            codes = _encode(q, imgs)
            for k in np.nonzero(coef)[0]:
                cc = int(codes[k])
                if cc in parent:
                    continue
                parent[cc] = (c, int(k))
                vecs[cc] = imgs[k]
                if cc == g_code:
                    path = []
                    while parent[cc] is not None:
                        cc, kk = parent[cc]
                        path.append(kk)
                    return path[::-1]
                nxt.append(cc)
            explored += 1
            if explored > budget:
                raise BudgetExceeded("vector search exceeded its budget")
        frontier = nxt
    return None


# ---------------------------------------------------------------------------
# orchestration

def synthesize(spec: GroupSpec, X: Sequence, verify: bool = True,
               budget: int = DEFAULT_BUDGET) -> tuple[GenSet, SynthesisReport]:
    """Run every stage on generators X of the group described by spec."""
    if spec.excluded:
        raise UnsupportedQ(f"the synthesis pipeline excludes {spec.name()}", group=spec.name())
    gs = seed_conjugate_class(X, spec, verify=verify, budget=budget)
    extend_diameter2(gs)
    extend_twoway6(gs)
    boost_L3(gs)
    if spec.family in ("Sp", "SU"):
        fix_L2_sympunit(gs)
        close_over_M(gs)
    else:
        L2 = L_k(_graph(gs), 2)
        close_over_M(gs, L2 if L2.size != 9 or L2.is_full() else None)
    return generate_all_transvections(gs)
