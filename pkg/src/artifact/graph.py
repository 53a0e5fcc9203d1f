"""Labelled transvection graphs and their cycle invariants.

Vertex s carries its canonical representative (u_s, phi_s); the label of the
directed pair (s, t) is l(s, t) = phi_t(u_s) and [s, t] is an edge iff the
label is nonzero. The weight of a tuple is the product of labels around it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import linalg
from .errors import BudgetExceeded, NotTwoWayCycle, TooManyVertices
from .gf import Field, Subfield, subfield_generated_int
from .trans import Transvection, tv_conjugate, tv_power

ENUM_BUDGET = 10 ** 7


class TransvectionGraph:
    """Gamma(Y): ordered canonical vertices and the label matrix."""

    def __init__(self, verts: Sequence[Transvection]):
        seen, vs = set(), []
        for t in verts:
            if t not in seen:
                seen.add(t)
                vs.append(t)
        if not vs:
            raise ValueError("empty vertex list")
        self.verts = vs
        self.space = vs[0].space
        self.field: Field = self.space.field
        self.index = {t: i for i, t in enumerate(vs)}
        U = np.array([t.u for t in vs], dtype=np.int64)
        P = np.array([t.phi for t in vs], dtype=np.int64)
        # labels[s, t] = phi_t(u_s)
        self.labels = np.asarray(self.field.matmul(U, P.T), dtype=np.int64)
        self.adj = self.labels != 0
        self.twoway = self.adj & self.adj.T
        self._lab = self.labels.tolist()

    def __len__(self):
        return len(self.verts)

    def label(self, s: int, t: int) -> int:
        return self._lab[s][t]

    def neighbours(self, s: int) -> list[int]:
        return [int(t) for t in np.nonzero(self.adj[s])[0]]

    def to_json(self) -> dict:
        F = self.field
        return {"vertices": [t.to_json() for t in self.verts],
                "labels": [[F.coeffs(int(a)) for a in row] for row in self.labels]}

    def to_dot(self) -> str:
        lines = ["digraph G {"]
        for i in range(len(self)):
            lines.append(f"  v{i};")
        m = len(self)
        for s in range(m):
            for t in range(m):
                if not self.adj[s, t]:
                    continue
                if self.adj[t, s]:
                    if s < t:
                        lines.append(f"  v{s} -> v{t} [dir=none];")
                else:
                    lines.append(f"  v{s} -> v{t};")
        lines.append("}")
        return "\n".join(lines)


def build_graph(Y: Iterable[Transvection]) -> TransvectionGraph:
    return TransvectionGraph(list(Y))


def weight(g: TransvectionGraph, tup: Sequence[int]) -> int:
    if len(tup) < 2:
        raise ValueError("tuples have length at least 2")
    F = g.field
    acc = 1
    k = len(tup)
    for i in range(k):
        lab = g.label(tup[i], tup[(i + 1) % k])
        if lab == 0:
            return 0
        acc = F.mul(acc, lab)
    return acc


def _sign(F: Field, k: int) -> int:
    return 1 if k % 2 else F.neg(1)


def d_s(g: TransvectionGraph, tup: Sequence[int]) -> int:
    F = g.field
    rev = weight(g, tuple(reversed(tup)))
    return F.add(weight(g, tup), F.mul(_sign(F, len(tup)), rev))


def d_u(g: TransvectionGraph, tup: Sequence[int]) -> int:
    F = g.field
    rev = F.sqrt_frob(weight(g, tuple(reversed(tup))))
    return F.add(weight(g, tup), F.mul(_sign(F, len(tup)), rev))


def P_u(g: TransvectionGraph, cycle: Sequence[int]) -> int:
    F = g.field
    fw = weight(g, cycle)
    rev = weight(g, tuple(reversed(cycle)))
    if fw == 0 or rev == 0:
        raise NotTwoWayCycle("P_u needs a two-way directed cycle")
    return F.div(fw, F.sqrt_frob(rev))


def is_unitary_cycle(g: TransvectionGraph, cycle: Sequence[int]) -> bool:
    return d_u(g, cycle) == 0


def is_symplectic_cycle(g: TransvectionGraph, cycle: Sequence[int]) -> bool:
    return d_s(g, cycle) == 0


# ---------------------------------------------------------------------------
# distances

def distance_matrix(adj: np.ndarray) -> np.ndarray:
    """All-pairs BFS distances on a boolean adjacency matrix; -1 when unreachable."""
    m = adj.shape[0]
    A = adj.astype(np.float32)
    dist = np.full((m, m), -1, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    reached = np.eye(m, dtype=bool)
    frontier = np.eye(m, dtype=np.float32)
    d = 0
    while True:
        d += 1
        nxt = (frontier @ A > 0) & ~reached
        if not nxt.any():
            break
        dist[nxt] = d
        reached |= nxt
        frontier = nxt.astype(np.float32)
    return dist


def bfs_path(adj: np.ndarray, sources: Iterable[int], targets: Iterable[int]) -> list[int] | None:
    """Shortest path (vertex list) from any source to any target; ties broken by index."""
    targets = set(int(t) for t in targets)
    srcs = sorted(set(int(s) for s in sources))
    parent = {s: None for s in srcs}
    layer = srcs
    while layer:
        for v in layer:
            if v in targets:
                path = [v]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1]
        nxt = []
        for v in layer:
            for w in np.nonzero(adj[v])[0]:
                w = int(w)
                if w not in parent:
                    parent[w] = v
                    nxt.append(w)
        layer = sorted(nxt)
    return None


def graph_metrics(g: TransvectionGraph) -> dict:
    out = {}
    for name, adj in (("", g.adj), ("twoway_", g.twoway)):
        dist = distance_matrix(adj)
        conn = bool((dist >= 0).all())
        key = "strongly_connected" if not name else "twoway_connected"
        out[key] = conn
        if conn:
            out[name + "diameter"] = int(dist.max())
    return out


# ---------------------------------------------------------------------------

def parts(Y: Sequence[Transvection]) -> dict:
    Y = list(Y)
    if not Y:
        return {"V_part": [], "Vstar_part": [], "V_span_dim": 0, "Vstar_span_dim": 0}
    F = Y[0].space.field
    us = sorted(set(t.u for t in Y))
    phis = sorted(set(Y[0].space.normalize(t.phi)[0] for t in Y))
    return {"V_part": us, "Vstar_part": phis,
            "V_span_dim": linalg.rank(F, us), "Vstar_span_dim": linalg.rank(F, phis)}


# ---------------------------------------------------------------------------
# closed-walk enumeration

def _walk_levels(g: TransvectionGraph, k: int, starts: Iterable[int] | None,
                 on_close: Callable[[int, int, np.ndarray, list], bool],
                 budget: int = ENUM_BUDGET):
    """Breadth-first expansion of (start, current, weight) states, deduplicated.

    Levels store parent indices so walks can be recovered. ``on_close(start,
    level, weights, levels)`` sees the weights of the closed walks returning
    to ``start`` at each level and returns True to stop.
    """
    F, m = g.field, len(g)
    q = F.q
    lab = g.labels
    nbrs = [np.nonzero(g.adj[v])[0] for v in range(m)]
    total = 0
    for s in (range(m) if starts is None else starts):
        cur = np.array([s], dtype=np.int64)
        wt = np.array([1], dtype=np.int64)
        levels = [(cur, wt, np.array([-1], dtype=np.int64))]
        for length in range(1, k + 1):
            cnt = np.array([len(nbrs[c]) for c in cur])
            if cnt.sum() == 0:
                break
            par = np.repeat(np.arange(len(cur)), cnt)
            nxt = np.concatenate([nbrs[c] for c in cur]) if len(cur) else np.zeros(0, np.int64)
            nw = np.asarray(F.vmul(wt[par], lab[cur[par], nxt]), dtype=np.int64)
            closed = nxt == s
            if closed.any():
                levels.append((nxt[closed], nw[closed], par[closed]))
                if on_close(s, length, nw[closed], levels):
                    return True
                levels.pop()
            if length == k:
                break
            keep = ~closed
            codes = nxt[keep] * q + nw[keep]
            codes, first = np.unique(codes, return_index=True)
            cur = codes // q
            wt = codes % q
            levels.append((cur, wt, par[keep][first]))
            total += len(cur)
            if total > budget:
                raise TooManyVertices(f"walk enumeration exceeded {budget} states")
    return False


def _recover_walk(levels: list, idx: int) -> list[int]:
    path = []
    for lvl in range(len(levels) - 1, -1, -1):
        cur, _, par = levels[lvl]
        path.append(int(cur[idx]))
        idx = int(par[idx])
    path.reverse()
    return path[:-1]  # drop the repeated start at the end


def _split_simple_cycles(walk: list[int]) -> list[tuple]:
    """Decompose a closed walk into simple cycles."""
    out, stack, pos = [], [], {}
    for v in walk + [walk[0]]:
        if v in pos:
            i = pos[v]
            cyc = stack[i:]
            if len(cyc) >= 2:
                out.append(tuple(cyc))
            for x in cyc[1:]:
                del pos[x]
            del stack[i + 1:]
        else:
            pos[v] = len(stack)
            stack.append(v)
    return out


def L_k(g: TransvectionGraph, k: int, budget: int = ENUM_BUDGET) -> Subfield:
    """Subfield generated by the weights of directed cycles of length at most k."""
    if k < 2:
        raise ValueError("k must be at least 2")
    F = g.field
    found: set[int] = set()
    state = {"sub": F.prime_subfield()}

    def close(s, length, ws, levels):
        new = set(int(w) for w in ws) - found
        if new:
            found.update(new)
            state["sub"] = state["sub"].join(subfield_generated_int(F, new))
        return state["sub"].is_full()

    _walk_levels(g, k, None, close, budget)
    return state["sub"]


def find_cycle(g: TransvectionGraph, k: int, bad: Callable[[int], bool],
               starts: Iterable[int] | None = None,
               budget: int = ENUM_BUDGET) -> tuple | None:
    """A simple directed cycle of length <= k whose weight satisfies ``bad``.

    ``bad`` must describe the complement of a multiplicatively closed set (for
    example "not in subfield S"), so that a bad closed walk always contains a
    bad simple cycle.
    """
    result = {}

    def close(s, length, ws, levels):
        hit = [i for i, w in enumerate(ws) if bad(int(w))]
        if not hit:
            return False
        walk = _recover_walk(levels, hit[0])
        for cyc in _split_simple_cycles(walk):
            if bad(weight(g, cyc)):
                result["c"] = cyc
                return True
        return False

    _walk_levels(g, k, starts, close, budget)
    return result.get("c")


def cycle_weights(g: TransvectionGraph, k: int, budget: int = ENUM_BUDGET) -> set[int]:
    """Distinct weights of closed walks of length at most k."""
    out: set[int] = set()

    def close(s, length, ws, levels):
        out.update(int(w) for w in ws)
        return False

    _walk_levels(g, k, None, close, budget)
    return out


def simple_cycles(g: TransvectionGraph, k: int, budget: int = ENUM_BUDGET):
    """Yield every simple directed cycle of length <= k once (smallest vertex first)."""
    m = len(g)
    count = 0
    nb = [g.neighbours(v) for v in range(m)]

    def rec(path, onpath):
        nonlocal count
        count += 1
        if count > budget:
            raise TooManyVertices("cycle enumeration exceeded budget")
        v = path[-1]
        for w in nb[v]:
            if w == path[0] and len(path) >= 2:
                yield tuple(path)
            elif w > path[0] and w not in onpath and len(path) < k:
                path.append(w)
                onpath.add(w)
                yield from rec(path, onpath)
                onpath.discard(w)
                path.pop()

    for s in range(m):
        yield from rec([s], {s})


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadCoeffs:
    A: int
    B: int
    C: int
    D: int | None
    E: int | None
    F: int | None


def af_coeffs(g: TransvectionGraph, s1: int, s2: int, s3: int, s4: int) -> QuadCoeffs:
    """Coefficients with w(s1,s2,s3') = A + lam B + lam^2 C for s3' = s3 conjugated by s4^lam.

    Here s3' = s4^-lam s3 s4^lam. The d_u coefficients (q square) satisfy
    d_u(s1,s2,s3') = D + lam E + lam^2 F for lam in GF(sqrt q). F is computed
    as C + sigma(C') with C' the (12)-swapped C; it reduces to
    -w(s3,s4) d_u(s1,s2,s4) whenever w(s3,s4) lies in GF(sqrt q).
    """
    F = g.field
    w = lambda *t: weight(g, t)

    def abc(a, b):
        A = w(a, b, s3)
        B = F.sub(w(a, b, s4, s3), w(a, b, s3, s4))
        C = F.neg(F.mul(w(s3, s4), w(a, b, s4)))
        return A, B, C

    A, B, C = abc(s1, s2)
    if F.k % 2:
        return QuadCoeffs(A, B, C, None, None, None)
    A2, B2, C2 = abc(s2, s1)
    sf = F.sqrt_frob
    return QuadCoeffs(A, B, C, F.add(A, sf(A2)), F.add(B, sf(B2)), F.add(C, sf(C2)))


def af_conjugate(t3: Transvection, t4: Transvection, lam: int) -> Transvection:
    """s3 conjugated by s4^lam in the af sense: s4^-lam s3 s4^lam."""
    if lam == 0:
        return t3
    return tv_conjugate(t3, tv_power(t4, t3.space.field.neg(lam)))


def eval_quad(F: Field, a: int, b: int, c: int, lam: int) -> int:
    return F.add(a, F.add(F.mul(lam, b), F.mul(F.mul(lam, lam), c)))
