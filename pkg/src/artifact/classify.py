"""Irreducibility, defining field and family of a transvection-generated group."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .errors import HypothesisUnmet, NotTwoWayEdge
from .gf import Field, Subfield, subfield_generated_int
from .graph import (TransvectionGraph, bfs_path, build_graph, d_s, d_u, distance_matrix,
                    graph_metrics, L_k, parts, simple_cycles, weight)
from .trans import Transvection, tv_power

CYCLE_ENUM_BUDGET = 10 ** 6
RANDOM_CYCLES = 10 ** 5
EXACT_WALK_LIMIT = 12


@dataclass
class ClassificationResult:
    irreducible: bool
    defining_subfield: Subfield
    family: str
    witness: dict | None = None
    confirmed: bool | None = None
    notes: list = dc_field(default_factory=list)

    def to_json(self) -> dict:
        out = {"irreducible": self.irreducible,
               "defining_field": self.defining_subfield.to_json(),
               "family": self.family,
               "witness": self.witness}
        if self.confirmed is not None:
            out["confirmed"] = self.confirmed
        return out


def irreducible(Y: Sequence[Transvection]) -> bool:
    Y = list(Y)
    if not Y:
        raise ValueError("empty set")
    n = Y[0].space.n
    pr = parts(Y)
    if pr["V_span_dim"] < n or pr["Vstar_span_dim"] < n:
        return False
    return graph_metrics(build_graph(Y))["strongly_connected"]


def defining_field(Y: Sequence[Transvection]) -> Subfield:
    """Field generated by the weights of all cycles of Gamma(Y)."""
    g = build_graph(Y)
    F = g.field
    m = len(g)
    if m <= EXACT_WALK_LIMIT:
        # closed walks up to length m cover every simple cycle
        return L_k(g, max(2, m))
    metrics = graph_metrics(g)
    if metrics["strongly_connected"] and metrics["diameter"] > 2:
        from .pipeline import GenSet, extend_diameter2
        gs = GenSet.from_transvections(list(g.verts))
        extend_diameter2(gs)
        g = build_graph(gs.transvections())
    n = g.space.n
    kmin = max(5, n + 1)
    prev = L_k(g, 2)
    k = 2
    while True:
        if prev.is_full():
            return prev
        k += 1
        cur = L_k(g, k)
        if cur == prev and k >= kmin:
            return cur
        prev = cur


# ---------------------------------------------------------------------------

def _one_way_witness(g: TransvectionGraph) -> tuple | None:
    """A cycle through a one-way edge (never symplectic nor unitary)."""
    oneway = g.adj & ~g.adj.T
    idx = np.argwhere(oneway)
    for s, t in idx:
        path = bfs_path(g.adj, [int(t)], [int(s)])
        if path is not None:
            return tuple([int(s)] + path[:-1]) if len(path) > 1 else None
    return None


def _random_cycles(g: TransvectionGraph, rng: np.random.Generator, count: int, kmax: int):
    m = len(g)
    nb = [np.nonzero(g.adj[v])[0] for v in range(m)]
    for _ in range(count):
        k = int(rng.integers(2, kmax + 1))
        v = int(rng.integers(m))
        path = [v]
        ok = True
        for _ in range(k - 1):
            cand = [int(w) for w in nb[path[-1]] if int(w) not in path]
            if not cand:
                ok = False
                break
            path.append(cand[int(rng.integers(len(cand)))])
        if ok and g.adj[path[-1], path[0]]:
            yield tuple(path)


def cycle_witnesses(g: TransvectionGraph, kmax: int, rng: np.random.Generator | None = None,
                    random_count: int = RANDOM_CYCLES, budget: int = CYCLE_ENUM_BUDGET) -> dict:
    """Search for a non-symplectic and a non-unitary cycle."""
    F = g.field
    square = F.k % 2 == 0
    out = {"non_symplectic": None, "non_unitary": None if square else "n/a",
           "exhaustive": True}
    c = _one_way_witness(g)
    if c is not None:
        out["non_symplectic"] = c
        if square:
            out["non_unitary"] = c
        return out

    def done():
        return out["non_symplectic"] is not None and out["non_unitary"] is not None

    def look(cyc):
        if out["non_symplectic"] is None and d_s(g, cyc) != 0:
            out["non_symplectic"] = cyc
        if out["non_unitary"] is None and d_u(g, cyc) != 0:
            out["non_unitary"] = cyc

    count = 0
    for cyc in simple_cycles(g, kmax, budget=10 ** 9):
        look(cyc)
        count += 1
        if done():
            return out
        if count >= budget:
            out["exhaustive"] = False
            break
    if rng is None:
        rng = np.random.default_rng(0)
    longest = max(kmax + 1, min(len(g), 2 * kmax))
    if random_count and len(g) > kmax:
        for cyc in _random_cycles(g, rng, random_count, longest):
            look(cyc)
            if done():
                return out
    return out


def classify_from_cycles(Z: Sequence[Transvection], rng: np.random.Generator | None = None,
                         random_count: int = RANDOM_CYCLES, check_field: bool = True
                         ) -> ClassificationResult:
    Z = list(Z)
    n = Z[0].space.n
    irr = irreducible(Z)
    L = defining_field(Z) if check_field else Z[0].space.field.full()
    res = ClassificationResult(irr, L, "undetermined")
    if n < 3:
        raise HypothesisUnmet("the cycle classification needs n >= 3", result=res)
    if not irr:
        raise HypothesisUnmet("the set is not irreducible", result=res)
    if not L.is_full():
        raise HypothesisUnmet(f"cycle weights generate {L}, not the whole field", result=res)
    g = build_graph(Z)
    wit = cycle_witnesses(g, max(5, n + 1), rng, random_count)
    if wit["non_symplectic"] is None:
        res.family = "Sp"
    elif wit["non_unitary"] is None:
        res.family = "SU"
    else:
        res.family = "SL"
        res.witness = {"non_symplectic": list(wit["non_symplectic"]),
                       "non_unitary": (list(wit["non_unitary"])
                                       if isinstance(wit["non_unitary"], tuple) else None)}
    if res.family != "SL" and not wit["exhaustive"]:
        res.notes.append("short-cycle enumeration hit its budget; result rests on sampling")
    return res


def classify(Y: Sequence[Transvection], rng: np.random.Generator | None = None,
             random_count: int = RANDOM_CYCLES) -> ClassificationResult:
    """Full report; family is 'undetermined' when the cycle theorem does not apply."""
    try:
        return classify_from_cycles(Y, rng, random_count)
    except HypothesisUnmet as exc:
        res = exc.result
        res.notes.append(str(exc))
        return res


def confirm_with_oracle(res: ClassificationResult, Y: Sequence[Transvection],
                        cap: int = 2 * 10 ** 6) -> bool:
    """Closure order of <Y> equals the order of the claimed group."""
    from .oracle import closure_enumerate, group_order
    from .trans import GroupSpec
    F = Y[0].space.field
    n = Y[0].space.n
    if res.family == "undetermined":
        return False
    order = closure_enumerate(F, Y, cap).order
    res.confirmed = order == group_order(GroupSpec.make(res.family, n, F))
    return res.confirmed


# ---------------------------------------------------------------------------

@dataclass
class GroupDescriptor:
    field: Subfield
    exceptional: bool
    order: int | None

    def to_json(self) -> dict:
        return {"field": self.field.to_json(), "exceptional": self.exceptional,
                "order": self.order}


def dickson_pair(s: Transvection, K: Subfield, t: Transvection,
                 Lam: Sequence[int]) -> GroupDescriptor:
    """<s^K, t^Lam> is SL(2, M) on span(u_s, u_t) for M = F_p(K, Lam, w(s,t)), unless M = GF(9)."""
    S, F = s.space, s.space.field
    a, b = S.pair(t.phi, s.u), S.pair(s.phi, t.u)
    if a == 0 or b == 0:
        raise NotTwoWayEdge("(s, t) must be a two-way edge")
    delta = F.mul(a, b)
    M = subfield_generated_int(F, [delta] + list(Lam)).join(K)
    exceptional = M.size == 9
    r = M.size
    return GroupDescriptor(M, exceptional, None if exceptional else r * (r * r - 1))


def dickson_delta(F: Field) -> int:
    """Least nonzero element (coefficient order, low degree first) generating F as a field."""
    cands = [a for a in range(1, F.q) if subfield_generated_int(F, [a]).is_full()]
    return min(cands, key=F.coeffs)
