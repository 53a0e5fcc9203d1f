import numpy as np
import pytest
from hypothesis import given, strategies as st

from artifact.acceptance import glued_instance
from artifact.errors import NotTwoWayCycle
from artifact.geom import VectorSpace
from artifact.gf import GF
from artifact.graph import (L_k, P_u, af_coeffs, af_conjugate, build_graph, cycle_weights, d_s,
                            d_u, eval_quad, find_cycle, graph_metrics, simple_cycles, weight)
from artifact.trans import GroupSpec, all_transvections, random_transvection, tv_make


def three_cycle():
    S = VectorSpace(GF(5), 3)
    e = S.e
    return build_graph([tv_make(S, e(0), e(1)), tv_make(S, e(2), e(0)), tv_make(S, e(1), e(2))])


def two_cycle_gf9():
    F = GF(9, unitary=True)
    S = VectorSpace(F, 3)
    delta = F.elem([1, 1])
    return build_graph([tv_make(S, S.e(0), S.e(1)), tv_make(S, S.e(1, delta), S.e(0))]), delta


def test_one_way_three_cycle():
    g = three_cycle()
    assert g.adj.sum() == 3
    assert g.adj[0, 1] and g.adj[1, 2] and g.adj[2, 0]
    assert not g.twoway.any()
    assert weight(g, (0, 1, 2)) == 1
    assert weight(g, (0, 2, 1)) == 0
    assert d_s(g, (0, 1, 2)) == 1
    with pytest.raises(NotTwoWayCycle):
        P_u(g, (0, 1, 2))
    m = graph_metrics(g)
    assert m["strongly_connected"] and m["diameter"] == 2
    assert not m["twoway_connected"]


def test_two_cycle_weight_and_discriminants():
    g, delta = two_cycle_gf9()
    F = g.field
    assert weight(g, (0, 1)) == delta
    assert d_s(g, (0, 1)) == 0
    assert d_u(g, (0, 1)) == F.sub(delta, F.frob(delta))
    assert d_u(g, (0, 1)) != 0
    assert P_u(g, (0, 1)) == F.pow(F.inv(delta), 2)
    assert P_u(g, (0, 1)) != 1
    assert L_k(g, 2).size == 9


def test_two_cycle_in_prime_field_is_unitary():
    F = GF(9, unitary=True)
    S = VectorSpace(F, 3)
    g = build_graph([tv_make(S, S.e(0), S.e(1)), tv_make(S, S.e(1, 2), S.e(0))])
    assert d_u(g, (0, 1)) == 0
    assert P_u(g, (0, 1)) == 1
    assert L_k(g, 2).size == 3


def test_af_with_orthogonal_pair():
    S = VectorSpace(GF(25), 3)
    e = S.e
    Y = [tv_make(S, e(0), e(1)), tv_make(S, e(1), e(2)), tv_make(S, e(2), e(0)),
         tv_make(S, e(2), e(1))]
    g = build_graph(Y)
    assert weight(g, (2, 3)) == 0
    c = af_coeffs(g, 0, 1, 2, 3)
    assert c.C == 0 and c.F == 0


def test_cycle_enumeration_counts():
    # Gamma of all SL(3,3) transvections: every simple cycle found once
    spec = GroupSpec.make("SL", 3, GF(3))
    Y = all_transvections(spec)[:12]
    g = build_graph(Y)
    cycles = list(simple_cycles(g, 3))
    assert len(cycles) == len(set(cycles))
    for c in cycles:
        assert weight(g, c) != 0
    weights = {weight(g, c) for c in cycles if len(c) <= 3}
    assert weights <= cycle_weights(g, 3)


def test_find_cycle_respects_predicate():
    g, delta = two_cycle_gf9()
    K = g.field.prime_subfield()
    assert find_cycle(g, 3, lambda w: not K.contains(w)) == (0, 1)
    assert find_cycle(g, 3, lambda w: False) is None


def test_dot_export():
    dot = three_cycle().to_dot()
    assert dot.startswith("digraph")
    assert "v0 -> v1;" in dot


@st.composite
def graphs(draw, qs=(5, 9, 25), size=(3, 7)):
    q = draw(st.sampled_from(qs))
    S = VectorSpace(GF(q), 3)
    rng = np.random.default_rng(draw(st.integers(0, 2 ** 32 - 1)))
    Y = [random_transvection(S, rng) for _ in range(draw(st.integers(*size)))]
    return build_graph(Y), rng


@given(graphs())
def test_weight_is_cyclic_invariant(data):
    g, rng = data
    m = len(g)
    tup = tuple(int(i) for i in rng.integers(0, m, 4))
    assert weight(g, tup) == weight(g, tup[1:] + tup[:1])


@given(graphs())
def test_weight_independent_of_representatives(data):
    g, rng = data
    F, S = g.field, g.space
    tup = tuple(int(i) for i in rng.integers(0, len(g), 3))
    # rescaling (u, phi) -> (lam u, lam^-1 phi) leaves labels around a cycle unchanged
    lams = [int(rng.integers(1, F.q)) for _ in g.verts]
    labs = [[F.mul(S.pair(S.scale(F.inv(lams[t]), g.verts[t].phi),
                          S.scale(lams[s], g.verts[s].u)), 1)
             for t in range(len(g))] for s in range(len(g))]
    w = 1
    for i in range(3):
        w = F.mul(w, labs[tup[i]][tup[(i + 1) % 3]])
    assert w == weight(g, tup)


@given(st.sampled_from([("Sp", 4, 3), ("Sp", 4, 5), ("SU", 3, 9), ("SU", 3, 25)]),
       st.integers(0, 2 ** 32 - 1))
def test_classical_cycle_laws(group, seed):
    family, n, q = group
    spec = GroupSpec.make(family, n, GF(q))
    ts = all_transvections(spec)
    rng = np.random.default_rng(seed)
    g = build_graph([ts[i] for i in rng.choice(len(ts), 8, replace=False)])
    law = d_s if family == "Sp" else d_u
    for cyc in simple_cycles(g, 4):
        assert law(g, cyc) == 0
        if family == "SU" and all(g.adj[b, a] for a, b in zip(cyc, cyc[1:] + cyc[:1])):
            assert P_u(g, cyc) == (1 if len(cyc) % 2 == 0 else g.field.neg(1))


@given(graphs(qs=(25,), size=(4, 4)))
def test_af_identities(data):
    g, _ = data
    F = g.field
    S4 = g.verts
    c = af_coeffs(g, 0, 1, 2, 3)
    small = F.subfield_q0() if F.unitary else F.subfield(1)
    for lam in range(F.q):
        s3 = af_conjugate(S4[2], S4[3], lam)
        h = build_graph([S4[0], S4[1], s3])
        assert weight(h, (0, 1, 2)) == eval_quad(F, c.A, c.B, c.C, lam)
        if small.contains(lam):
            assert d_u(h, (0, 1, 2)) == eval_quad(F, c.D, c.E, c.F, lam)


@given(st.sampled_from([9, 25]), st.integers(0, 2 ** 32 - 1))
def test_gluing_law(q, seed):
    F = GF(q)
    ts, big, first, second = glued_instance(F, np.random.default_rng(seed))
    g = build_graph(ts)
    assert P_u(g, big) == F.mul(P_u(g, first), P_u(g, second))
