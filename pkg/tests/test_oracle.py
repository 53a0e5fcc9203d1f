import numpy as np
import pytest
from hypothesis import given, strategies as st

from artifact import linalg
from artifact.errors import CapExceeded, TooLarge, UnreachableTrace
from artifact.geom import VectorSpace
from artifact.gf import GF
from artifact.oracle import (block_word_search, bidirectional_distance, cayley_diameter,
                             cayley_diameter_bidirectional, closure_enumerate,
                             delinearize, dickson_generators, group_order,
                             invariant_subspace_search, linearize, matrix_trace, trace_witness)
from artifact.trans import GroupSpec, all_transvections, random_transvection, tv_make, tv_matrix


def spec(family, n, q):
    return GroupSpec.make(family, n, GF(q))


def generating_transvections(s):
    """Every group transvection; enough for closure to reach the whole group."""
    return [tv_matrix(t) for t in all_transvections(s)]


@pytest.mark.parametrize("family,n,q,order", [("SL", 3, 3, 5616), ("Sp", 4, 3, 51840),
                                              ("SU", 3, 9, 6048), ("SL", 2, 5, 120),
                                              ("SL", 2, 9, 720)])
def test_group_order_matches_closure(family, n, q, order):
    s = spec(family, n, q)
    assert group_order(s) == order
    assert closure_enumerate(s.field, generating_transvections(s)).order == order


def test_dickson_pairs():
    F5, F7 = GF(5), GF(7)
    assert closure_enumerate(F5, dickson_generators(F5, 2)).order == 120
    assert closure_enumerate(F7, dickson_generators(F7, 3)).order == 336
    F9 = GF(9)
    assert closure_enumerate(F9, dickson_generators(F9, F9.elem([0, 1]))).order == 120


def test_closure_words_evaluate():
    F = GF(3)
    gens = dickson_generators(F, 1)
    res = closure_enumerate(F, gens)
    for i in range(0, res.order, 5):
        m = linalg.identity(2)
        for gi in res.word(i):
            m = linalg.matmul(F, m, gens[gi])
        assert np.array_equal(m, res.matrix(i))
        assert res.contains(m)


def test_cap_is_enforced():
    F = GF(5)
    with pytest.raises(CapExceeded):
        closure_enumerate(F, dickson_generators(F, 2), cap=50)
    res = closure_enumerate(F, dickson_generators(F, 2), cap=50, allow_truncate=True)
    assert res.truncated


def test_sl23_diameter_two_ways():
    F = GF(3)
    gens = dickson_generators(F, 1)
    assert cayley_diameter(F, gens) == 4
    assert cayley_diameter_bidirectional(F, gens) == 4


def test_bidirectional_distance_to_identity():
    F = GF(5)
    assert bidirectional_distance(F, dickson_generators(F, 1), linalg.identity(2)) == 0


def test_block_search_reaches_sl25():
    F = GF(5)
    gens = dickson_generators(F, 1)
    all_elems = closure_enumerate(F, gens)
    targets = [all_elems.matrix(i) for i in range(all_elems.order)]
    res = block_word_search(F, gens, targets)
    assert len(res.words) == 120
    assert res.max_length == cayley_diameter(F, gens)
    inv = [linalg.inverse(F, g) for g in gens]
    for w, t in zip(res.words, targets):
        m = linalg.identity(2)
        for gi, sgn in w:
            m = linalg.matmul(F, m, gens[gi] if sgn > 0 else inv[gi])
        assert np.array_equal(m, t)


def test_block_search_on_unitary_subgroup():
    s = spec("SU", 3, 9)
    ts = all_transvections(s)
    gens = [tv_matrix(t) for t in ts[:6]]
    targets = [tv_matrix(t) for t in ts[6:12]]
    grp = closure_enumerate(s.field, gens)
    reachable = [t for t in targets if grp.contains(t)]
    res = block_word_search(s.field, gens, reachable)
    assert len(res.words) == len(reachable)


def test_block_search_on_invariant_block():
    F = GF(5)
    S = VectorSpace(F, 3)
    gens = [tv_matrix(tv_make(S, S.e(0), S.e(1))), tv_matrix(tv_make(S, S.e(1), S.e(0)))]
    target = tv_matrix(tv_make(S, S.e(0), S.e(1, 3)))
    W = np.array([S.e(0), S.e(1)])
    res = block_word_search(F, gens, [target], W)
    assert len(res.words) == 1 and res.words[0]


def test_target_outside_group():
    F = GF(5)
    S = VectorSpace(F, 2)
    gens = [tv_matrix(tv_make(S, S.e(0), S.e(1)))]
    with pytest.raises(ValueError):
        block_word_search(F, gens, [tv_matrix(tv_make(S, S.e(1), S.e(0)))])


def test_invariant_subspaces_small():
    F = GF(3)
    S = VectorSpace(F, 2)
    Y = [tv_matrix(tv_make(S, S.e(0), S.e(1))), tv_matrix(tv_make(S, S.e(1), S.e(0)))]
    assert invariant_subspace_search(F, 2, Y)
    assert not invariant_subspace_search(F, 2, Y[:1])
    with pytest.raises(TooLarge):
        invariant_subspace_search(GF(125), 3, Y)


@pytest.mark.parametrize("family,n,q,lam", [("SL", 3, 3, 0), ("SL", 4, 5, 3),
                                            ("Sp", 4, 3, 2), ("Sp", 6, 5, 1)])
def test_trace_witness(family, n, q, lam):
    s = spec(family, n, q)
    g = trace_witness(s, lam)
    assert matrix_trace(s.field, g) == lam
    assert linalg.det(s.field, g) == 1
    assert s.contains_matrix(g)


def test_unitary_trace_witness():
    s = spec("SU", 3, 9)
    F = s.field
    b = F.primitive_element()
    lam = F.neg(F.mul(b, b))
    g = trace_witness(s, lam, b)
    assert matrix_trace(F, g) == lam
    assert s.contains_matrix(g)
    with pytest.raises(UnreachableTrace):
        trace_witness(s, 1, b)


@given(st.sampled_from([(5, 2), (9, 2), (3, 3), (25, 2)]), st.integers(0, 2 ** 32 - 1))
def test_linearization_is_a_homomorphism(fq, seed):
    q, n = fq
    F = GF(q)
    rng = np.random.default_rng(seed)
    S = VectorSpace(F, n)
    a = tv_matrix(random_transvection(S, rng))
    b = tv_matrix(random_transvection(S, rng))
    ab = linalg.matmul(F, a, b)
    big = (linearize(F, a) @ linearize(F, b)) % F.p
    assert np.array_equal(big, linearize(F, ab) % F.p)
    assert np.array_equal(delinearize(F, linearize(F, a), n), a)


@given(st.integers(0, 2 ** 32 - 1))
def test_closure_order_divides_group_order(seed):
    s = spec("SL", 3, 3)
    rng = np.random.default_rng(seed)
    gens = [tv_matrix(random_transvection(s.space, rng)) for _ in range(2)]
    assert group_order(s) % closure_enumerate(s.field, gens).order == 0
