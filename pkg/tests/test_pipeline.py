import copy
import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from artifact import linalg
from artifact import pipeline as pl
from artifact.acceptance import random_generating_set
from artifact.errors import HypothesisUnmet, NotInGroup, NotSingular, UnsupportedQ
from artifact.geom import form_eval, is_singular
from artifact.gf import GF
from artifact.graph import L_k, build_graph, d_u, weight
from artifact.oracle import closure_enumerate
from artifact.trans import (GroupSpec, all_transvections, tv_conjugate, tv_make, tv_matrix,
                            tv_power, tv_subgroup)


def spec(family, n, q):
    return GroupSpec.make(family, n, GF(q))


def staged(s, seed, upto="close"):
    """Run the stages in order up to and including ``upto``."""
    X = random_generating_set(s, np.random.default_rng(seed))
    gs = pl.GenSet.from_transvections(X, s)
    pl.extend_diameter2(gs)
    if upto == "diameter2":
        return gs
    pl.extend_twoway6(gs)
    if upto == "twoway6":
        return gs
    pl.boost_L3(gs)
    if upto == "L3":
        return gs
    if s.family != "SL":
        pl.fix_L2_sympunit(gs)
    pl.close_over_M(gs)
    return gs


def full_directions(gs):
    """Directions v whose whole subgroup T_v lies in gs."""
    out = []
    for u in sorted({t.u for t in gs.elems}):
        if all(t in gs.index for t in tv_subgroup(u, gs.spec).elements()):
            out.append(u)
    return out


def words_verify(gs, indices):
    return all(np.array_equal(gs.evaluate(gs.words[i]), tv_matrix(gs.elems[i])) for i in indices)


@pytest.fixture(scope="module")
def sp43_full():
    s = spec("Sp", 4, 3)
    return pl.synthesize(s, random_generating_set(s, np.random.default_rng(43)))


@pytest.fixture(scope="module")
def su33_full():
    s = spec("SU", 3, 9)
    return pl.synthesize(s, random_generating_set(s, np.random.default_rng(33)))


@pytest.fixture(scope="module")
def sp43_closed():
    return staged(spec("Sp", 4, 3), 7)


# -- words -------------------------------------------------------------------------

def test_word_reduction_and_inverse():
    w = pl.Word([(0, 1), (1, 1), (2, -1)])
    assert len(w + w.inverse()) == 0
    assert (w + pl.Word([(2, 1), (3, 1)])).letters == ((0, 1), (1, 1), (3, 1))
    assert pl.Word.from_json(w.to_json()) == w
    assert len(w ** 3) == 9 and len(w ** -2) == 6


@given(st.lists(st.tuples(st.integers(0, 2), st.sampled_from([1, -1])), max_size=8),
       st.lists(st.tuples(st.integers(0, 2), st.sampled_from([1, -1])), max_size=8))
def test_word_concatenation_evaluates_to_product(a, b):
    F = GF(5)
    s = spec("SL", 3, 5)
    ts = all_transvections(s)
    mats = [tv_matrix(ts[i]) for i in (0, 17, 40)]
    invs = [linalg.inverse(F, m) for m in mats]
    wa, wb = pl.Word(a), pl.Word(b)
    lhs = (wa + wb).evaluate(F, mats, invs)
    rhs = linalg.matmul(F, wa.evaluate(F, mats, invs), wb.evaluate(F, mats, invs))
    assert np.array_equal(lhs, rhs)


# -- generating sets ---------------------------------------------------------------------

def test_genset_conjugates_and_local_lengths():
    s = spec("SL", 3, 5)
    S = s.space
    X = [tv_make(S, S.e(0), S.e(1)), tv_make(S, S.e(1), S.e(2)), tv_make(S, S.e(2), S.e(0))]
    gs = pl.GenSet.from_transvections(X, s)
    base = len(gs)
    i = gs.add_conjugate(0, 1)
    j = gs.add_conjugate(i, 2, inverse=True)
    assert gs.elems[i] == tv_conjugate(X[0], X[1])
    assert gs.length(i) == 3 and gs.length(j) == 5
    assert gs.local_length(j, base) == 5
    assert gs.local_length(j, i + 1) == 3
    assert words_verify(gs, range(len(gs)))
    assert gs.add_conjugate(0, 1) == i


def test_seed_from_non_transvection_generator():
    s = spec("SL", 3, 3)
    S, F = s.space, s.field
    t = tv_make(S, S.e(0), S.e(1))
    g = np.array([[0, 0, 1], [1, 0, 1], [0, 1, 0]], dtype=np.int64)
    assert linalg.det(F, g) == 1
    gs = pl.seed_conjugate_class([t, g], s)
    ginv = linalg.inverse(F, g)
    one = linalg.matmul(F, linalg.matmul(F, g, tv_matrix(t)), ginv)
    two = linalg.matmul(F, linalg.matmul(F, g, one), ginv)
    lengths = {}
    for i, e in enumerate(gs.elems):
        m = tv_matrix(e)
        for name, target in (("one", one), ("two", two)):
            if np.array_equal(m, target):
                lengths[name] = gs.length(i)
    assert lengths == {"one": 3, "two": 5}
    assert words_verify(gs, range(len(gs)))


def test_non_generating_input_is_refused():
    s = spec("SL", 3, 5)
    S = s.space
    X = [tv_make(S, S.e(0), S.e(1)), tv_make(S, S.e(1), S.e(2)), tv_make(S, S.e(0), S.e(2))]
    with pytest.raises(HypothesisUnmet):
        pl.extend_diameter2(pl.GenSet.from_transvections(X, s))


# -- stage audits ---------------------------------------------------------------------

def sampled_diameter2(gs, rng, pairs=200):
    T = all_transvections(gs.spec)
    S = gs.space
    for _ in range(pairs):
        a, b = (T[int(k)] for k in rng.integers(len(T), size=2))
        if S.pair(b.phi, a.u):
            continue
        if not any(S.pair(r.phi, a.u) and S.pair(b.phi, r.u) for r in gs.elems):
            return False
    return True


@pytest.mark.parametrize("family,n,q", [("Sp", 4, 3), ("SL", 3, 5), ("SU", 3, 9)])
def test_diameter_two_postcondition(family, n, q, rng):
    gs = staged(spec(family, n, q), 1, "diameter2")
    assert "P6" in gs.flags
    assert pl.audit_diameter2(gs)
    assert sampled_diameter2(gs, rng)
    assert words_verify(gs, range(len(gs)))


def test_directed_three_cycle_gets_diameter_two():
    s = spec("SL", 3, 5)
    S = s.space
    X = [tv_make(S, S.e(0), S.e(1)), tv_make(S, S.e(2), S.e(0)), tv_make(S, S.e(1), S.e(2)),
         tv_make(S, S.e(1), S.e(0))]
    gs = pl.GenSet.from_transvections(X, s)
    pl.extend_diameter2(gs)
    assert pl.audit_diameter2(gs)
    assert sampled_diameter2(gs, np.random.default_rng(0))


def test_twoway_postcondition_exact():
    gs = staged(spec("SL", 3, 5), 2, "twoway6")
    gs.meta.pop("twoway_core", None)
    assert "P7" in gs.flags
    assert pl.audit_twoway6(gs)


def test_form_groups_have_only_twoway_edges():
    gs = staged(spec("SU", 3, 9), 3, "twoway6")
    g = build_graph(gs.elems)
    assert np.array_equal(g.adj, g.twoway)


@pytest.mark.parametrize("family,n,q", [("Sp", 4, 5), ("SU", 3, 9), ("SL", 3, 25)])
def test_field_boost(family, n, q):
    gs = staged(spec(family, n, q), 4, "L3")
    g = build_graph(gs.elems)
    assert L_k(g, 3).is_full()
    assert L_k(g, 2).index_in_full() <= 2


def test_unitary_two_cycles_live_in_fixed_field():
    gs = staged(spec("SU", 3, 9), 5, "L3")
    assert L_k(build_graph(gs.elems), 2).size == 3


@pytest.mark.parametrize("family,n,q", [("Sp", 4, 3), ("SU", 3, 9), ("SL", 3, 5),
                                        ("SL", 3, 25)])
def test_closure_over_base_field(family, n, q):
    gs = staged(spec(family, n, q), 6)
    M = pl.base_field_M(gs)
    assert pl.audit_closed(gs, M)
    for t in gs.elems:
        assert all(tv_power(t, lam) in gs.index for lam in M.nonzero())
    assert words_verify(gs, range(0, len(gs), 3))


def test_base_field_choices():
    assert pl.base_field_M(staged(spec("SU", 3, 9), 6, "L3")).size == 3
    assert pl.base_field_M(staged(spec("SL", 3, 25), 6, "L3")).size == 5
    assert pl.base_field_M(staged(spec("SL", 3, 5), 6, "L3")).size == 5


def test_flags_only_grow():
    s = spec("SL", 3, 5)
    gs = pl.GenSet.from_transvections(random_generating_set(s, np.random.default_rng(8)), s)
    seen = set(gs.flags)
    size = len(gs)
    for stage in (pl.extend_diameter2, pl.extend_twoway6, pl.boost_L3, pl.close_over_M):
        stage(gs)
        assert seen <= gs.flags
        assert len(gs) >= size
        seen, size = set(gs.flags), len(gs)


# -- square-field SL ----------------------------------------------------------------------

@pytest.mark.parametrize("seed", [0, 1, 2])
def test_nonunitary_triangle(seed):
    gs = staged(spec("SL", 3, 25), seed, "L3")
    tri = pl.find_nonunitary_triangle(gs)
    g = build_graph(gs.elems)
    assert len(tri) == 3
    assert d_u(g, tri) != 0


def test_one_way_triangle_returned_directly():
    s = spec("SL", 3, 25)
    S = s.space
    X = [tv_make(S, S.e(0), S.e(1)), tv_make(S, S.e(2), S.e(0)), tv_make(S, S.e(1), S.e(2))]
    X += random_generating_set(s, np.random.default_rng(9))
    gs = pl.GenSet.from_transvections(X, s)
    tri = pl.find_nonunitary_triangle(gs)
    g = build_graph(gs.elems)
    assert d_u(g, tri) != 0


@pytest.mark.parametrize("seed", [0, 3])
def test_two_cycle_outside_base_field(seed):
    gs = staged(spec("SL", 3, 25), seed)
    i, j = pl.find_nonM_2cycle(gs)
    g = build_graph(gs.elems)
    w = weight(g, (i, j))
    assert w != 0 and not pl.base_field_M(gs).contains(w)
    assert words_verify(gs, [i, j])


def test_square_field_helpers_need_square_q():
    gs = staged(spec("SL", 3, 5), 0, "L3")
    with pytest.raises(HypothesisUnmet):
        pl.find_nonunitary_triangle(gs)


# -- form families: additions -------------------------------------------------------------

def test_add_two_parallel_directions(sp43_closed):
    gs = copy.deepcopy(sp43_closed)
    a = full_directions(gs)[0]
    b = a  # a + b = 2a spans the same line
    pl.add_two(gs, a, b)
    assert gs.meta["last_add"]["local_length"] == 1


def test_add_two_symplectic_constants(sp43_closed):
    f = sp43_closed.spec.form
    dirs = full_directions(sp43_closed)
    seen_edge = False
    for a, b in itertools.combinations(dirs[:8], 2):
        gs = copy.deepcopy(sp43_closed)
        pl.add_two(gs, a, b)
        info = gs.meta["last_add"]
        assert words_verify(gs, info["indices"])
        if form_eval(f, a, b):
            seen_edge = True
            assert info["local_length"] <= 3
        assert info["local_length"] <= 21
    assert seen_edge


def test_add_two_requires_members(sp43_closed):
    gs = copy.deepcopy(sp43_closed)
    S = gs.space
    missing = next(v for v in S.points() if v not in full_directions(gs))
    with pytest.raises(HypothesisUnmet):
        pl.add_two(gs, missing, full_directions(gs)[0])


def test_add_two_rejects_nonsingular_sum():
    gs = staged(spec("SU", 3, 9), 2)
    f = gs.spec.form
    dirs = full_directions(gs)
    S = gs.space
    a, b = next((a, b) for a, b in itertools.combinations(dirs, 2)
                if not is_singular(f, S.add(a, b)))
    with pytest.raises(NotSingular):
        pl.add_two(gs, a, b)


def test_unitary_add_two_words_verify():
    gs0 = staged(spec("SU", 3, 9), 2)
    f, S = gs0.spec.form, gs0.space
    done = 0
    for a, b0 in itertools.combinations(full_directions(gs0), 2):
        b = next((S.scale(c, b0) for c in range(1, 9) if is_singular(f, S.add(a, S.scale(c, b0)))),
                 None)
        if b is None:
            continue
        gs = copy.deepcopy(gs0)
        pl.add_two(gs, a, b)
        assert words_verify(gs, gs.meta["last_add"]["indices"])
        done += 1
        if done == 4:
            break
    assert done


def test_split_singular_of_singular_vector():
    s = spec("SU", 3, 9)
    v = next(iter(p for p in s.space.points() if is_singular(s.form, p)))
    assert pl.split_singular(None, [v], s.form) == (0, 0)


SU33_POINTS = [p for p in spec("SU", 3, 9).space.points() if is_singular(spec("SU", 3, 9).form, p)]


@given(st.lists(st.tuples(st.sampled_from(SU33_POINTS), st.integers(1, 8)), min_size=2, max_size=4))
def test_split_singular_leaves_singular_remainder(terms):
    s = spec("SU", 3, 9)
    S, F, f = s.space, s.field, s.form
    vs = [S.scale(c, v) for v, c in terms]
    total = S.zero()
    for v in vs:
        total = S.add(total, v)
    try:
        i, lam = pl.split_singular(None, vs, f)
    except NotSingular:
        return
    assert F.frob(lam) == lam
    rest = S.sub(total, S.scale(lam, vs[i]))
    assert is_singular(f, rest)


def test_add_three_unitary():
    gs0 = staged(spec("SU", 3, 9), 4)
    f, S = gs0.spec.form, gs0.space
    dirs = full_directions(gs0)
    for v1, v2, v3 in itertools.combinations(dirs, 3):
        total = S.add(S.add(v1, v2), v3)
        if any(total) and is_singular(f, total) and linalg.rank(gs0.field, [v1, v2, v3]) == 3:
            gs = copy.deepcopy(gs0)
            pl.add_three(gs, v1, v2, v3)
            assert words_verify(gs, gs.meta["last_add"]["indices"])
            assert gs.meta["last_add"]["route"] in ("trace-zero", "affine", "block")
            return
    pytest.skip("no independent singular triple among the seeded directions")


# -- end to end -------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["sp43_full", "su33_full"])
def test_every_transvection_has_a_word(name, request):
    gs, rep = request.getfixturevalue(name)
    T = all_transvections(gs.spec)
    assert "all" in gs.flags
    assert all(gs.find(t) is not None for t in T)
    assert words_verify(gs, [gs.find(t) for t in T])
    assert rep.max_length == max(len(w) for w in gs.words)


def test_decompose_random_elements(sp43_full, rng):
    gs, _ = sp43_full
    res = closure_enumerate(gs.field, gs.originals)
    for k in rng.choice(res.order, 25, replace=False):
        g = res.matrix(int(k))
        word, factors = pl.decompose_element(gs, g, return_factors=True)
        assert len(factors) <= 4 * 16
        assert np.array_equal(gs.evaluate(word), g)


def test_decompose_rejects_outsiders(sp43_full):
    gs, _ = sp43_full
    # determinant one, but it scales the form on the first hyperbolic plane
    with pytest.raises(NotInGroup):
        pl.decompose_element(gs, np.diag([2, 1, 2, 1]))


def test_synthesis_from_matrices():
    s = spec("SL", 3, 3)
    X = random_generating_set(s, np.random.default_rng(12))
    g = linalg.matmul(s.field, tv_matrix(X[0]), tv_matrix(X[1]))
    gs, rep = pl.synthesize(s, [tv_matrix(X[0]), g] + [tv_matrix(t) for t in X[2:]])
    assert rep.transvection_count >= len(all_transvections(s))
    assert words_verify(gs, range(0, len(gs), 11))


@pytest.mark.parametrize("family,n,q", [("SL", 3, 9), ("Sp", 4, 9), ("SL", 3, 81)])
def test_excluded_fields(family, n, q):
    s = spec(family, n, q)
    S = s.space
    with pytest.raises(UnsupportedQ):
        pl.synthesize(s, [tv_make(S, S.e(0), S.e(1))])


def test_two_cycle_search_when_two_cycles_stay_in_base_field():
    from pathlib import Path
    from artifact.instance import load
    inst = load(Path(__file__).parent.parent / "fixtures" / "sl3_25_l2_prime_field.json")
    s = inst.spec()
    gs = pl.GenSet.from_transvections(inst.transvections(), s)
    for stage in (pl.extend_diameter2, pl.extend_twoway6, pl.boost_L3):
        stage(gs)
    M = pl.base_field_M(gs)
    assert L_k(build_graph(gs.elems), 2) == M
    pl.close_over_M(gs, M)
    i, j = pl.find_nonM_2cycle(gs)
    w = weight(build_graph(gs.elems), (i, j))
    assert w and not M.contains(w)
    assert words_verify(gs, [i, j])
