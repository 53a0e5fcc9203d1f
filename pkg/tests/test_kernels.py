import numpy as np
import pytest
from hypothesis import given, strategies as st

from artifact import kernels
from artifact.gf import GF
from artifact.oracle import dickson_generators, linearize
from artifact.trans import GroupSpec, random_transvection, tv_matrix


def lin_gens(F, mats):
    return np.ascontiguousarray(np.stack([linearize(F, m) for m in mats]).astype(np.uint8))


def test_backend_is_reported():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="extension not built")
@given(st.sampled_from([(3, 3), (5, 2), (9, 2), (7, 2)]), st.integers(0, 2 ** 32 - 1),
       st.integers(50, 3000))
def test_backends_agree(fq, seed, cap):
    q, n = fq
    F = GF(q)
    S = GroupSpec.make("SL", n, F).space
    rng = np.random.default_rng(seed)
    gens = lin_gens(F, [tv_matrix(random_transvection(S, rng)) for _ in range(2)])
    fast = kernels.bfs_closure(gens, F.p, cap)
    slow = kernels.python_bfs_closure(gens, F.p, cap)
    for a, b in zip(fast, slow):
        assert np.array_equal(np.asarray(a), np.asarray(b))


def test_python_backend_counts_sl2():
    F = GF(5)
    elems, parent, gen, depth, trunc = kernels.python_bfs_closure(
        lin_gens(F, dickson_generators(F, 1)), F.p, 10 ** 4)
    assert len(elems) == 120 and not trunc
    assert parent[0] == -1 and depth[0] == 0
