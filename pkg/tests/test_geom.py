import numpy as np
import pytest
from hypothesis import given, strategies as st

from artifact.errors import DimensionMismatch
from artifact.geom import (Form, VectorSpace, form_eval, is_singular, phi_u,
                           preserves_form, radical, singular_points)
from artifact.gf import GF
from artifact.trans import GroupSpec, all_transvections, tv_matrix


def herm(q, n):
    return Form.hermitian(VectorSpace(GF(q, unitary=True), n))


def sympl(q, n):
    return Form.symplectic(VectorSpace(GF(q), n))


def test_alternating_vanishes_on_diagonal():
    f = sympl(5, 4)
    for v in f.space.points():
        assert form_eval(f, v, v) == 0
        assert is_singular(f, v)


def test_hermitian_evaluation_gf9():
    f = herm(9, 2)
    F, S = f.space.field, f.space
    x = F.elem([0, 1])
    w = (1, x)
    assert form_eval(f, S.e(0), w) == 1
    assert form_eval(f, S.e(1), w) == x
    assert form_eval(f, w, S.e(1)) == F.elem([0, 2])


def test_phi_of_scaled_basis_vector():
    f = herm(9, 3)
    F = f.space.field
    x = F.elem([0, 1])
    assert phi_u(f, (x, 0, 0)) == (F.elem([0, 2]), 0, 0)


def test_singular_hermitian_vector():
    f = herm(9, 2)
    F = f.space.field
    v = (1, F.elem([1, 1]))
    assert is_singular(f, v)
    assert not is_singular(f, (1, 0))


def test_radical_of_degenerate_plane_in_three_space():
    f = sympl(5, 4)
    S, F = f.space, f.space.field
    a, b, c = S.e(0), S.e(2), (0, 1, 0, 1)
    assert form_eval(f, a, b) == 0
    fca, fcb = form_eval(f, c, a), form_eval(f, c, b)
    assert fca and fcb
    rad = radical(f, [a, b, c])
    assert len(rad) == 1
    w = S.axpy(F.neg(fcb), a, S.scale(fca, b))
    w_norm, _ = S.normalize(w)
    assert rad[0] == w_norm


def test_radical_of_nondegenerate_span_is_empty():
    f = herm(25, 3)
    assert radical(f, [f.space.e(i) for i in range(3)]) == []


def test_singular_point_counts():
    # (q0^n - (-1)^n)(q0^(n-1) - (-1)^(n-1)) / (q - 1) singular points for unitary
    f = herm(9, 3)
    assert len(singular_points(f)) == 28
    assert len(singular_points(sympl(3, 4))) == 40


def test_form_validation():
    S = VectorSpace(GF(5), 3)
    with pytest.raises(ValueError):
        Form.symplectic(S)
    with pytest.raises(ValueError):
        Form(VectorSpace(GF(5), 2), "symplectic", np.array([[1, 1], [4, 0]]))
    with pytest.raises(ValueError):
        Form.hermitian(S)
    with pytest.raises(DimensionMismatch):
        form_eval(sympl(5, 4), (1, 0), (0, 1))


def test_group_transvections_preserve_form():
    for spec in (GroupSpec.make("Sp", 4, GF(3)), GroupSpec.make("SU", 3, GF(9))):
        for t in all_transvections(spec)[::7]:
            assert preserves_form(spec.form, tv_matrix(t))


@st.composite
def form_and_vectors(draw):
    f = draw(st.sampled_from([sympl(3, 4), sympl(5, 2), herm(9, 3), herm(25, 2)]))
    q, n = f.space.field.q, f.space.n
    vec = st.tuples(*[st.integers(0, q - 1)] * n)
    return f, draw(vec), draw(vec), draw(st.integers(0, q - 1))


@given(form_and_vectors())
def test_form_symmetry(data):
    f, u, v, _ = data
    F = f.space.field
    if f.sesqui:
        assert form_eval(f, v, u) == F.frob(form_eval(f, u, v))
    else:
        assert form_eval(f, v, u) == F.neg(form_eval(f, u, v))


@given(form_and_vectors())
def test_linear_in_second_argument(data):
    f, u, v, lam = data
    F, S = f.space.field, f.space
    assert form_eval(f, u, S.scale(lam, v)) == F.mul(lam, form_eval(f, u, v))
    assert form_eval(f, u, S.add(u, v)) == F.add(form_eval(f, u, u), form_eval(f, u, v))


@given(form_and_vectors())
def test_phi_is_injective(data):
    f, u, v, _ = data
    if u != v:
        assert phi_u(f, u) != phi_u(f, v)
