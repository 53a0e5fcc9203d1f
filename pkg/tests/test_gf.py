import pytest
from hypothesis import given, strategies as st

from artifact.errors import DivisionByZero, FieldMismatch
from artifact.gf import (GF, Field, FieldElement, canonical_modulus, ff_arithmetic,
                         frobenius_q0, in_subfield, is_irreducible, subfield_generated,
                         subfield_generated_int, trace_q0)

ORDERS = [3, 5, 7, 9, 25, 27, 49, 81, 125, 2187]


def poly_mul_mod(F, a, b):
    """Schoolbook product of coefficient lists reduced by the modulus."""
    p, m = F.p, list(F.modulus)
    ca, cb = F.coeffs(a), F.coeffs(b)
    prod = [0] * (2 * F.k - 1)
    for i, x in enumerate(ca):
        for j, y in enumerate(cb):
            prod[i + j] = (prod[i + j] + x * y) % p
    for d in range(len(prod) - 1, F.k - 1, -1):
        c = prod[d]
        if c:
            for i, mc in enumerate(m):
                prod[d - F.k + i] = (prod[d - F.k + i] - c * mc) % p
    return F.elem(prod[:F.k])


fields = st.sampled_from(ORDERS).map(GF)


@st.composite
def field_and_elems(draw, count=2):
    F = draw(fields)
    return (F,) + tuple(draw(st.integers(0, F.q - 1)) for _ in range(count))


def test_gf9_generator_powers():
    F = GF(9)
    assert F.modulus == (1, 0, 1)
    a = F.add(F.elem([0, 1]), 1)
    assert F.pow(a, 8) == 1
    assert F.pow(a, 4) == F.elem(2)
    assert F.order(a) == 8


def test_gf9_frobenius_and_trace():
    F = GF(9, unitary=True)
    x = F.elem([0, 1])
    assert F.frob(x) == F.elem([0, 2])
    assert F.trace(x) == 0
    assert F.trace(1) == 2


def test_subfield_generated_examples():
    F81 = GF(81)
    g = F81.primitive_element()
    assert subfield_generated_int(F81, [F81.pow(g, 10)]).size == 9
    F9 = GF(9)
    assert subfield_generated_int(F9, [F9.elem([0, 1])]).size == 9
    assert subfield_generated_int(F9, [1, 2]).size == 3


def test_x_not_in_prime_subfield():
    F = GF(9)
    x = FieldElement(F, [0, 1])
    assert not in_subfield(x, F.prime_subfield())
    assert in_subfield(x, F.full())


def test_even_characteristic_rejected():
    with pytest.raises(ValueError):
        GF(4)
    with pytest.raises(ValueError):
        GF(12)


def test_reducible_modulus_rejected():
    with pytest.raises(ValueError):
        Field(3, 2, (2, 0, 1))  # x^2 - 1


def test_canonical_moduli_irreducible():
    for p, k in [(3, 2), (3, 4), (5, 2), (3, 3), (7, 2), (3, 7)]:
        assert is_irreducible(canonical_modulus(p, k), p)


def test_division_by_zero():
    F = GF(25)
    with pytest.raises(DivisionByZero):
        F.inv(0)


def test_mixed_fields_refused():
    a, b = FieldElement(GF(9), 1), FieldElement(GF(25), 1)
    with pytest.raises(FieldMismatch):
        ff_arithmetic(a, b, "add")
    with pytest.raises(FieldMismatch):
        subfield_generated([a, b])


def test_json_round_trip():
    F = GF(25, unitary=True)
    assert Field.from_json(F.to_json()) == F
    for a in range(F.q):
        assert F.elem_from_json(F.elem_to_json(a)) == a


@given(field_and_elems())
def test_mul_matches_polynomial_oracle(data):
    F, a, b = data
    assert F.mul(a, b) == poly_mul_mod(F, a, b)


@given(field_and_elems(3))
def test_field_axioms(data):
    F, a, b, c = data
    assert F.add(a, F.add(b, c)) == F.add(F.add(a, b), c)
    assert F.mul(a, F.mul(b, c)) == F.mul(F.mul(a, b), c)
    assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
    assert F.add(a, F.neg(a)) == 0
    assert F.sub(a, b) == F.add(a, F.neg(b))
    if a:
        assert F.mul(a, F.inv(a)) == 1
        assert F.pow(a, F.q - 1) == 1


@given(field_and_elems())
def test_frobenius_is_additive_and_multiplicative(data):
    F, a, b = data
    if F.k % 2:
        return
    F = F.with_q0(F.sqrt_q())
    assert F.frob(F.add(a, b)) == F.add(F.frob(a), F.frob(b))
    assert F.frob(F.mul(a, b)) == F.mul(F.frob(a), F.frob(b))
    assert F.frob(F.frob(a)) == a
    assert F.frob(F.trace(a)) == F.trace(a)


@given(field_and_elems())
def test_wrapper_agrees_with_codes(data):
    F, a, b = data
    A, B = FieldElement(F, a), FieldElement(F, b)
    assert ff_arithmetic(A, B, "add").value == F.add(a, b)
    assert ff_arithmetic(A, B, "mul").value == F.mul(a, b)
    assert ff_arithmetic(A, 5, "pow").value == F.pow(a, 5)
    if b:
        assert ff_arithmetic(A, B, "div").value == F.div(a, b)


@given(st.sampled_from([9, 25, 49, 81]).map(lambda q: GF(q, unitary=True)), st.data())
def test_q0_maps_land_in_fixed_field(F, data):
    a = FieldElement(F, data.draw(st.integers(0, F.q - 1)))
    K = F.subfield_q0()
    assert in_subfield(trace_q0(a), K)
    assert in_subfield(a * frobenius_q0(a), K)


@given(field_and_elems(1))
def test_generated_subfield_is_least(data):
    F, a = data
    K = subfield_generated_int(F, [a])
    assert K.contains(a)
    for d in range(1, F.k + 1):
        if F.k % d == 0 and F.subfield(d).contains(a):
            assert K <= F.subfield(d)


@given(st.sampled_from([9, 25, 81, 125]).map(GF), st.data())
def test_vectorized_ops_match_scalar(F, data):
    import numpy as np
    xs = data.draw(st.lists(st.integers(0, F.q - 1), min_size=1, max_size=12))
    ys = data.draw(st.lists(st.integers(0, F.q - 1), min_size=len(xs), max_size=len(xs)))
    a, b = np.array(xs), np.array(ys)
    assert list(F.vadd(a, b)) == [F.add(x, y) for x, y in zip(xs, ys)]
    assert list(F.vmul(a, b)) == [F.mul(x, y) for x, y in zip(xs, ys)]
    assert list(F.vsub(a, b)) == [F.sub(x, y) for x, y in zip(xs, ys)]
