import pytest
from hypothesis import given, strategies as st

from torus_growth.polynomial_core import (IntPoly, LaurentPoly, LaurentTuple, division_step,
                                          divergence, head_len, norm_inf, norm_one,
                                          partition_at_height, poly_arith, tail_len,
                                          tuple_divergence, tuple_divides)

laurent = st.dictionaries(st.integers(-6, 6), st.integers(-5, 5), max_size=6).map(LaurentPoly)


def test_zero_coefficients_dropped():
    f = LaurentPoly({-2: 3, 0: 0, 4: -1})
    assert f.support() == [-2, 4]
    assert f.low == -2 and f.high == 4
    assert LaurentPoly({1: 0}).is_zero()


def test_product_by_hand():
    # (z^-1 + 2)(z - 1) = 1 - z^-1 + 2z - 2
    f = LaurentPoly({-1: 1, 0: 2}) * LaurentPoly({1: 1, 0: -1})
    assert f == LaurentPoly({-1: -1, 0: -1, 1: 2})


def test_norms():
    f = LaurentPoly({-3: 4, 2: -7, 5: 1})
    assert norm_inf(f) == 7
    assert norm_one(f) == 12
    t = LaurentTuple((f, LaurentPoly({0: -9})))
    assert norm_inf(t) == 9 and norm_one(t) == 21


def test_partition_positive_height():
    f = LaurentPoly({-2: 1, 0: 2, 3: 1, 5: 4})
    part = partition_at_height(f, 3)
    assert part.tail == LaurentPoly({-2: 1})
    assert part.center == LaurentPoly({0: 2, 3: 1})
    assert part.head == LaurentPoly({5: 4})
    assert tail_len(f, 3) == 2 and head_len(f, 3) == 2


def test_partition_negative_height_mirrors():
    f = LaurentPoly({-5: 1, -2: 1, 1: 3})
    part = partition_at_height(f, -3)
    assert part.tail == LaurentPoly({-5: 1})
    assert part.center == LaurentPoly({-2: 1})
    assert part.head == LaurentPoly({1: 3})
    assert tail_len(f, -3) == 2 and head_len(f, -3) == 1


def test_tuple_lengths_take_max():
    t = LaurentTuple((LaurentPoly({-1: 1}), LaurentPoly({-4: 2, 7: 1})))
    assert tail_len(t, 2) == 4
    assert head_len(t, 2) == 5


def test_divergence_by_hand():
    f = LaurentPoly({0: 3, 1: 1})
    g = LaurentPoly({0: 1, 2: 5})
    # running excess: 2, 3, -2
    assert divergence(f, g) == 3
    # and the other way: -2, -3, 2
    assert divergence(g, f) == 2
    assert divergence(f, f) == 0


def test_tuple_divides_exact_and_not():
    p = IntPoly((1, -3, 1))
    q = LaurentPoly({-2: 2, 1: -1})
    d = LaurentTuple((p.to_laurent() * q,))
    assert tuple_divides([p], d) == LaurentTuple((q,))
    assert tuple_divides([p], LaurentTuple((LaurentPoly({0: 1}),))) is None


def test_division_step_reduces_mod_p():
    p = IntPoly((1, -3, 1))
    # z * z + 0 = z^2 = 3z - 1 mod p
    assert division_step(LaurentPoly({1: 1}), 0, p) == LaurentPoly({0: -1, 1: 3})
    with pytest.raises(ValueError):
        division_step(LaurentPoly(), 1, IntPoly((1, 1, 2)))


def test_poly_arith_dispatch():
    a, b = LaurentPoly({0: 1}), LaurentPoly({1: 1})
    assert poly_arith(a, b, "add") == a + b
    assert poly_arith(a, b, "sub") == a - b
    assert poly_arith(a, b, "mul") == b
    with pytest.raises(ValueError):
        poly_arith(a, b, "div")


def test_intpoly_trims_and_reciprocal():
    p = IntPoly((1, -3, 1, 0, 0))
    assert p.coeffs == (1, -3, 1) and p.degree == 2
    assert IntPoly((2, 0, 1)).reciprocal().coeffs == (1, 0, 2)


@given(laurent, laurent, laurent)
def test_ring_laws(f, g, h):
    assert (f + g) * h == f * h + g * h
    assert f * g == g * f
    assert (f - f).is_zero()


@given(laurent, st.integers(-4, 4))
def test_shift_multiplies_by_monomial(f, m):
    assert f.shift(m) == f * LaurentPoly.monomial(m)
    assert f.shift(m)(2) == pytest.approx(f(2) * 2.0 ** m)


@given(laurent, laurent)
def test_divergence_nonnegative_and_subadditive(f, g):
    assert divergence(f, g) >= 0
    assert divergence(f, g) <= norm_one(f)


@given(laurent, st.integers(-5, 5))
def test_partition_reassembles(f, h):
    part = partition_at_height(f, h)
    assert part.tail + part.center + part.head == f


@given(st.lists(laurent, min_size=2, max_size=2), st.lists(laurent, min_size=2, max_size=2))
def test_tuple_divergence_zero_on_self(a, b):
    t = LaurentTuple(tuple(a))
    assert tuple_divergence(t, t) == 0
    assert tuple_divergence(t, LaurentTuple(tuple(b))) >= 0


@given(laurent)
def test_divisibility_roundtrip(q):
    p = IntPoly((1, -3, 1))
    d = LaurentTuple((p.to_laurent() * q,))
    assert tuple_divides([p], d) == LaurentTuple((q,))
