import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wiretap.coremath import (
    FieldMismatchError,
    FieldWord,
    GF2m,
    PrimeField,
    ProbVector,
    binary_entropy,
    default_polynomial,
    entropy_stats,
    from_symbols,
    gf_inv,
    gf_mul,
    is_irreducible,
    to_symbols,
)

GF8 = GF2m(3)


def test_gf8_product_and_inverse():
    a, b = FieldWord(0b010, GF8), FieldWord(0b100, GF8)
    assert gf_mul(a, b).value == 0b011
    assert gf_inv(a).value == 0b101


def test_msb_first_bits():
    assert FieldWord(0b110, GF8).bits == (1, 1, 0)
    assert to_symbols(6, 3).tolist() == [1, 1, 0]


def test_mixing_fields_is_rejected():
    with pytest.raises(FieldMismatchError):
        FieldWord(1, GF8) * FieldWord(1, GF2m(4))


def test_zero_has_no_inverse():
    with pytest.raises(ZeroDivisionError):
        FieldWord(0, GF8).inverse()


def test_reducible_polynomial_rejected():
    with pytest.raises(ValueError):
        GF2m(3, 0b1111)  # (x + 1)^3
    assert not is_irreducible(0b101)  # x^2 + 1 = (x + 1)^2


@pytest.mark.parametrize("l", range(1, 17))
def test_default_polynomials_are_irreducible(l):
    poly = default_polynomial(l)
    assert poly.bit_length() - 1 == l
    assert is_irreducible(poly)


def test_table_and_reference_products_agree():
    f = GF2m(8)
    a = np.arange(256)[:, None]
    b = np.arange(256)[None, :]
    np.testing.assert_array_equal(f.mul(a, b), f.mul_reference(a, b))


@given(st.integers(1, 12), st.data())
def test_field_axioms(l, data):
    f = GF2m(l)
    elem = st.integers(0, f.order - 1)
    a, b, c = data.draw(elem), data.draw(elem), data.draw(elem)
    mul = lambda x, y: int(f.mul(x, y))
    assert mul(a, b) == mul(b, a)
    assert mul(mul(a, b), c) == mul(a, mul(b, c))
    assert mul(a, b ^ c) == mul(a, b) ^ mul(a, c)
    assert mul(a, 1) == a
    if a:
        assert mul(a, f.inv(a)) == 1


@given(st.sampled_from([2, 3, 5, 7]), st.data())
def test_prime_field_inverse(p, data):
    a = data.draw(st.integers(1, p - 1))
    f = PrimeField(p)
    assert f.mul(a, f.inv(a)) == 1


def test_binary_entropy_values():
    assert binary_entropy(0.2) == pytest.approx(0.721928, abs=1e-6)
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(0.5) == 1.0
    with pytest.raises(ValueError):
        binary_entropy(1.5)


def test_uniform_entropy_stats():
    stats = entropy_stats(ProbVector.uniform(8))
    assert stats.entropy == pytest.approx(3.0, abs=1e-12)
    assert stats.variance_log == pytest.approx(0.0, abs=1e-12)


def test_bernoulli_surprisal_variance():
    p = 0.2
    stats = entropy_stats([1 - p, p])
    expected = p * (1 - p) * math.log2((1 - p) / p) ** 2
    assert stats.entropy == pytest.approx(binary_entropy(p), abs=1e-12)
    assert stats.variance_log == pytest.approx(expected, abs=1e-12)


def test_prob_vector_validation():
    with pytest.raises(ValueError):
        ProbVector([0.5, 0.6])
    with pytest.raises(ValueError):
        ProbVector([1.2, -0.2])
    with pytest.raises(ValueError):
        ProbVector([])


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=30).filter(lambda x: sum(x) > 0.1))
def test_sorted_view_is_descending_permutation(raw):
    p = np.array(raw) / sum(raw)
    d = ProbVector(p)
    s = d.sorted_view
    assert np.all(np.diff(s) <= 0)
    np.testing.assert_allclose(np.sort(s), np.sort(p))


@given(st.integers(1, 6), st.sampled_from([2, 3, 5]), st.data())
def test_symbol_round_trip(width, p, data):
    idx = data.draw(st.integers(0, p**width - 1))
    assert from_symbols(to_symbols(idx, width, p), p) == idx
