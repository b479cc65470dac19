import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wiretap.ecc import (
    LinearCode,
    decode,
    encode,
    hamming_7_4,
    identity_code,
    load_code,
    random_linear_code,
    rank_mod_p,
    repetition_code,
    standard_code,
)


def test_repetition_majority():
    code = repetition_code(3)
    assert decode(code, [1, 1, 0]).tolist() == [1]
    assert decode(code, [0, 1, 0]).tolist() == [0]


@pytest.mark.parametrize("msg", range(16))
def test_hamming_corrects_every_single_flip(msg):
    code = hamming_7_4()
    word = code.encode_index(msg)
    for i in range(7):
        y = word.copy()
        y[i] ^= 1
        assert code.decode_index(y) == msg


def test_random_linear_is_full_rank():
    code = random_linear_code(3, 5, 2, seed=7)
    assert rank_mod_p(code.generator, 3) == 2
    assert code == random_linear_code(3, 5, 2, seed=7)


def test_rank_deficient_generator_rejected():
    with pytest.raises(ValueError):
        LinearCode(np.array([[1, 1, 0], [1, 1, 0]]))


def test_entries_outside_alphabet_rejected():
    with pytest.raises(ValueError):
        LinearCode(np.array([[2, 1]]), p=2)


def test_ties_go_to_the_smallest_message():
    # (0, 1) is at distance 1 from both codewords of the length-2 repetition code
    assert repetition_code(2).decode_index([0, 1]) == 0
    assert repetition_code(2).decode_index([1, 0]) == 0


def test_identity_code_is_transparent():
    code = identity_code(4)
    y = np.array([1, 0, 1, 1])
    assert decode(code, y).tolist() == y.tolist()


def test_unknown_code_name():
    with pytest.raises(ValueError):
        standard_code("golay")


def test_json_round_trip(tmp_path):
    code = random_linear_code(2, 6, 3, seed=1)
    path = tmp_path / "code.json"
    path.write_text(json.dumps(code.to_json()))
    assert load_code(path) == code


codes = st.one_of(
    st.builds(lambda n: repetition_code(n), st.integers(1, 7)),
    st.just(hamming_7_4()),
    st.builds(lambda seed, p: random_linear_code(p, 6, 3, seed=seed), st.integers(0, 1000), st.sampled_from([2, 3])),
)


@given(codes, st.data())
def test_decode_inverts_encode(code, data):
    idx = data.draw(st.integers(0, code.size - 1))
    assert code.decode_index(code.encode_index(idx)) == idx


@given(codes, st.data())
def test_linearity(code, data):
    msg = st.lists(st.integers(0, code.p - 1), min_size=code.k, max_size=code.k)
    a, b = np.array(data.draw(msg)), np.array(data.draw(msg))
    np.testing.assert_array_equal(encode(code, (a + b) % code.p), (encode(code, a) + encode(code, b)) % code.p)


@given(st.integers(0, 15), st.integers(0, 127))
def test_hamming_decoding_commutes_with_codeword_shift(msg, word):
    # Hamming(7,4) is perfect, so nearest codewords are unique and shifting
    # the received word by a codeword shifts the decoded message alike.
    code = hamming_7_4()
    y = np.array([(word >> (6 - i)) & 1 for i in range(7)])
    c = code.encode_index(msg)
    m_y = code.decode(y)
    m_shift = code.decode((y + c) % 2)
    np.testing.assert_array_equal(m_shift, (m_y + code.decode(c)) % 2)
