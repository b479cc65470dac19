import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wiretap.channels import (
    AvcSpec,
    TransitionMatrix,
    avc_channels,
    bec,
    bsc,
    circulant_channel,
    classify_symmetry,
    completely_noisy,
    noiseless,
    product_output_dist,
    restricted_symmetry_check,
    sample,
    state_orderings,
    tensor,
    wiretap2_channel,
    z_channel,
)
from wiretap.coremath import from_symbols
from wiretap.ecc import identity_code, repetition_code


def test_single_bsc_use():
    np.testing.assert_allclose(product_output_dist([bsc(0.2)], [0]).probs, [0.8, 0.2])


def test_two_bsc_uses():
    np.testing.assert_allclose(product_output_dist([bsc(0.2)] * 2, [0, 0]).probs, [0.64, 0.16, 0.16, 0.04])


def test_noiseless_is_a_point_mass():
    x = [1, 0, 1, 1]
    d = product_output_dist([noiseless()] * 4, x)
    assert d[from_symbols(x)] == 1.0


def test_row_sums_checked():
    with pytest.raises(ValueError):
        TransitionMatrix(np.array([[0.5, 0.4], [0.5, 0.5]]))


def test_sampling():
    rng = np.random.default_rng(0)
    x = np.array([1, 0, 1])
    assert sample([noiseless()] * 3, x, rng).tolist() == x.tolist()
    assert sample([bsc(1.0)] * 3, x, rng).tolist() == (1 - x).tolist()
    flips = sample([bsc(0.2)], [0], rng, size=100_000)
    assert abs(flips.mean() - 0.2) < 0.01


def test_symmetry_classes():
    assert classify_symmetry(bsc(0.2)).kind == "strongly_symmetric"
    erasure = classify_symmetry(bec(0.3))
    assert erasure.kind == "symmetric"
    assert sorted(erasure.partition) == [(0, 1), (2,)]
    assert classify_symmetry(z_channel(0.3)).kind == "asymmetric"


@pytest.mark.parametrize("a,b", [(0.1, 0.3), (0.0, 0.5), (0.2, 0.2)])
def test_product_of_strongly_symmetric_stays_symmetric(a, b):
    assert classify_symmetry(tensor(bsc(a), bsc(b))).kind != "asymmetric"


@pytest.mark.parametrize("row", [(0.6, 0.3, 0.1), (0.5, 0.5, 0.0), (0.2, 0.2, 0.6)])
def test_ternary_products_stay_symmetric(row):
    w = circulant_channel(row)
    assert classify_symmetry(w).kind == "strongly_symmetric"
    assert classify_symmetry(tensor(w, w)).kind != "asymmetric"


def test_wiretap2_channels():
    full = wiretap2_channel(3, [1, 1, 1], q=3)
    assert product_output_dist(full, [1, 0, 1])[0b101] == 1.0
    blind = wiretap2_channel(3, [0, 0, 0], q=0)
    np.testing.assert_allclose(product_output_dist(blind, [1, 0, 1]).probs, np.full(8, 1 / 8))
    one = product_output_dist(wiretap2_channel(3, [1, 0, 0], q=1), [1, 0, 1]).probs
    expected = [0.25 if z >> 2 == 1 else 0.0 for z in range(8)]
    np.testing.assert_allclose(one, expected)
    with pytest.raises(ValueError):
        wiretap2_channel(3, [1, 1, 0], q=1)


def test_avc_orderings():
    spec = AvcSpec((bsc(0.0), bsc(0.5)), (0.5, 0.5))
    orders = [s.seq for s in state_orderings(spec, 2)]
    assert orders == [(0, 1), (1, 0)]
    for order in orders:
        chans = avc_channels(spec, order)
        assert {c.entries[0, 0] for c in chans} == {1.0, 0.5}
    with pytest.raises(ValueError):
        avc_channels(spec, (0, 0))


def test_avc_single_state():
    spec = AvcSpec((bsc(0.1),), (1.0,))
    assert avc_channels(spec, (0, 0, 0)) == [bsc(0.1)] * 3


def test_avc_json_with_keyed_frequencies():
    obj = {"states": [bsc(0.1).to_json(), bsc(0.4).to_json()], "frequencies": {"0": 0.25, "1": 0.75}}
    spec = AvcSpec.from_json(json.loads(json.dumps(obj)))
    assert spec.counts(4) == (1, 3)
    with pytest.raises(ValueError):
        spec.counts(3)


def test_restricted_symmetry_examples():
    assert restricted_symmetry_check([bsc(0.2)] * 3, identity_code(3))
    assert restricted_symmetry_check([bsc(0.2)] * 3, repetition_code(3))
    assert restricted_symmetry_check([bsc(0.2), bsc(0.3)], np.array([[0, 0], [0, 1]]))
    assert not restricted_symmetry_check([z_channel(0.3)] * 2, identity_code(2))


@given(st.lists(st.floats(0.0, 0.5), min_size=1, max_size=4), st.data())
def test_reordering_strongly_symmetric_uses_keeps_profile(ps, data):
    chans = [bsc(p) for p in ps]
    n = len(chans)
    x = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    perm = data.draw(st.permutations(range(n)))
    a = product_output_dist(chans, x).sorted_view
    b = product_output_dist([chans[i] for i in perm], x).sorted_view
    np.testing.assert_allclose(a, b, atol=1e-12)


@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=3), st.data())
def test_permuting_uses_with_inputs_keeps_profile(raw, data):
    # arbitrary (asymmetric) channels: permute channel order and inputs together
    chans = [z_channel(p) for p in raw]
    n = len(chans)
    x = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    perm = data.draw(st.permutations(range(n)))
    a = product_output_dist(chans, x).sorted_view
    b = product_output_dist([chans[i] for i in perm], [x[i] for i in perm]).sorted_view
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_symmetric_inputs_are_equidistant_from_mixture():
    for w in (bsc(0.2), bec(0.3), circulant_channel((0.6, 0.3, 0.1))):
        for n in (1, 2):
            inputs = list(itertools.product(range(w.n_inputs), repeat=n))
            table = np.array([product_output_dist([w] * n, x).probs for x in inputs])
            mixed = table.mean(axis=0)
            dist = 0.5 * np.abs(table - mixed).sum(axis=1)
            np.testing.assert_allclose(dist, dist[0], atol=1e-12)
            pair = max(0.5 * np.abs(a - b).sum() for a in table for b in table)
            assert pair <= 2 * dist[0] + 1e-12
    assert completely_noisy().entries.tolist() == [[0.5, 0.5], [0.5, 0.5]]
