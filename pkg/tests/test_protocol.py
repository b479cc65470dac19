import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wiretap.bounds import wiretap2_bound
from wiretap.channels import AvcSpec, bsc, circulant_channel, completely_noisy, noiseless, z_channel
from wiretap.coremath import to_symbols
from wiretap.ecc import hamming_7_4, identity_code, random_linear_code, repetition_code
from wiretap.extractors import make_extractor
from wiretap.protocol import (
    Memoryless,
    SchemeConfig,
    TypeConstrainedAvc,
    WiretapII,
    exact_decoding_error,
    exact_secrecy,
    identity_code_secrecy,
    load_scheme,
    receive,
    run_seeded_trials,
    run_unseeded,
    scheme_from_json,
    send,
)


def hamming_scheme(p=0.03, lam=2):
    return SchemeConfig(make_extractor("toeplitz", 4, lam), hamming_7_4(), [bsc(p)] * 7)


def test_identity_code_zero_seed_sends_r_then_m():
    ext = make_extractor("toeplitz", 5, 2)
    cfg = SchemeConfig(ext, identity_code(5), [noiseless()] * 5)
    rng = np.random.default_rng(4)
    x, v = send(cfg, 0b10, 0, rng)
    r = v >> 2
    assert x.tolist() == to_symbols(r, 3).tolist() + [1, 0]


def test_send_is_reproducible():
    cfg = hamming_scheme()
    a = send(cfg, 1, 5, np.random.default_rng(9))
    b = send(cfg, 1, 5, np.random.default_rng(9))
    assert a[0].tolist() == b[0].tolist() and a[1] == b[1]


def test_single_flips_are_corrected():
    cfg = hamming_scheme()
    rng = np.random.default_rng(0)
    for m in range(4):
        x, _ = send(cfg, m, 3, rng)
        assert receive(cfg, x, 3) == m
        for i in range(7):
            y = x.copy()
            y[i] ^= 1
            assert receive(cfg, y, 3) == m


def test_seeded_trials_examples():
    rng = np.random.default_rng(1)
    clean = SchemeConfig(make_extractor("toeplitz", 4, 2), hamming_7_4(), [noiseless()] * 7)
    assert run_seeded_trials(clean, 2000, rng).message_error_rate == 0.0
    coin = SchemeConfig(make_extractor("toeplitz", 1, 1), repetition_code(3), [bsc(0.5)] * 3)
    rep = run_seeded_trials(coin, 20_000, rng)
    assert abs(rep.message_error_rate - 0.5) < 4 * 0.5 / np.sqrt(20_000)


def test_hamming_exact_block_error():
    p = 0.03
    avg, worst = exact_decoding_error(hamming_7_4(), [bsc(p)] * 7)
    closed = 1 - (1 - p) ** 7 - 7 * p * (1 - p) ** 6
    assert avg == pytest.approx(closed, abs=1e-12)
    assert worst == pytest.approx(closed, abs=1e-12)


def test_trial_report_json_keys():
    rep = run_seeded_trials(hamming_scheme(), 100, np.random.default_rng(2))
    assert set(rep.to_json()) == {
        "trials", "extractor_seed", "rm_block_error", "rm_message_error", "block_error_stderr", "mt_message_error",
    }


def test_unseeded_noiseless_round():
    cfg = SchemeConfig(make_extractor("toeplitz", 4, 2), identity_code(4), [noiseless()] * 4)
    rep = run_unseeded(cfg, [3], np.random.default_rng(0), eps_rm=1e-4, eps_cor=1e-6)
    assert rep.recovered == [3] and rep.failed == [False] and rep.seed_ok
    assert rep.eps_rm == pytest.approx(1e-4)


def test_unseeded_composition_scales_with_rounds():
    cfg = SchemeConfig(make_extractor("toeplitz", 4, 2), identity_code(4), [noiseless()] * 4)
    rep = run_unseeded(cfg, list(range(4)) * 2 + [0, 1], np.random.default_rng(0), eps_rm=1e-4)
    assert rep.eps_rm == pytest.approx(1e-3)


def test_forced_seed_failure_fails_every_round():
    cfg = SchemeConfig(make_extractor("toeplitz", 4, 2), identity_code(4), [noiseless()] * 4)
    rep = run_unseeded(cfg, [0, 1, 2, 3], np.random.default_rng(0), seed_error=[0, 1, 1, 1])
    assert not rep.seed_ok
    assert all(rep.failed)


def test_fully_noisy_adversary_learns_nothing():
    cfg = SchemeConfig(make_extractor("toeplitz", 4, 2), hamming_7_4(), [noiseless()] * 7, Memoryless([completely_noisy()] * 7))
    sec = exact_secrecy(cfg)
    assert sec.rm == pytest.approx(0.0, abs=1e-12)
    assert sec.mt == pytest.approx(0.0, abs=1e-12)


def test_wiretap2_secrecy_within_bound_for_every_mask():
    code = random_linear_code(2, 6, 4, seed=7)
    cfg = SchemeConfig(make_extractor("toeplitz", 4, 1), code, [noiseless()] * 6, WiretapII(6, 2))
    sec = exact_secrecy(cfg)
    assert len(sec.per_strategy) == 15
    bound = wiretap2_bound(1, 2, 4).epsilon_rm
    assert all(rm <= bound + 1e-12 for _, rm, _ in sec.per_strategy)


def test_symmetric_avc_is_order_invariant():
    spec = AvcSpec((bsc(0.1), bsc(0.4)), (0.5, 0.5))
    cfg = SchemeConfig(make_extractor("toeplitz", 1, 1), repetition_code(4), [noiseless()] * 4, TypeConstrainedAvc(spec, 4))
    values = [rm for _, rm, _ in exact_secrecy(cfg).per_strategy]
    assert len(values) == 6
    assert max(values) - min(values) < 1e-12


def test_config_validation():
    with pytest.raises(ValueError):
        SchemeConfig(make_extractor("toeplitz", 3, 2), hamming_7_4(), [bsc(0.1)] * 7)
    with pytest.raises(ValueError):
        SchemeConfig(make_extractor("toeplitz", 4, 2), hamming_7_4(), [bsc(0.1)] * 6)
    with pytest.raises(ValueError):
        WiretapII(3, 4)


def test_scheme_json(tmp_path):
    obj = {
        "code": {"name": "hamming_7_4"},
        "extractor": {"family": "toeplitz", "lam": 2},
        "receiver": {"kind": "bsc", "p": 0.03},
        "adversary": {"type": "wiretap2", "q": 2},
    }
    path = tmp_path / "scheme.json"
    path.write_text(json.dumps(obj))
    cfg = load_scheme(path)
    assert cfg.code == hamming_7_4() and cfg.extractor.lam == 2
    assert isinstance(cfg.adversary, WiretapII) and cfg.adversary.q == 2
    with pytest.raises(ValueError):
        scheme_from_json(dict(obj, extractor={"family": "nope", "lam": 1}))


@given(st.sampled_from(["toeplitz", "finite_field"]), st.integers(0, 1000), st.data())
def test_noiseless_path_is_exact(family, code_seed, data):
    code = random_linear_code(2, 7, 4, seed=code_seed)
    lam = data.draw(st.integers(1, 4))
    ext = make_extractor(family, 4, lam)
    cfg = SchemeConfig(ext, code, [noiseless()] * 7)
    m = data.draw(st.integers(0, ext.n_messages - 1))
    s = int(data.draw(st.sampled_from(ext.seeds().tolist())))
    x, v = send(cfg, m, s, np.random.default_rng(data.draw(st.integers(0, 2**32 - 1))))
    assert code.decode_index(x) == v
    assert receive(cfg, x, s) == m


@pytest.mark.parametrize("family,n,lam,p", [("toeplitz", 6, 2, 2), ("finite_field", 6, 3, 2), ("toeplitz", 8, 1, 2), ("toeplitz", 4, 2, 3)])
def test_noise_shift_secrecy_matches_joint_table(family, n, lam, p):
    ext = make_extractor(family, n, lam, p)
    adv = [bsc(0.35)] * n if p == 2 else [circulant_channel((0.5, 0.3, 0.2))] * n
    cfg = SchemeConfig(ext, identity_code(n, p), [noiseless(p)] * n, Memoryless(adv))
    assert identity_code_secrecy(ext, adv) == pytest.approx(exact_secrecy(cfg, pairwise=False).rm, abs=1e-12)


def test_noise_shift_needs_additive_noise():
    with pytest.raises(ValueError):
        identity_code_secrecy(make_extractor("toeplitz", 3, 1), [z_channel(0.3)] * 3)
