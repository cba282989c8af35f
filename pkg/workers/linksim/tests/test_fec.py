"""Tests for the RSC encoder, the BCJR decoder and the interleaver."""
import itertools

import numpy as np
import pytest

from linksim.core.fec import (
    CodeConfig,
    Interleaver,
    bcjr_decode,
    build_trellis,
    is_codeword,
    rsc_encode,
)
from linksim.errors import InvalidArgumentError


def _codebook(n_info: int, code: CodeConfig = CodeConfig()) -> np.ndarray:
    return np.array([
        rsc_encode(np.array(u), code) for u in itertools.product((0, 1), repeat=n_info)
    ])


def _bitwise_map(codebook: np.ndarray, llrs: np.ndarray) -> np.ndarray:
    """Exhaustive bitwise APP LLRs under ``p(c) ∝ exp(-c·L)``."""
    log_w = -(codebook @ llrs)
    return np.array([
        np.logaddexp.reduce(log_w[codebook[:, k] == 0])
        - np.logaddexp.reduce(log_w[codebook[:, k] == 1])
        for k in range(codebook.shape[1])
    ])


class TestEncoder:
    """Terminated [1, 5/7] RSC encoder."""

    def test_impulse_response(self):
        info = np.array([1, 0, 0, 0, 0, 0, 0, 0])
        expected = [1, 1, 0, 1, 0, 1, 0, 0, 0, 1, 0, 1, 0, 0, 0, 1, 0, 1, 1, 1]
        assert rsc_encode(info).tolist() == expected

    def test_all_zero(self):
        assert not rsc_encode(np.zeros(10, dtype=int)).any()

    def test_length(self):
        code = CodeConfig()
        assert rsc_encode(np.ones(126, dtype=int)).size == code.coded_length(126) == 256

    def test_systematic(self, rng):
        info = rng.integers(0, 2, 30)
        assert np.array_equal(rsc_encode(info)[0:60:2], info)

    def test_terminates_in_zero_state(self, rng):
        trellis = build_trellis(CodeConfig())
        info = rng.integers(0, 2, 40)
        coded = rsc_encode(info)
        state = 0
        for u in coded[0::2]:
            state = int(trellis.next_state[state, u])
        assert state == 0

    def test_linear(self, rng):
        a, b = rng.integers(0, 2, (2, 40))
        assert np.array_equal(rsc_encode(a ^ b), rsc_encode(a) ^ rsc_encode(b))

    def test_rejects_non_binary(self):
        with pytest.raises(InvalidArgumentError):
            rsc_encode(np.array([0, 2, 1]))

    def test_rejects_wrong_coded_length(self):
        with pytest.raises(InvalidArgumentError):
            rsc_encode(np.zeros(10, dtype=int), n_coded=22)

    def test_bad_polynomial(self):
        with pytest.raises(InvalidArgumentError):
            CodeConfig(feedforward=0o3)


class TestIsCodeword:
    def test_valid(self, rng):
        assert is_codeword(rsc_encode(rng.integers(0, 2, 20)))

    def test_single_flip_invalid(self, rng):
        coded = rsc_encode(rng.integers(0, 2, 20))
        coded[5] ^= 1
        assert not is_codeword(coded)


class TestBcjr:
    """Log-domain SISO decoder."""

    @pytest.mark.parametrize("n_info", [3, 6, 9])
    def test_exact_mode_matches_bitwise_map(self, rng, n_info):
        codebook = _codebook(n_info)
        llrs = 1.5 * rng.standard_normal(codebook.shape[1])
        app, app_info = bcjr_decode(llrs, max_star="exact")
        oracle = _bitwise_map(codebook, llrs)
        assert np.max(np.abs(app - oracle)) < 1e-9
        assert np.allclose(app_info, oracle[0:2 * n_info:2])

    def test_apriori_adds_to_channel(self, rng):
        codebook = _codebook(5)
        ch = rng.standard_normal(codebook.shape[1])
        pr = rng.standard_normal(codebook.shape[1])
        app, _ = bcjr_decode(ch, pr, max_star="exact")
        assert np.max(np.abs(app - _bitwise_map(codebook, ch + pr))) < 1e-9

    def test_zero_input_gives_zero_app(self):
        app, app_info = bcjr_decode(np.zeros(2 * (12 + 2)), max_star="exact")
        assert np.allclose(app, 0.0, atol=1e-12)
        assert np.allclose(app_info, 0.0, atol=1e-12)

    def test_codeword_sign_flip(self, rng):
        coded = rsc_encode(rng.integers(0, 2, 12))
        sign = 1.0 - 2.0 * coded
        llrs = 1.5 * rng.standard_normal(coded.size)
        app, _ = bcjr_decode(llrs, max_star="exact")
        flipped, _ = bcjr_decode(llrs * sign, max_star="exact")
        assert np.allclose(flipped, app * sign, atol=1e-9)

    def test_lut_mode_close_to_exact(self, rng):
        llrs = 2.0 * rng.standard_normal(2 * (20 + 2))
        exact, _ = bcjr_decode(llrs, max_star="exact")
        lut, _ = bcjr_decode(llrs, max_star="lut")
        assert np.max(np.abs(exact - lut)) < 0.5

    def test_noiseless_decode(self, rng):
        info = rng.integers(0, 2, 60)
        coded = rsc_encode(info)
        _, app_info = bcjr_decode(8.0 * (1 - 2 * coded.astype(float)))
        assert np.array_equal((app_info < 0).astype(int), info)

    def test_output_clipped(self):
        app, _ = bcjr_decode(np.full(2 * 12, 200.0))
        assert np.all(np.abs(app) <= 60.0)

    def test_unknown_mode(self):
        with pytest.raises(InvalidArgumentError):
            bcjr_decode(np.zeros(12), max_star="fast")

    def test_apriori_length_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            bcjr_decode(np.zeros(12), np.zeros(10))


class TestInterleaver:
    def test_round_trip(self, rng):
        pi = Interleaver.random(50, rng)
        v = rng.standard_normal(50)
        assert np.array_equal(pi.deinterleave(pi.interleave(v)), v)

    def test_from_seed_reproducible(self):
        assert np.array_equal(
            Interleaver.from_seed(64, 9).permutation, Interleaver.from_seed(64, 9).permutation,
        )

    def test_identity(self):
        v = np.arange(8)
        assert np.array_equal(Interleaver.identity(8).interleave(v), v)

    def test_rejects_non_bijection(self):
        with pytest.raises(InvalidArgumentError):
            Interleaver(np.array([0, 0, 1]))

    def test_rejects_wrong_length(self):
        with pytest.raises(InvalidArgumentError):
            Interleaver.identity(4).interleave(np.zeros(5))
