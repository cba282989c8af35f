"""Tests for transforms, QAM mapping and the f_c lookup table."""
import math

import numpy as np
import pytest
from scipy.linalg import hadamard

from linksim.core.numerics import (
    FcTable,
    Constellation,
    clip_llr,
    fft,
    fwht,
    gray_code,
    pam_bit,
    pam_demap_bits,
    qam_map,
)
from linksim.core.opcount import OpTally
from linksim.errors import InvalidArgumentError


class TestFwht:
    """Orthonormal Walsh-Hadamard transform."""

    def test_matches_dense_hadamard(self, rng):
        v = rng.standard_normal(8)
        assert np.allclose(fwht(v), hadamard(8) @ v / math.sqrt(8), atol=1e-12)

    def test_involution(self, rng):
        v = rng.standard_normal((4, 32)) + 1j * rng.standard_normal((4, 32))
        assert np.allclose(fwht(fwht(v)), v, atol=1e-12)

    def test_preserves_energy(self, rng):
        v = rng.standard_normal(64)
        assert math.isclose(np.linalg.norm(fwht(v)), np.linalg.norm(v), rel_tol=1e-12)

    def test_length_one_is_identity(self):
        assert np.array_equal(fwht(np.array([2.5])), np.array([2.5]))

    def test_rejects_non_power_of_two(self):
        with pytest.raises(InvalidArgumentError):
            fwht(np.ones(6))

    def test_tally_counts_butterflies(self):
        tally = OpTally()
        fwht(np.ones((2, 8), dtype=complex), counter=tally)
        # 2 rows · 8 points · 3 stages · 2 real rails
        assert tally.additions == 96
        assert tally.multiplications == 0


class TestFft:
    """Orthonormal DFT."""

    def test_inverse_round_trip(self, rng):
        v = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        assert np.allclose(fft(fft(v), inverse=True), v, atol=1e-12)

    def test_unitary(self, rng):
        v = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        assert math.isclose(np.linalg.norm(fft(v)), np.linalg.norm(v), rel_tol=1e-12)

    def test_tally(self):
        tally = OpTally()
        fft(np.ones(16, dtype=complex), counter=tally)
        assert (tally.additions, tally.multiplications) == (128, 128)


class TestConstellation:
    """Gray-labelled square QAM."""

    def test_unit_energy(self, constellation):
        assert math.isclose(np.mean(np.abs(constellation.points) ** 2), 1.0, rel_tol=1e-12)

    def test_qpsk_labels(self, qpsk):
        kappa = 1 / math.sqrt(2)
        assert math.isclose(qpsk.kappa, kappa)
        assert pam_bit(-kappa, 0, qpsk) == 1
        assert pam_bit(kappa, 0, qpsk) == 0
        assert np.isclose(qam_map(np.array([0]), np.array([0]), qpsk)[0], kappa + 1j * kappa)

    def test_qam16_labels_descending_gray(self):
        c = Constellation(16)
        labels = ["".join(map(str, row)) for row in c.pam_labels]
        # ascending levels -3κ, -κ, +κ, +3κ
        assert labels == ["10", "11", "01", "00"]

    def test_adjacent_levels_differ_in_one_bit(self, constellation):
        diffs = np.abs(np.diff(constellation.pam_labels.astype(int), axis=0)).sum(axis=1)
        assert np.all(diffs == 1)

    def test_half_the_levels_per_bit_value(self, constellation):
        side = constellation.side
        assert np.all(constellation.pam_labels.sum(axis=0) == side // 2)

    def test_negation_flips_only_first_bit(self, constellation):
        labels = constellation.pam_labels
        mirrored = labels[::-1]
        assert np.all(labels[:, 0] != mirrored[:, 0])
        assert np.array_equal(labels[:, 1:], mirrored[:, 1:])

    def test_point_bits_qpsk_layout(self, qpsk):
        assert qpsk.point_bits[:, 0].tolist() == [0, 0, 1, 1]

    def test_points_agree_with_qam_map(self, constellation):
        b = constellation.bits_per_rail
        bits = constellation.point_bits
        mapped = np.array([
            qam_map(row[:b], row[b:], constellation)[0] for row in bits
        ])
        assert np.allclose(mapped, constellation.points)

    def test_demap_inverts_map(self, constellation, rng):
        b = constellation.bits_per_rail
        bits = rng.integers(0, 2, 10 * b)
        levels = constellation.pam_levels[constellation.level_index(bits.reshape(-1, b))]
        assert np.array_equal(pam_demap_bits(levels, constellation), bits)

    @pytest.mark.parametrize("order", [2, 8, 32, 36])
    def test_rejects_bad_order(self, order):
        with pytest.raises(InvalidArgumentError):
            Constellation(order)

    def test_pam_bit_rejects_non_level(self, qpsk):
        with pytest.raises(InvalidArgumentError):
            pam_bit(0.3, 0, qpsk)

    def test_gray_code(self):
        assert [gray_code(i) for i in range(4)] == [0, 1, 3, 2]


class TestFcTable:
    """Jacobian logarithm lookup."""

    def test_zero(self):
        assert math.isclose(float(FcTable().lookup(0.0)), math.log(2.0))

    def test_beyond_range_is_zero(self):
        assert float(FcTable().lookup(12.0)) == 0.0

    def test_max_star_close_to_logaddexp(self, rng):
        fc = FcTable()
        a, b = rng.normal(0, 3, 1000), rng.normal(0, 3, 1000)
        err = np.abs(fc.max_star(a, b) - np.logaddexp(a, b))
        assert err.max() < fc.step / 2 + 1e-3

    def test_reduce_odd_length(self, rng):
        fc = FcTable(size=4096)
        x = rng.standard_normal((3, 7))
        assert np.allclose(fc.reduce(x), np.logaddexp.reduce(x, axis=-1), atol=1e-2)

    def test_reduce_tallies_folds(self):
        tally = OpTally()
        FcTable().reduce(np.zeros((2, 8)), counter=tally)
        assert tally.additions == 2 * 2 * 7

    def test_reduce_into_empty_accumulator(self):
        fc = FcTable(size=4096)
        tally = OpTally()
        out = fc.reduce(np.zeros((2, 8)), initial=-np.inf, counter=tally)
        assert tally.additions == 2 * 2 * 8
        assert np.allclose(out, math.log(8.0), atol=1e-2)


class TestClip:
    def test_clip(self):
        assert clip_llr(np.array([-100.0, 3.0, 100.0])).tolist() == [-60.0, 3.0, 60.0]
