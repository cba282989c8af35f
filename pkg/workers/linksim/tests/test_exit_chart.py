"""Tests for the MI estimator and the J-function."""
import math

import numpy as np
import pytest

from linksim.core.exit_chart import gaussian_llrs, j_function, j_inverse, mutual_information
from linksim.errors import InvalidArgumentError


class TestMutualInformation:
    def test_perfect_llrs(self, rng):
        bits = rng.integers(0, 2, 10_000)
        llrs = 60.0 * (1 - 2 * bits)
        assert abs(mutual_information(bits, llrs) - 1.0) < 1e-3

    def test_zero_llrs(self, rng):
        bits = rng.integers(0, 2, 1000)
        assert abs(mutual_information(bits, np.zeros(1000))) < 1e-12

    def test_wrong_sign_is_negative(self):
        bits = np.array([0, 1])
        assert mutual_information(bits, np.array([-10.0, 10.0])) < 0

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            mutual_information(np.zeros(3), np.zeros(4))

    def test_empty(self):
        assert mutual_information(np.zeros(0), np.zeros(0)) == 0.0


class TestJFunction:
    def test_endpoints(self):
        assert j_function(0.0) == 0.0
        assert j_function(60.0) > 0.999999

    def test_monotone(self):
        values = [j_function(s) for s in (0.5, 1.0, 2.0, 4.0)]
        assert values == sorted(values)

    @pytest.mark.parametrize("mi", [0.1, 0.5, 0.9])
    def test_inverse(self, mi):
        assert math.isclose(j_function(j_inverse(mi)), mi, abs_tol=1e-8)

    def test_inverse_range(self):
        with pytest.raises(InvalidArgumentError):
            j_inverse(1.0)

    def test_gaussian_llrs_hit_target(self):
        rng = np.random.default_rng(11)
        bits = rng.integers(0, 2, 1_000_000)
        llrs = gaussian_llrs(bits, j_inverse(0.5), rng)
        assert abs(mutual_information(bits, llrs) - 0.5) < 0.01
