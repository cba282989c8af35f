"""
EXIT-chart helpers — mutual information between bits and LLRs, and the
J-function of consistent Gaussian LLRs.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from linksim.errors import InvalidArgumentError

_SIGMA_MAX = 80.0


def mutual_information(bits: np.ndarray, llrs: np.ndarray) -> float:
    """Time-average estimate ``1 − E[log2(1 + e^{−(1−2c)·L})]``."""
    bits = np.asarray(bits, dtype=float).reshape(-1)
    llrs = np.asarray(llrs, dtype=float).reshape(-1)
    if bits.shape != llrs.shape:
        raise InvalidArgumentError(f"bits {bits.shape} and LLRs {llrs.shape} differ in length")
    if bits.size == 0:
        return 0.0
    signed = (1.0 - 2.0 * bits) * llrs
    return float(1.0 - np.mean(np.logaddexp(0.0, -signed)) / math.log(2.0))


@lru_cache(maxsize=4096)
def j_function(sigma: float) -> float:
    """MI of LLRs ``L ~ N(σ²/2, σ²)`` conditioned on bit 0."""
    if sigma <= 0:
        return 0.0
    mean = sigma ** 2 / 2.0

    def integrand(x: float) -> float:
        density = math.exp(-((x - mean) ** 2) / (2.0 * sigma ** 2)) / math.sqrt(2.0 * math.pi * sigma ** 2)
        return density * np.logaddexp(0.0, -x) / math.log(2.0)

    lo, hi = mean - 12.0 * sigma, mean + 12.0 * sigma
    value, _ = quad(integrand, lo, hi, limit=200)
    return float(min(max(1.0 - value, 0.0), 1.0))


def j_inverse(mi: float) -> float:
    """σ such that ``j_function(σ) = mi``; ``mi`` in [0, 1)."""
    if not 0.0 <= mi < 1.0:
        raise InvalidArgumentError(f"mutual information must lie in [0, 1), got {mi}")
    if mi == 0.0:
        return 0.0
    return float(brentq(lambda s: j_function(s) - mi, 1e-6, _SIGMA_MAX, xtol=1e-10))


def gaussian_llrs(bits: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Consistent Gaussian LLRs ``(σ²/2)(1 − 2c) + σ·n`` for *bits*."""
    bits = np.asarray(bits, dtype=float)
    return (sigma ** 2 / 2.0) * (1.0 - 2.0 * bits) + sigma * rng.standard_normal(bits.shape)
