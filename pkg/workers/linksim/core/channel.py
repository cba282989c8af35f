"""
Channel — static frequency-selective channel in the frequency-domain model
``y = Λ·x + w`` and SNR bookkeeping.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from linksim.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

_PROAKIS_C = (0.23, 0.46, 0.69, 0.46, 0.23)


def proakis_c() -> np.ndarray:
    return np.array(_PROAKIS_C)


def random_taps(length: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. complex Gaussian taps normalised to unit energy."""
    h = rng.standard_normal(length) + 1j * rng.standard_normal(length)
    return h / np.linalg.norm(h)


def to_fd(taps: np.ndarray, n: int) -> np.ndarray:
    """Unnormalized N-point DFT of the zero-padded impulse response."""
    taps = np.asarray(taps)
    if taps.ndim != 1 or taps.size == 0:
        raise InvalidArgumentError("taps must be a non-empty 1-D sequence")
    if taps.size > n:
        raise InvalidArgumentError(f"channel length {taps.size} exceeds block length {n}")
    return np.fft.fft(taps, n)


def noise_variance(ebn0_db: float, order: int, rate: float = 0.5) -> float:
    """``σ² = 1 / (R · log2 J · Eb/N0)`` for unit-energy symbols."""
    ebn0 = 10.0 ** (ebn0_db / 10.0)
    return 1.0 / (rate * math.log2(order) * ebn0)


def esn0_db(ebn0_db: float, order: int, rate: float = 0.5) -> float:
    return ebn0_db + 10.0 * math.log10(rate * math.log2(order))


@dataclass(frozen=True, eq=False)
class ChannelState:
    """Impulse response, its frequency-domain diagonal, and the noise level."""

    taps: np.ndarray
    fd_diag: np.ndarray
    noise_var: float

    @classmethod
    def build(cls, taps: np.ndarray, n: int, noise_var: float) -> ChannelState:
        if not noise_var > 0:
            raise InvalidArgumentError(f"noise variance must be positive, got {noise_var}")
        taps = np.asarray(taps)
        return cls(taps=taps, fd_diag=to_fd(taps, n), noise_var=float(noise_var))

    @property
    def length(self) -> int:
        return int(self.taps.size)


def transmit(x: np.ndarray, state: ChannelState, rng: np.random.Generator) -> np.ndarray:
    """``y = Λ·x + w`` with circular complex Gaussian ``w``, ``E|w_k|² = σ²``."""
    x = np.asarray(x)
    if x.shape != state.fd_diag.shape:
        raise InvalidArgumentError(
            f"block length {x.shape} does not match channel {state.fd_diag.shape}"
        )
    scale = math.sqrt(state.noise_var / 2.0)
    w = scale * (rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape))
    return state.fd_diag * x + w
