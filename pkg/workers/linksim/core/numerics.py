"""
Numerics — normalized fast transforms, square-QAM mapping, and the
Jacobian-logarithm lookup table shared by the detectors and the decoder.

Conventions
-----------
* Transforms act on the last axis and are orthonormal.
* Bits are literal 0/1.  LLRs are ``L = ln p(c=0) / p(c=1)``, so a prior
  on a bit reads ``p(c) ∝ exp(-c·L)``.
* PAM labels are reflected Gray codes assigned to levels in descending
  order: the first bit of every label is 0 for positive levels.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from linksim.core.opcount import OpTally
from linksim.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

LLR_MAX = 60.0


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _require_power_of_two(n: int, what: str) -> None:
    if not is_power_of_two(n):
        raise InvalidArgumentError(f"{what} must be a power of two, got {n}")


def clip_llr(llrs: np.ndarray, limit: float = LLR_MAX) -> np.ndarray:
    return np.clip(llrs, -limit, limit)


# ── Transforms ───────────────────────────────────────────────────────────────

def fwht(block: np.ndarray, counter: Optional[OpTally] = None) -> np.ndarray:
    """Orthonormal Walsh-Hadamard transform (Sylvester order) on the last axis.

    Radix-2 butterflies with a single ``1/sqrt(Q)`` scale at the end.  Each
    stage costs ``Q`` real additions per real row (``2Q`` for complex rows).
    """
    x = np.array(block, copy=True)
    q = x.shape[-1]
    _require_power_of_two(q, "fwht length")

    lead = x.shape[:-1]
    h = 1
    while h < q:
        x = x.reshape(*lead, q // (2 * h), 2, h)
        a = x[..., 0, :]
        b = x[..., 1, :]
        x = np.stack((a + b, a - b), axis=-2)
        h *= 2
    x = x.reshape(*lead, q) / math.sqrt(q)

    if counter is not None:
        rails = 2 if np.iscomplexobj(x) else 1
        stages = int(math.log2(q))
        counter.add(additions=rails * x.size * stages)
    return x


def fft(
    block: np.ndarray,
    inverse: bool = False,
    counter: Optional[OpTally] = None,
) -> np.ndarray:
    """Orthonormal DFT / IDFT on the last axis.

    The tally follows the radix-2 cost model: ``2M·log2 M`` real additions
    and ``2M·log2 M`` real multiplications per M-point complex transform.
    """
    x = np.asarray(block)
    m = x.shape[-1]
    _require_power_of_two(m, "fft length")
    out = np.fft.ifft(x, norm="ortho") if inverse else np.fft.fft(x, norm="ortho")

    if counter is not None:
        stages = int(math.log2(m))
        counter.add(additions=2 * x.size * stages, multiplications=2 * x.size * stages)
    return out


# ── Constellation ────────────────────────────────────────────────────────────

def gray_code(i: np.ndarray | int) -> np.ndarray | int:
    return i ^ (i >> 1)


@dataclass(frozen=True)
class Constellation:
    """Unit-energy square QAM built from two Gray-labelled PAM rails."""

    order: int
    side: int = field(init=False)
    bits_per_rail: int = field(init=False)

    def __post_init__(self) -> None:
        side = math.isqrt(self.order)
        if self.order < 4 or side * side != self.order or not is_power_of_two(side):
            raise InvalidArgumentError(
                f"QAM order must be a square power of four, got {self.order}"
            )
        object.__setattr__(self, "side", side)
        object.__setattr__(self, "bits_per_rail", int(math.log2(side)))

    @property
    def bits_per_symbol(self) -> int:
        return 2 * self.bits_per_rail

    @property
    def kappa(self) -> float:
        return math.sqrt(3.0 / (2.0 * (self.order - 1)))

    @cached_property
    def integer_levels(self) -> np.ndarray:
        """Unnormalized odd-integer PAM levels, ascending."""
        return np.arange(-(self.side - 1), self.side, 2, dtype=np.int64)

    @cached_property
    def pam_levels(self) -> np.ndarray:
        return self.kappa * self.integer_levels.astype(float)

    @cached_property
    def pam_labels(self) -> np.ndarray:
        """``(side, bits_per_rail)`` label bits of each ascending level."""
        codes = gray_code(np.arange(self.side)[::-1])
        shifts = np.arange(self.bits_per_rail - 1, -1, -1)
        return ((codes[:, None] >> shifts) & 1).astype(np.uint8)

    @cached_property
    def label_to_level(self) -> np.ndarray:
        """Ascending level index for every label integer (MSB first)."""
        weights = 1 << np.arange(self.bits_per_rail - 1, -1, -1)
        out = np.empty(self.side, dtype=np.int64)
        out[self.pam_labels.astype(np.int64) @ weights] = np.arange(self.side)
        return out

    @cached_property
    def point_bits(self) -> np.ndarray:
        """``(J, log2 J)`` bits of QAM point j: I-rail bits then Q-rail bits."""
        shifts = np.arange(self.bits_per_symbol - 1, -1, -1)
        return ((np.arange(self.order)[:, None] >> shifts) & 1).astype(np.uint8)

    @cached_property
    def points(self) -> np.ndarray:
        """QAM points indexed by their label integer."""
        b = self.bits_per_rail
        bits = self.point_bits
        re = self.pam_levels[self.level_index(bits[:, :b])]
        im = self.pam_levels[self.level_index(bits[:, b:])]
        return re + 1j * im

    def level_index(self, bits: np.ndarray) -> np.ndarray:
        """Map ``(..., bits_per_rail)`` label bits to ascending level indices."""
        bits = np.asarray(bits, dtype=np.int64)
        if bits.shape[-1] != self.bits_per_rail:
            raise InvalidArgumentError(
                f"expected {self.bits_per_rail} bits per PAM symbol, got {bits.shape[-1]}"
            )
        weights = 1 << np.arange(self.bits_per_rail - 1, -1, -1)
        return self.label_to_level[bits @ weights]


def qam_map(
    bits_i: np.ndarray,
    bits_q: np.ndarray,
    constellation: Constellation,
) -> np.ndarray:
    """Map the I-rail and Q-rail bit halves onto unit-energy QAM symbols."""
    bits_i = np.asarray(bits_i)
    bits_q = np.asarray(bits_q)
    b = constellation.bits_per_rail
    if bits_i.ndim != 1 or bits_i.shape != bits_q.shape or bits_i.size % b:
        raise InvalidArgumentError(
            f"bit halves must be equal 1-D blocks of a multiple of {b} bits, "
            f"got {bits_i.shape} and {bits_q.shape}"
        )
    levels = constellation.pam_levels
    re = levels[constellation.level_index(bits_i.reshape(-1, b))]
    im = levels[constellation.level_index(bits_q.reshape(-1, b))]
    return re + 1j * im


def pam_bit(level: float, b: int, constellation: Constellation) -> int:
    """Return bit *b* of the label carried by a normalized PAM *level*."""
    if not 0 <= b < constellation.bits_per_rail:
        raise InvalidArgumentError(f"bit index {b} out of range")
    hits = np.flatnonzero(np.isclose(constellation.pam_levels, level, rtol=0, atol=1e-9))
    if hits.size != 1:
        raise InvalidArgumentError(f"{level!r} is not a PAM level of {constellation.order}-QAM")
    return int(constellation.pam_labels[hits[0], b])


def pam_demap_bits(levels: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Hard inverse of the rail mapping: nearest level → its label bits, flattened."""
    levels = np.asarray(levels, dtype=float).ravel()
    idx = np.abs(levels[:, None] - constellation.pam_levels[None, :]).argmin(axis=1)
    return constellation.pam_labels[idx].ravel()


# ── Jacobian logarithm ───────────────────────────────────────────────────────

@dataclass(frozen=True)
class FcTable:
    """Lookup of ``f_c(x) = ln(1 + e^-x)`` sampled uniformly on [0, x_max].

    Nearest-neighbour lookup; ``f_c`` is taken as 0 beyond ``x_max``.
    """

    size: int = 256
    x_max: float = 10.0

    @property
    def step(self) -> float:
        return self.x_max / (self.size - 1)

    @cached_property
    def values(self) -> np.ndarray:
        grid = np.linspace(0.0, self.x_max, self.size)
        return np.log1p(np.exp(-grid))

    def lookup(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        idx = np.rint(np.minimum(x, self.x_max) / self.step).astype(np.int64)
        return np.where(x > self.x_max, 0.0, self.values[idx])

    def max_star(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """``ln(e^a + e^b)`` as ``max(a, b) + f_c(|a - b|)``."""
        return np.maximum(a, b) + self.lookup(np.abs(a - b))

    def reduce(
        self,
        values: np.ndarray,
        axis: int = -1,
        initial: Optional[float] = None,
        counter: Optional[OpTally] = None,
    ) -> np.ndarray:
        """Pairwise max-star reduction along *axis*.

        With *initial* the values are folded into an accumulator that starts
        there (``-inf`` for an empty sum).  Every max-star evaluated is
        tallied as two additions: ``|a - b|`` and ``+ f_c``.
        """
        x = np.moveaxis(np.asarray(values, dtype=float), axis, -1)
        if initial is not None:
            x = np.concatenate((np.full(x.shape[:-1] + (1,), float(initial)), x), axis=-1)
        folds = 0
        while x.shape[-1] > 1:
            n = x.shape[-1]
            head = self.max_star(x[..., 0:n - 1:2], x[..., 1:n:2])
            folds += head.size
            x = np.concatenate((head, x[..., n - 1:]), axis=-1) if n % 2 else head
        if counter is not None:
            counter.add(additions=2 * folds)
        return x[..., 0]


DEFAULT_FC_TABLE = FcTable()
