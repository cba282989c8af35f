"""
Operation counting — instrumented tallies and closed-form per-symbol costs.

The detectors accept an optional ``OpTally`` and add the real additions and
multiplications of the stages that the closed forms account for.
Divisions the closed forms leave out are kept apart in ``divisions``.  Dividing
a tally by the number of detected QAM symbols gives a per-symbol figure
directly comparable with ``analytic_counts``.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Tuple

from linksim.errors import InvalidArgumentError
from linksim.policy.kinds import DetectorKind, PrecoderKind


@dataclass
class OpTally:
    """Running count of real additions and multiplications."""

    additions: int = 0
    multiplications: int = 0
    divisions: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def add(self, additions: int = 0, multiplications: int = 0, divisions: int = 0) -> None:
        with self._lock:
            self.additions += int(additions)
            self.multiplications += int(multiplications)
            self.divisions += int(divisions)

    def per_symbol(self, n_symbols: int) -> Tuple[float, float]:
        return self.additions / n_symbols, self.multiplications / n_symbols


# ── Closed forms ─────────────────────────────────────────────────────────────

def _amplitude_width(q: int, order: int) -> int:
    return q * (math.isqrt(order) - 1) + 1


def map_counts(detector: DetectorKind, q: int, order: int) -> Tuple[int, int]:
    """Per-QAM-symbol cost of the SWH MAP detectors.

    Log-MAP:      adds (3·log2 J + 2)·J^(Q/2) + 2W,  mults 6W
    Max-Log-MAP:  adds (log2 J + 2)·J^(Q/2) + 2W,    mults 4W
    with W = Q(√J − 1) + 1 the amplitude-set size.
    """
    w = _amplitude_width(q, order)
    lj = int(math.log2(order))
    z = math.isqrt(order) ** q
    if detector is DetectorKind.SWH_LOG:
        return (3 * lj + 2) * z + 2 * w, 6 * w
    if detector is DetectorKind.SWH_MAXLOG:
        return (lj + 2) * z + 2 * w, 4 * w
    raise InvalidArgumentError(f"no closed-form count for {detector.value}")


def epic_counts(
    precoder: PrecoderKind,
    q: int,
    n: int,
    order: int,
    n_self: int,
) -> Tuple[int, int]:
    """Per-QAM-symbol cost of SILE-EPIC over ``n_self + 1`` self-iterations.

    The transform length is Q for the sparse precoders and N for DFT; the
    Walsh-Hadamard transform spends no multiplications.
    """
    size = n if precoder is PrecoderKind.DFT else q
    lt = int(math.log2(size))
    lj = int(math.log2(order))
    adds = (n_self + 1) * (4 * lt + lj + 7 * order + 6)
    fft_mults = 0 if precoder is PrecoderKind.SWH else 4 * lt
    mults = (n_self + 1) * (fft_mults + 8 * order + 11)
    return adds, mults


def analytic_counts(
    precoder: PrecoderKind,
    detector: DetectorKind,
    q: int,
    n: int,
    order: int,
    n_self: int,
) -> Tuple[int, int]:
    if detector.is_map:
        return map_counts(detector, q, order)
    return epic_counts(precoder, q, n, order, n_self)
