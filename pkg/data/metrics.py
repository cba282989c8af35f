"""
Metric computation over FER sweeps.

This module turns the raw records of :mod:`data.loader` into the
comparisons used to judge receivers:

1. **add_confidence** — Wilson score interval on each FER estimate.
2. **snr_at_fer** — Eb/N0 at which a curve crosses a target FER.
3. **snr_gap** / **gap_table** — SNR distance between two curves at a
   target FER.

All functions accept and return plain DataFrames or floats.  No side
effects, no plotting, no file I/O.
"""

from __future__ import annotations

import logging
import math
from typing import Iterable, Tuple

import numpy as np
import pandas as pd
from scipy.stats import norm

log = logging.getLogger(__name__)

DEFAULT_TARGET_FER = 1e-2


# ═══════════════════════════════════════════════════════════════════════════════
# 1. Confidence intervals
# ═══════════════════════════════════════════════════════════════════════════════

def wilson_interval(errors: int, frames: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval for a binomial rate ``errors / frames``."""
    if frames <= 0:
        raise ValueError("frames must be positive")
    if not 0 <= errors <= frames:
        raise ValueError("errors must lie in [0, frames]")
    z = float(norm.ppf(0.5 + confidence / 2.0))
    p = errors / frames
    denom = 1.0 + z * z / frames
    centre = (p + z * z / (2 * frames)) / denom
    half = z * math.sqrt(p * (1 - p) / frames + z * z / (4 * frames * frames)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def add_confidence(df: pd.DataFrame, confidence: float = 0.95) -> pd.DataFrame:
    """Add ``fer_lo`` / ``fer_hi`` columns to a FER record frame."""
    out = df.copy()
    bounds = [
        wilson_interval(int(e), int(n), confidence)
        for e, n in zip(out["frame_errors"], out["frames"])
    ]
    out["fer_lo"] = [b[0] for b in bounds]
    out["fer_hi"] = [b[1] for b in bounds]
    return out


# ═══════════════════════════════════════════════════════════════════════════════
# 2. SNR at a target FER
# ═══════════════════════════════════════════════════════════════════════════════

def snr_at_fer(curve: pd.DataFrame, target: float = DEFAULT_TARGET_FER) -> float:
    """Eb/N0 where *curve* first falls through *target*.

    Interpolates linearly in ``log10(fer)`` between the last point at or
    above the target and the next point below it.  Points with zero errors
    are used only as the lower bracket, placed at half an error.  Returns
    NaN when the curve never brackets the target.
    """
    if not 0 < target < 1:
        raise ValueError("target FER must lie in (0, 1)")
    pts = curve.sort_values("ebn0_db")
    snr = pts["ebn0_db"].to_numpy(dtype=float)
    fer = pts["fer"].to_numpy(dtype=float)
    frames = pts["frames"].to_numpy(dtype=float)
    fer = np.where(fer > 0, fer, 0.5 / frames)

    for i in range(len(snr) - 1):
        if fer[i] >= target > fer[i + 1]:
            lo, hi = math.log10(fer[i]), math.log10(fer[i + 1])
            frac = (math.log10(target) - lo) / (hi - lo)
            return float(snr[i] + frac * (snr[i + 1] - snr[i]))
    if len(snr) and fer[0] < target:
        log.debug("curve is below FER %.1e from its first point", target)
    return float("nan")


def snr_gap(
    df: pd.DataFrame,
    reference: str,
    candidate: str,
    target: float = DEFAULT_TARGET_FER,
) -> float:
    """SNR the *candidate* label needs beyond the *reference* label, in dB.

    Positive values mean the candidate is worse.
    """
    ref = snr_at_fer(df[df["label"] == reference], target)
    cand = snr_at_fer(df[df["label"] == candidate], target)
    return cand - ref


def gap_table(
    df: pd.DataFrame,
    pairs: Iterable[Tuple[str, str]],
    target: float = DEFAULT_TARGET_FER,
) -> pd.DataFrame:
    """One row per ``(reference, candidate)`` pair with both SNRs and the gap."""
    rows = []
    for reference, candidate in pairs:
        ref = snr_at_fer(df[df["label"] == reference], target)
        cand = snr_at_fer(df[df["label"] == candidate], target)
        rows.append({
            "reference": reference,
            "candidate": candidate,
            "target_fer": target,
            "snr_reference": ref,
            "snr_candidate": cand,
            "gap_db": cand - ref,
        })
    return pd.DataFrame(
        rows,
        columns=["reference", "candidate", "target_fer", "snr_reference", "snr_candidate", "gap_db"],
    )
