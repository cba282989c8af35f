"""
Schema — Pydantic models for linksim configuration and outputs.

Input:
  LinkConfig        — one experiment (geometry, receiver, SNR grid, stop rule).

Outputs:
  FerRecord         — one Eb/N0 point of a FER/BER sweep (→ fer CSV).
  ExitPoint         — one turbo iteration of an MI trajectory (→ exit CSV).
  DecoderPoint      — one sample of the decoder transfer curve.
  OpCounter         — per-QAM-symbol real additions / multiplications.
  ComplexityRow     — analytic and measured counters of one scheme.
  RunManifest       — runtime contract written next to every CSV.
"""
from __future__ import annotations

import math
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from linksim import PACKAGE_NAME, SCHEMA_VERSION, SIMULATOR_VERSION
from linksim.policy.kinds import (
    ChannelModel,
    CounterSource,
    DbStorage,
    DetectorKind,
    InterleaverMode,
    PrecoderKind,
)
from linksim.policy.profile import Schedule


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


# ── Experiment configuration ─────────────────────────────────────────────────

class LinkConfig(BaseModel):
    """Full experiment description; unknown fields are rejected."""

    model_config = ConfigDict(extra="forbid")

    # Block geometry
    n: int = 256
    q: int = 8
    order: int = 4

    # Transmitter / receiver
    precoder: PrecoderKind = PrecoderKind.SWH
    detector: DetectorKind = DetectorKind.SWH_LOG
    channel_model: ChannelModel = ChannelModel.PROAKIS_C
    interleaver: InterleaverMode = InterleaverMode.RANDOM
    db_storage: DbStorage = DbStorage.FULL

    # Turbo schedule
    n_tau: int = Field(default=9, ge=0)
    n_s: Optional[int] = Field(default=None, ge=0)
    beta0: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    beta_decay: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    early_exit: bool = True

    # Monte-Carlo
    ebn0_db: List[float] = Field(default_factory=lambda: [0.0, 2.0, 4.0, 6.0, 8.0])
    seed: int = Field(default=0, ge=0)
    min_frame_errors: int = Field(default=500, ge=1)
    max_frames: int = Field(default=200_000, ge=1)

    # Outputs
    output: Optional[str] = None

    @model_validator(mode="after")
    def _check_geometry(self) -> LinkConfig:
        if not _is_power_of_two(self.n):
            raise ValueError(f"n must be a power of two, got {self.n}")
        side = math.isqrt(self.order)
        if self.order < 4 or side * side != self.order or not _is_power_of_two(side):
            raise ValueError(f"order must be a square power of four, got {self.order}")
        if self.precoder is PrecoderKind.DFT:
            self.q = self.n
        if not _is_power_of_two(self.q) or self.q > self.n:
            raise ValueError(f"q must be a power of two no larger than n, got {self.q}")
        if self.detector.is_map and self.precoder is not PrecoderKind.SWH:
            raise ValueError(
                f"{self.detector.value} needs the swh precoder, got {self.precoder.value}"
            )
        if not self.ebn0_db:
            raise ValueError("ebn0_db grid is empty")
        return self

    @property
    def p(self) -> int:
        return self.n // self.q

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.order))

    @property
    def n_coded(self) -> int:
        return self.n * self.bits_per_symbol

    @property
    def schedule(self) -> Schedule:
        return Schedule.for_order(
            self.order,
            n_turbo=self.n_tau,
            n_self=self.n_s,
            beta0=self.beta0,
            decay=self.beta_decay,
        )

    @property
    def scheme(self) -> str:
        return self.precoder.value


# ── FER sweep ────────────────────────────────────────────────────────────────

FER_COLUMNS = [
    "scheme", "detector", "Q", "J", "ebn0_db",
    "frames", "frame_errors", "fer", "ber", "mean_ti",
]


class FerRecord(BaseModel):
    """Monte-Carlo result at one Eb/N0 point."""
    scheme: str
    detector: str
    q: int
    order: int
    ebn0_db: float
    esn0_db: float = 0.0
    frames: int
    frame_errors: int
    bit_errors: int = 0
    fer: float
    ber: float
    mean_ti: float

    @model_validator(mode="after")
    def _check_rates(self) -> FerRecord:
        if not 0 <= self.frame_errors <= self.frames:
            raise ValueError("frame_errors must lie in [0, frames]")
        if self.frames and not math.isclose(self.fer, self.frame_errors / self.frames, rel_tol=1e-9):
            raise ValueError("fer must equal frame_errors / frames")
        return self

    def to_row(self) -> Dict[str, object]:
        return {
            "scheme": self.scheme,
            "detector": self.detector,
            "Q": self.q,
            "J": self.order,
            "ebn0_db": self.ebn0_db,
            "frames": self.frames,
            "frame_errors": self.frame_errors,
            "fer": self.fer,
            "ber": self.ber,
            "mean_ti": self.mean_ti,
        }


# ── EXIT analysis ────────────────────────────────────────────────────────────

EXIT_COLUMNS = ["ti", "IA_det", "IE_det", "IA_dec", "IE_dec"]
DECODER_CURVE_COLUMNS = ["IA_dec", "IE_dec"]


class ExitPoint(BaseModel):
    """Frame-averaged MI values after one turbo iteration."""
    ti: int
    ia_det: float
    ie_det: float
    ia_dec: float
    ie_dec: float

    def to_row(self) -> Dict[str, object]:
        return {
            "ti": self.ti,
            "IA_det": self.ia_det,
            "IE_det": self.ie_det,
            "IA_dec": self.ia_dec,
            "IE_dec": self.ie_dec,
        }


class DecoderPoint(BaseModel):
    ia_dec: float
    ie_dec: float

    def to_row(self) -> Dict[str, object]:
        return {"IA_dec": self.ia_dec, "IE_dec": self.ie_dec}


class ExitReport(BaseModel):
    ebn0_db: float
    frames: int
    trajectory: List[ExitPoint] = Field(default_factory=list)
    decoder_curve: List[DecoderPoint] = Field(default_factory=list)


# ── Complexity ───────────────────────────────────────────────────────────────

COMPLEXITY_COLUMNS = [
    "scheme", "detector", "Q", "J", "Ns",
    "adds_analytic", "mults_analytic", "adds_measured", "mults_measured",
]


class OpCounter(BaseModel):
    """Real additions / multiplications per QAM symbol."""
    additions: float
    multiplications: float
    source: CounterSource


class ComplexityRow(BaseModel):
    scheme: str
    detector: str
    q: int
    order: int
    n_s: int
    analytic: OpCounter
    measured: Optional[OpCounter] = None
    expected_additions: Optional[int] = None
    expected_multiplications: Optional[int] = None

    @property
    def matches_expected(self) -> bool:
        """Analytic (and measured, when present) equal the expected values."""
        if self.expected_additions is None or self.expected_multiplications is None:
            return True
        pairs = [self.analytic]
        if self.measured is not None:
            pairs.append(self.measured)
        return all(
            c.additions == self.expected_additions
            and c.multiplications == self.expected_multiplications
            for c in pairs
        )

    def to_row(self) -> Dict[str, object]:
        def _num(v: Optional[float]) -> object:
            if v is None:
                return ""
            return int(v) if float(v).is_integer() else v

        return {
            "scheme": self.scheme,
            "detector": self.detector,
            "Q": self.q,
            "J": self.order,
            "Ns": self.n_s,
            "adds_analytic": _num(self.analytic.additions),
            "mults_analytic": _num(self.analytic.multiplications),
            "adds_measured": _num(self.measured.additions if self.measured else None),
            "mults_measured": _num(self.measured.multiplications if self.measured else None),
        }


# ── Runtime contract ─────────────────────────────────────────────────────────

class RunManifest(BaseModel):
    """Provenance written next to the CSV outputs of a run."""
    package_name: str = PACKAGE_NAME
    simulator_version: str = SIMULATOR_VERSION
    schema_version: str = SCHEMA_VERSION
    command: str
    config: Optional[LinkConfig] = None
    threads: int = 1
    outputs: List[str] = Field(default_factory=list)
