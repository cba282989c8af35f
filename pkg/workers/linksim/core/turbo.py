"""
Turbo loop — one frame through transmitter, channel and the iterative
detector ↔ decoder receiver.

Bit streams:
  info (N_b) → RSC codeword c (N_c) → interleaved c̃ → [c̃^I ; c̃^Q] → QAM d
  → precoded x → y = Λx + w.

Receiver, for ``tau in 0..N_tau``:
  detector(y, L_A,det) → L_E,det → deinterleave → BCJR → APP
  L_E,dec = APP − L_E,det → interleave → L_A,det of the next pass.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from linksim.core.channel import ChannelState, noise_variance, proakis_c, random_taps, transmit
from linksim.core.epic_detector import detect_frame_epic
from linksim.core.exit_chart import mutual_information
from linksim.core.fec import CodeConfig, Interleaver, bcjr_decode, is_codeword, rsc_encode
from linksim.core.map_detector import AmplitudeIndexDb, build_amplitude_db, detect_frame_map
from linksim.core.numerics import DEFAULT_FC_TABLE, Constellation, FcTable, clip_llr, qam_map
from linksim.core.opcount import OpTally
from linksim.core.precode import PrecoderSpec, precode
from linksim.policy.kinds import ChannelModel, DbStorage, DetectorKind, InterleaverMode, PrecoderKind
from linksim.policy.profile import Schedule

logger = logging.getLogger(__name__)

_DEFAULT_CHANNEL_LENGTH = 5


# ── Link context ─────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class LinkContext:
    """Everything shared by the frames of one configuration.

    Built once per sweep; frames only read from it, so it is safe to share
    across worker threads.
    """

    constellation: Constellation
    spec: PrecoderSpec
    detector: DetectorKind
    schedule: Schedule
    code: CodeConfig = CodeConfig()
    fc: FcTable = DEFAULT_FC_TABLE
    db: Optional[AmplitudeIndexDb] = None
    channel_model: ChannelModel = ChannelModel.PROAKIS_C
    channel_length: int = _DEFAULT_CHANNEL_LENGTH
    interleaver_mode: InterleaverMode = InterleaverMode.RANDOM
    early_exit: bool = True
    llr_clip: float = 60.0

    @classmethod
    def build(
        cls,
        *,
        n: int,
        q: int,
        order: int,
        precoder: PrecoderKind,
        detector: DetectorKind,
        schedule: Schedule,
        channel_model: ChannelModel = ChannelModel.PROAKIS_C,
        interleaver_mode: InterleaverMode = InterleaverMode.RANDOM,
        db_storage: DbStorage = DbStorage.FULL,
        early_exit: bool = True,
        llr_clip: float = 60.0,
        budget: int = 2 ** 20,
    ) -> LinkContext:
        """Validate the geometry and build the MAP database up front.

        Raises ``CapabilityError`` before any frame runs when a MAP detector
        would exceed the enumeration budget.
        """
        detector = DetectorKind(detector)
        channel_model = ChannelModel(channel_model)
        length = proakis_c().size if channel_model is ChannelModel.PROAKIS_C else _DEFAULT_CHANNEL_LENGTH
        spec = PrecoderSpec.create(precoder, n, q, channel_length=length)
        constellation = Constellation(order)
        db = None
        if detector.is_map:
            db = build_amplitude_db(spec.q, order, budget=budget, storage=db_storage)
        return cls(
            constellation=constellation,
            spec=spec,
            detector=detector,
            schedule=schedule,
            db=db,
            channel_model=channel_model,
            channel_length=length,
            interleaver_mode=InterleaverMode(interleaver_mode),
            early_exit=early_exit,
            llr_clip=llr_clip,
        )

    @property
    def n_coded(self) -> int:
        return self.spec.n * self.constellation.bits_per_symbol

    @property
    def n_info(self) -> int:
        return self.code.info_length(self.n_coded)

    def channel(self, noise_var: float, rng: np.random.Generator) -> ChannelState:
        if self.channel_model is ChannelModel.RANDOM:
            taps = random_taps(self.channel_length, rng)
        else:
            taps = proakis_c()
        return ChannelState.build(taps, self.spec.n, noise_var)

    def interleaver(self, rng: np.random.Generator) -> Interleaver:
        if self.interleaver_mode is InterleaverMode.IDENTITY:
            return Interleaver.identity(self.n_coded)
        return Interleaver.random(self.n_coded, rng)

    def detect(
        self,
        y: np.ndarray,
        lam: np.ndarray,
        noise_var: float,
        apriori: np.ndarray,
        turbo_index: int,
        counter: Optional[OpTally] = None,
    ) -> np.ndarray:
        if self.detector.is_map:
            return detect_frame_map(
                y, lam, noise_var, apriori, self.spec,
                variant=self.detector.map_variant,
                constellation=self.constellation,
                db=self.db,
                fc=self.fc,
                counter=counter,
                llr_clip=self.llr_clip,
            )
        return detect_frame_epic(
            y, lam, noise_var, apriori, self.spec, self.schedule,
            variant=self.detector.epic_variant,
            constellation=self.constellation,
            turbo_index=turbo_index,
            counter=counter,
            llr_clip=self.llr_clip,
        )


# ── One frame ────────────────────────────────────────────────────────────────

@dataclass
class FrameOutcome:
    """Result of one simulated frame.

    ``turbo_iterations`` counts detector passes actually run.  ``mi_trace``
    holds ``(IA_det, IE_det, IA_dec, IE_dec)`` per pass when tracing.  ``decoded`` is
    the hard info-bit decision of the last pass.
    """

    bit_errors: int
    n_info: int
    turbo_iterations: int
    converged: bool
    mi_trace: List[Tuple[float, float, float, float]] = field(default_factory=list)
    decoded: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def frame_error(self) -> bool:
        return self.bit_errors > 0


def run_frame(
    ctx: LinkContext,
    ebn0_db: float,
    rng: np.random.Generator,
    trace_mi: bool = False,
    counter: Optional[OpTally] = None,
) -> FrameOutcome:
    """Simulate one frame; *rng* is the frame's private stream."""
    n_info = ctx.n_info
    info = rng.integers(0, 2, n_info)
    coded = rsc_encode(info, ctx.code, n_coded=ctx.n_coded)
    pi = ctx.interleaver(rng)
    tx_bits = pi.interleave(coded)
    half = ctx.n_coded // 2
    d = qam_map(tx_bits[:half], tx_bits[half:], ctx.constellation)
    x = precode(ctx.spec, d)

    noise_var = noise_variance(ebn0_db, ctx.constellation.order, ctx.code.rate)
    state = ctx.channel(noise_var, rng)
    y = transmit(x, state, rng)

    la_det = np.zeros(ctx.n_coded)
    hard_info = np.zeros(n_info, dtype=np.int64)
    trace: List[Tuple[float, float, float, float]] = []
    converged = False
    passes = 0
    for tau in range(ctx.schedule.n_turbo + 1):
        passes = tau + 1
        le_det = ctx.detect(y, state.fd_diag, noise_var, la_det, tau, counter=counter)
        dec_in = pi.deinterleave(le_det)
        app_coded, app_info = bcjr_decode(dec_in, code=ctx.code, fc=ctx.fc, llr_clip=ctx.llr_clip)
        le_dec = app_coded - dec_in
        hard_info = (app_info < 0).astype(np.int64)

        if trace_mi:
            trace.append((
                mutual_information(tx_bits, la_det),
                mutual_information(tx_bits, le_det),
                mutual_information(coded, dec_in),
                mutual_information(coded, le_dec),
            ))

        la_det = clip_llr(pi.interleave(le_dec), ctx.llr_clip)
        if ctx.early_exit and is_codeword((app_coded < 0).astype(np.uint8), ctx.code):
            converged = True
            break

    bit_errors = int(np.count_nonzero(hard_info != info))
    return FrameOutcome(
        bit_errors=bit_errors,
        n_info=n_info,
        turbo_iterations=passes,
        converged=converged,
        mi_trace=trace,
        decoded=hard_info,
    )
