"""
Simulation harness — Monte-Carlo FER points and sweeps, EXIT trajectories,
and complexity reports.

Every frame draws from its own Philox stream keyed by
``(seed, Eb/N0, frame index)``.  Frames run in batches on a thread pool and
are folded into the running totals strictly in frame-index order, so a
result depends only on the configuration and seed, never on the number of
threads.
"""
from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from linksim.core.channel import esn0_db
from linksim.core.epic_detector import detect_frame_epic
from linksim.core.exit_chart import gaussian_llrs, j_inverse, mutual_information
from linksim.core.fec import CodeConfig, bcjr_decode, rsc_encode
from linksim.core.map_detector import build_amplitude_db, detect_frame_map
from linksim.core.numerics import Constellation
from linksim.core.opcount import OpTally, analytic_counts
from linksim.core.precode import PrecoderSpec
from linksim.core.turbo import FrameOutcome, LinkContext, run_frame
from linksim.errors import CapabilityError, InvalidArgumentError
from linksim.io.schema import (
    ComplexityRow,
    DecoderPoint,
    ExitPoint,
    ExitReport,
    FerRecord,
    LinkConfig,
    OpCounter,
)
from linksim.io.writer import write_decoder_curve_csv, write_exit_csv, write_fer_csv
from linksim.policy.kinds import CounterSource, DetectorKind, PrecoderKind
from linksim.policy.profile import ComplexityPreset, Schedule
from linksim.settings import settings

logger = logging.getLogger(__name__)

# Streams outside the frame key space.
_DECODER_CURVE_KEY = 2 ** 32 - 1
_MEASURE_KEY = 2 ** 32 - 2

EXIT_PROBE_ERRORS = 20
EXIT_PROBE_FRAMES = 200
DECODER_CURVE_GRID = tuple(round(0.1 * i, 1) for i in range(10)) + (0.95, 0.99)


# ── RNG streams ──────────────────────────────────────────────────────────────

def point_key(ebn0_db: float) -> int:
    """Non-negative integer key of an Eb/N0 value, resolved to 1e-3 dB."""
    return int(round((ebn0_db + 1000.0) * 1000.0))


def frame_rng(seed: int, ebn0_db: float, frame_idx: int) -> np.random.Generator:
    """Counter-based stream of one frame."""
    ss = np.random.SeedSequence(seed, spawn_key=(point_key(ebn0_db), frame_idx))
    return np.random.Generator(np.random.Philox(ss))


# ── Context ──────────────────────────────────────────────────────────────────

def build_context(config: LinkConfig, early_exit: Optional[bool] = None) -> LinkContext:
    return LinkContext.build(
        n=config.n,
        q=config.q,
        order=config.order,
        precoder=config.precoder,
        detector=config.detector,
        schedule=config.schedule,
        channel_model=config.channel_model,
        interleaver_mode=config.interleaver,
        db_storage=config.db_storage,
        early_exit=config.early_exit if early_exit is None else early_exit,
        llr_clip=settings.llr_clip,
        budget=settings.enumeration_budget,
    )


def _frames(
    ctx: LinkContext,
    seed: int,
    ebn0_db: float,
    threads: int,
    batch: int,
    trace_mi: bool = False,
) -> Iterator[FrameOutcome]:
    """Yield frame outcomes in index order, computing them batch by batch."""

    def one(idx: int) -> FrameOutcome:
        return run_frame(ctx, ebn0_db, frame_rng(seed, ebn0_db, idx), trace_mi=trace_mi)

    if threads <= 1:
        yield from map(one, itertools.count())
        return
    start = 0
    with ThreadPoolExecutor(max_workers=threads) as pool:
        while True:
            yield from pool.map(one, range(start, start + batch))
            start += batch


# ── FER ──────────────────────────────────────────────────────────────────────

def run_fer_point(
    config: LinkConfig,
    ebn0_db: float,
    threads: Optional[int] = None,
    context: Optional[LinkContext] = None,
    min_frame_errors: Optional[int] = None,
    max_frames: Optional[int] = None,
    progress: Optional[bool] = None,
) -> FerRecord:
    """Simulate frames at one Eb/N0 until the stop rule fires."""
    ctx = context or build_context(config)
    threads = max(1, threads or settings.threads)
    min_errors = min_frame_errors or config.min_frame_errors
    cap = max_frames or config.max_frames
    show = settings.progress if progress is None else progress

    frames = frame_errors = bit_errors = total_ti = 0
    logger.info(
        "Eb/N0=%.2f dB (Es/N0=%.2f dB): %s/%s Q=%d J=%d",
        ebn0_db, esn0_db(ebn0_db, config.order), config.scheme,
        config.detector.value, config.q, config.order,
    )
    outcomes = _frames(ctx, config.seed, ebn0_db, threads, settings.batch_frames)
    with tqdm(total=cap, disable=not show, desc=f"{ebn0_db:g} dB", unit="frame", leave=False) as bar:
        for outcome in outcomes:
            frames += 1
            bit_errors += outcome.bit_errors
            frame_errors += int(outcome.frame_error)
            total_ti += outcome.turbo_iterations
            bar.update(1)
            if frame_errors >= min_errors or frames >= cap:
                break
    outcomes.close()

    record = FerRecord(
        scheme=config.scheme,
        detector=config.detector.value,
        q=config.q,
        order=config.order,
        ebn0_db=ebn0_db,
        esn0_db=esn0_db(ebn0_db, config.order),
        frames=frames,
        frame_errors=frame_errors,
        bit_errors=bit_errors,
        fer=frame_errors / frames,
        ber=bit_errors / (frames * ctx.n_info),
        mean_ti=total_ti / frames,
    )
    logger.info(
        "Eb/N0=%.2f dB: %d frames, %d errors, FER=%.3e BER=%.3e TI=%.2f",
        ebn0_db, frames, frame_errors, record.fer, record.ber, record.mean_ti,
    )
    return record


def run_sweep(
    config: LinkConfig,
    threads: Optional[int] = None,
    output_dir: Optional[Path] = None,
    progress: Optional[bool] = None,
) -> List[FerRecord]:
    """Run every point of the Eb/N0 grid; writes ``fer.csv`` when given a directory."""
    ctx = build_context(config)
    records = [
        run_fer_point(config, ebn0, threads=threads, context=ctx, progress=progress)
        for ebn0 in config.ebn0_db
    ]
    if output_dir is not None:
        path = write_fer_csv(records, Path(output_dir) / "fer.csv")
        logger.info("Wrote %s", path)
    return records


# ── EXIT ─────────────────────────────────────────────────────────────────────

def pick_exit_snr(config: LinkConfig, threads: Optional[int] = None) -> float:
    """Lowest grid point whose probed FER is below 0.5 (last point otherwise)."""
    ctx = build_context(config)
    for ebn0 in sorted(config.ebn0_db):
        probe = run_fer_point(
            config, ebn0, threads=threads, context=ctx,
            min_frame_errors=EXIT_PROBE_ERRORS, max_frames=EXIT_PROBE_FRAMES,
            progress=False,
        )
        if probe.fer < 0.5:
            return ebn0
    logger.warning("no grid point reaches FER < 0.5; using %.2f dB", max(config.ebn0_db))
    return max(config.ebn0_db)


def decoder_curve(
    n_coded: int,
    seed: int,
    frames: int = 20,
    grid: Sequence[float] = DECODER_CURVE_GRID,
    code: CodeConfig = CodeConfig(),
) -> List[DecoderPoint]:
    """Sample ``IE_dec(IA_dec)`` with consistent Gaussian a-priori LLRs."""
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence(seed, spawn_key=(_DECODER_CURVE_KEY,))
    ))
    n_info = code.info_length(n_coded)
    points = []
    for ia in grid:
        sigma = j_inverse(ia)
        bits, llrs = [], []
        for _ in range(frames):
            coded = rsc_encode(rng.integers(0, 2, n_info), code)
            la = gaussian_llrs(coded, sigma, rng)
            app, _ = bcjr_decode(la, code=code)
            bits.append(coded)
            llrs.append(app - la)
        ie = mutual_information(np.concatenate(bits), np.concatenate(llrs))
        points.append(DecoderPoint(ia_dec=ia, ie_dec=ie))
    return points


def exit_trajectory(
    config: LinkConfig,
    ebn0_db: Optional[float] = None,
    frames: int = 100,
    threads: Optional[int] = None,
    output_dir: Optional[Path] = None,
) -> ExitReport:
    """Frame-averaged MI per turbo iteration, plus the decoder transfer curve.

    Early exit is disabled so every frame contributes to every iteration.
    """
    if ebn0_db is None:
        ebn0_db = pick_exit_snr(config, threads=threads)
    ctx = build_context(config, early_exit=False)
    threads = max(1, threads or settings.threads)
    logger.info("EXIT trajectory at Eb/N0=%.2f dB over %d frames", ebn0_db, frames)

    sums = np.zeros((config.n_tau + 1, 4))
    outcomes = _frames(ctx, config.seed, ebn0_db, threads, settings.batch_frames, trace_mi=True)
    for _ in range(frames):
        sums += np.asarray(next(outcomes).mi_trace)
    outcomes.close()
    means = sums / frames

    report = ExitReport(
        ebn0_db=ebn0_db,
        frames=frames,
        trajectory=[
            ExitPoint(ti=ti, ia_det=row[0], ie_det=row[1], ia_dec=row[2], ie_dec=row[3])
            for ti, row in enumerate(means)
        ],
        decoder_curve=decoder_curve(ctx.n_coded, config.seed, code=ctx.code),
    )
    if output_dir is not None:
        write_exit_csv(report.trajectory, Path(output_dir) / "exit.csv")
        write_decoder_curve_csv(report.decoder_curve, Path(output_dir) / "exit_decoder.csv")
    return report


# ── Complexity ───────────────────────────────────────────────────────────────

def _measure_map(detector: DetectorKind, q: int, order: int, budget: int) -> Optional[OpCounter]:
    """Tally one detector pass over a single group on a flat channel."""
    try:
        db = build_amplitude_db(q, order, budget=budget)
    except CapabilityError as e:
        logger.info("measured count skipped for Q=%d J=%d: %s", q, order, e)
        return None
    const = Constellation(order)
    spec = PrecoderSpec(PrecoderKind.SWH, q, q)
    rng = np.random.default_rng(_MEASURE_KEY)
    y = rng.standard_normal(q) + 1j * rng.standard_normal(q)
    apriori = rng.standard_normal(q * const.bits_per_symbol)
    tally = OpTally()
    detect_frame_map(
        y, np.ones(q, dtype=complex), 1.0, apriori, spec,
        variant=detector.map_variant, constellation=const, db=db, counter=tally,
    )
    adds, mults = tally.per_symbol(q)
    return OpCounter(additions=adds, multiplications=mults, source=CounterSource.MEASURED)


def _measure_epic(
    precoder: PrecoderKind,
    detector: DetectorKind,
    n: int,
    q: int,
    order: int,
    schedule: Schedule,
) -> OpCounter:
    const = Constellation(order)
    spec = PrecoderSpec.create(precoder, n, q)
    rng = np.random.default_rng(_MEASURE_KEY)
    y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    lam = np.fft.fft(rng.standard_normal(5), n)
    apriori = rng.standard_normal(n * const.bits_per_symbol)
    tally = OpTally()
    detect_frame_epic(
        y, lam, 0.5, apriori, spec, schedule,
        variant=detector.epic_variant, constellation=const, counter=tally,
    )
    adds, mults = tally.per_symbol(n)
    return OpCounter(additions=adds, multiplications=mults, source=CounterSource.MEASURED)


def complexity_report(
    config: LinkConfig,
    measure: bool = True,
    expected: Optional[Tuple[int, int]] = None,
) -> ComplexityRow:
    """Analytic and (optionally) measured per-symbol counts for *config*."""
    if config.detector is DetectorKind.SWH_EXACT:
        raise InvalidArgumentError("the exact MAP detector has no complexity model")
    schedule = config.schedule
    n_self = 0 if config.detector.is_map else schedule.n_self
    adds, mults = analytic_counts(
        config.precoder, config.detector, config.q, config.n, config.order, n_self,
    )
    analytic = OpCounter(additions=adds, multiplications=mults, source=CounterSource.ANALYTIC)

    measured = None
    if measure:
        if config.detector.is_map:
            measured = _measure_map(config.detector, config.q, config.order, settings.enumeration_budget)
        else:
            measured = _measure_epic(
                config.precoder, config.detector, config.n, config.q, config.order, schedule,
            )
    exp_adds, exp_mults = expected if expected is not None else (None, None)
    return ComplexityRow(
        scheme=config.scheme,
        detector=config.detector.value,
        q=config.q,
        order=config.order,
        n_s=n_self,
        analytic=analytic,
        measured=measured,
        expected_additions=exp_adds,
        expected_multiplications=exp_mults,
    )


def complexity_table(preset: ComplexityPreset, measure: bool = True) -> List[ComplexityRow]:
    """Evaluate every reference case of *preset*."""
    rows = []
    for case in preset.cases:
        config = LinkConfig(
            n=case.n,
            q=case.q,
            order=case.order,
            precoder=case.precoder,
            detector=case.detector,
            n_s=case.n_self if not case.detector.is_map else None,
        )
        rows.append(complexity_report(
            config, measure=measure, expected=(case.additions, case.multiplications),
        ))
    mismatches = sum(not r.matches_expected for r in rows)
    logger.info("complexity preset %s: %d rows, %d mismatches", preset.preset_id, len(rows), mismatches)
    return rows


def summarize(records: Iterable[FerRecord]) -> str:
    return "\n".join(
        f"{r.scheme} {r.detector} Q={r.q} J={r.order} Eb/N0={r.ebn0_db:g} dB: "
        f"frames={r.frames} errors={r.frame_errors} FER={r.fer:.3e} "
        f"BER={r.ber:.3e} TI={r.mean_ti:.2f}"
        for r in records
    )
