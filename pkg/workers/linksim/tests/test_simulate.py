"""Tests for the turbo loop and the Monte-Carlo / EXIT / complexity harness."""
import numpy as np
import pandas as pd
import pytest

from linksim.core.simulate import (
    DECODER_CURVE_GRID,
    build_context,
    complexity_report,
    complexity_table,
    decoder_curve,
    exit_trajectory,
    frame_rng,
    pick_exit_snr,
    point_key,
    run_fer_point,
    run_sweep,
    summarize,
)
from linksim.core.turbo import run_frame
from linksim.errors import CapabilityError, InvalidArgumentError
from linksim.io.schema import LinkConfig
from linksim.policy.kinds import DetectorKind
from linksim.policy.profile import ComplexityPreset


def _config(base: LinkConfig, **changes) -> LinkConfig:
    return LinkConfig(**{**base.model_dump(), **changes})


class TestStreams:
    def test_point_key_resolution(self):
        assert point_key(0.0) != point_key(0.001)
        assert point_key(2.0) == point_key(2.0000001)

    def test_frame_rng_reproducible(self):
        a = frame_rng(7, 2.0, 3).standard_normal(4)
        b = frame_rng(7, 2.0, 3).standard_normal(4)
        assert np.array_equal(a, b)

    def test_frame_rng_independent(self):
        a = frame_rng(7, 2.0, 3).standard_normal(4)
        assert not np.array_equal(a, frame_rng(7, 2.0, 4).standard_normal(4))
        assert not np.array_equal(a, frame_rng(8, 2.0, 3).standard_normal(4))


class TestRunFrame:
    def test_noiseless_frame_converges(self, small_config):
        ctx = build_context(small_config)
        out = run_frame(ctx, 50.0, frame_rng(1, 50.0, 0))
        assert out.bit_errors == 0
        assert out.converged
        assert out.turbo_iterations == 1
        assert out.n_info == 14

    def test_decoded_bits_reported(self, small_config):
        ctx = build_context(small_config)
        clean = run_frame(ctx, 50.0, frame_rng(1, 50.0, 0))
        noisy = run_frame(ctx, -4.0, frame_rng(1, -4.0, 0))
        assert clean.decoded.shape == noisy.decoded.shape == (14,)
        assert set(np.unique(noisy.decoded)) <= {0, 1}
        again = run_frame(ctx, -4.0, frame_rng(1, -4.0, 0))
        assert np.array_equal(again.decoded, noisy.decoded)

    def test_trace_covers_every_pass(self, small_config):
        ctx = build_context(small_config, early_exit=False)
        out = run_frame(ctx, 2.0, frame_rng(1, 2.0, 0), trace_mi=True)
        assert out.turbo_iterations == len(out.mi_trace) == 3
        assert abs(out.mi_trace[0][0]) < 1e-12

    @pytest.mark.parametrize("precoder,detector", [("swh", "epic"), ("sdft", "epic"), ("dft", "epic"), ("swh", "vamp")])
    def test_epic_noiseless(self, small_config, precoder, detector):
        cfg = _config(small_config, precoder=precoder, detector=detector)
        out = run_frame(build_context(cfg), 50.0, frame_rng(1, 50.0, 0))
        assert out.bit_errors == 0


class TestFerPoint:
    def test_high_snr_is_error_free(self, small_config):
        rec = run_fer_point(small_config, 50.0, progress=False)
        assert (rec.frames, rec.frame_errors, rec.ber) == (12, 0, 0.0)
        assert rec.mean_ti == 1.0

    def test_stop_rule(self, small_config):
        rec = run_fer_point(small_config, -4.0, progress=False)
        assert rec.frames <= 12
        assert rec.frame_errors == 5 or rec.frames == 12

    def test_same_seed_same_record(self, small_config):
        a = run_fer_point(small_config, 2.0, progress=False)
        b = run_fer_point(small_config, 2.0, progress=False)
        assert a == b

    def test_thread_count_does_not_change_result(self, small_config):
        one = run_fer_point(small_config, 2.0, threads=1, progress=False)
        two = run_fer_point(small_config, 2.0, threads=2, progress=False)
        assert one == two

    def test_capability_error_before_frames(self, small_config):
        cfg = _config(small_config, q=8, order=64, detector="swh-log")
        with pytest.raises(CapabilityError):
            run_fer_point(cfg, 2.0, progress=False)


class TestSweep:
    def test_writes_csv(self, small_config, tmp_path):
        cfg = _config(small_config, ebn0_db=[0.0, 50.0])
        records = run_sweep(cfg, output_dir=tmp_path, progress=False)
        df = pd.read_csv(tmp_path / "fer.csv")
        assert df["ebn0_db"].tolist() == [0.0, 50.0]
        assert df["frame_errors"].tolist() == [r.frame_errors for r in records]
        assert "FER=" in summarize(records)

    def test_fer_trends_down(self):
        cfg = LinkConfig(
            n=64, q=8, order=16, precoder="sdft", detector="epic", n_tau=4,
            ebn0_db=[4.0, 10.0, 16.0, 25.0, 40.0], seed=5,
            min_frame_errors=20, max_frames=20,
        )
        fers = [r.fer for r in run_sweep(cfg, progress=False)]
        assert fers[0] > fers[-1] == 0.0
        assert all(b <= a + 0.1 for a, b in zip(fers, fers[1:]))


class TestHighSnr:
    """Every EP scheme decodes cleanly once noise is negligible."""

    @pytest.mark.parametrize("order", [16, 64])
    @pytest.mark.parametrize("detector", ["epic", "vamp"])
    @pytest.mark.parametrize("precoder", ["dft", "sdft", "swh"])
    def test_error_free_at_40db(self, precoder, detector, order):
        cfg = LinkConfig(
            n=64, q=8, order=order, precoder=precoder, detector=detector, n_tau=4,
            ebn0_db=[40.0], seed=11, min_frame_errors=1, max_frames=10,
        )
        rec = run_fer_point(cfg, 40.0, progress=False)
        assert (rec.frames, rec.frame_errors, rec.bit_errors) == (10, 0, 0)


class TestExit:
    def test_trajectory_shape(self, small_config, tmp_path):
        report = exit_trajectory(small_config, ebn0_db=4.0, frames=4, output_dir=tmp_path)
        assert [p.ti for p in report.trajectory] == [0, 1, 2]
        assert abs(report.trajectory[0].ia_det) < 1e-12
        assert len(report.decoder_curve) == len(DECODER_CURVE_GRID)
        assert (tmp_path / "exit.csv").exists()
        assert (tmp_path / "exit_decoder.csv").exists()

    def test_decoder_curve_rises(self):
        curve = decoder_curve(64, seed=0, frames=10)
        assert curve[0].ie_dec < curve[-1].ie_dec
        assert curve[-1].ie_dec > 0.9

    def test_pick_snr_first_clean_point(self, small_config):
        cfg = _config(small_config, ebn0_db=[60.0, 50.0])
        assert pick_exit_snr(cfg) == 50.0


class TestComplexity:
    def test_table4_rows_match(self):
        rows = complexity_table(ComplexityPreset.table4())
        assert len(rows) == 21
        assert all(r.matches_expected for r in rows)
        skipped = [(r.detector, r.q, r.order) for r in rows if r.measured is None]
        assert skipped == [("swh-log", 8, 64), ("swh-maxlog", 8, 64)]

    def test_analytic_only(self):
        rows = complexity_table(ComplexityPreset.table4(), measure=False)
        assert all(r.measured is None for r in rows)

    def test_exact_map_rejected(self):
        cfg = LinkConfig(q=4, detector=DetectorKind.SWH_EXACT)
        with pytest.raises(InvalidArgumentError):
            complexity_report(cfg)

    def test_report_for_config(self):
        row = complexity_report(LinkConfig(q=4, order=16, detector="swh-maxlog"))
        assert (row.analytic.additions, row.analytic.multiplications) == (1_562, 52)
        assert row.measured.additions == row.analytic.additions
