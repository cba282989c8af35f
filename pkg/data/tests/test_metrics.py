"""
Metric-function tests — Wilson intervals, SNR at a target FER and gaps.

Run with::

    pytest data/tests/test_metrics.py -v
"""

from __future__ import annotations

import math

import pandas as pd
import pytest

from data.metrics import add_confidence, gap_table, snr_at_fer, snr_gap, wilson_interval


# ═══════════════════════════════════════════════════════════════════════════════
# Helpers
# ═══════════════════════════════════════════════════════════════════════════════

def _curve(label: str, points, frames: int = 1000) -> pd.DataFrame:
    """Build a FER curve from ``(ebn0_db, fer)`` pairs."""
    return pd.DataFrame([
        {
            "label": label,
            "ebn0_db": snr,
            "frames": frames,
            "frame_errors": int(round(fer * frames)),
            "fer": fer,
        }
        for snr, fer in points
    ])


# ═══════════════════════════════════════════════════════════════════════════════
# wilson_interval / add_confidence
# ═══════════════════════════════════════════════════════════════════════════════

class TestWilson:

    def test_contains_estimate(self):
        lo, hi = wilson_interval(30, 100)
        assert lo < 0.3 < hi

    def test_known_value(self):
        lo, hi = wilson_interval(5, 10)
        assert lo == pytest.approx(0.2366, abs=1e-4)
        assert hi == pytest.approx(0.7634, abs=1e-4)

    def test_zero_errors(self):
        lo, hi = wilson_interval(0, 100)
        assert lo == pytest.approx(0.0, abs=1e-12)
        assert 0 < hi < 0.05

    def test_narrows_with_frames(self):
        w1 = wilson_interval(10, 100)
        w2 = wilson_interval(100, 1000)
        assert w2[1] - w2[0] < w1[1] - w1[0]

    @pytest.mark.parametrize("errors,frames", [(1, 0), (-1, 10), (11, 10)])
    def test_rejects_bad_counts(self, errors, frames):
        with pytest.raises(ValueError):
            wilson_interval(errors, frames)

    def test_add_confidence_columns(self):
        df = add_confidence(_curve("a", [(0.0, 0.5), (1.0, 0.1)]))
        assert list(df.columns[-2:]) == ["fer_lo", "fer_hi"]
        assert (df["fer_lo"] <= df["fer"]).all()
        assert (df["fer"] <= df["fer_hi"]).all()


# ═══════════════════════════════════════════════════════════════════════════════
# snr_at_fer
# ═══════════════════════════════════════════════════════════════════════════════

class TestSnrAtFer:

    def test_log_interpolation(self):
        curve = _curve("a", [(0.0, 1e-1), (2.0, 1e-3)])
        assert snr_at_fer(curve, 1e-2) == pytest.approx(1.0)

    def test_exact_grid_point(self):
        curve = _curve("a", [(0.0, 0.5), (1.0, 1e-2), (2.0, 1e-3)])
        assert snr_at_fer(curve, 1e-2) == pytest.approx(1.0)

    def test_unsorted_input(self):
        curve = _curve("a", [(2.0, 1e-3), (0.0, 1e-1)])
        assert snr_at_fer(curve, 1e-2) == pytest.approx(1.0)

    def test_zero_error_point_as_lower_bracket(self):
        curve = _curve("a", [(0.0, 0.2), (1.0, 0.0)], frames=1000)
        # the zero point stands in for FER 5e-4
        expected = (math.log10(1e-2) - math.log10(0.2)) / (math.log10(5e-4) - math.log10(0.2))
        assert snr_at_fer(curve, 1e-2) == pytest.approx(expected)

    def test_not_bracketed(self):
        assert math.isnan(snr_at_fer(_curve("a", [(0.0, 0.5), (1.0, 0.2)]), 1e-2))
        assert math.isnan(snr_at_fer(_curve("a", [(0.0, 1e-3), (1.0, 1e-4)]), 1e-2))

    def test_rejects_bad_target(self):
        with pytest.raises(ValueError):
            snr_at_fer(_curve("a", [(0.0, 0.5)]), 1.0)


# ═══════════════════════════════════════════════════════════════════════════════
# snr_gap / gap_table
# ═══════════════════════════════════════════════════════════════════════════════

class TestGaps:

    @pytest.fixture
    def curves(self) -> pd.DataFrame:
        return pd.concat([
            _curve("ref", [(0.0, 1e-1), (2.0, 1e-3)]),
            _curve("worse", [(1.0, 1e-1), (3.0, 1e-3)]),
        ], ignore_index=True)

    def test_gap_sign(self, curves):
        assert snr_gap(curves, "ref", "worse") == pytest.approx(1.0)
        assert snr_gap(curves, "worse", "ref") == pytest.approx(-1.0)

    def test_table(self, curves):
        table = gap_table(curves, [("ref", "worse")])
        assert table.loc[0, "gap_db"] == pytest.approx(1.0)
        assert table.loc[0, "snr_reference"] == pytest.approx(1.0)

    def test_unknown_label_is_nan(self, curves):
        assert math.isnan(snr_gap(curves, "ref", "absent"))
