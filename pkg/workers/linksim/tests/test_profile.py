"""Tests for damping schedules, the complexity preset and the closed forms."""
import math

import pytest

from linksim.core.opcount import OpTally, analytic_counts, epic_counts, map_counts
from linksim.policy.kinds import DetectorKind, PrecoderKind
from linksim.policy.profile import ComplexityPreset, Schedule


class TestSchedule:
    @pytest.mark.parametrize("order,beta0,decay,n_self", [
        (4, 0.7, 0.9, 2), (16, 0.85, 0.85, 5), (64, 1.0, 0.85, 6),
    ])
    def test_order_defaults(self, order, beta0, decay, n_self):
        s = Schedule.for_order(order)
        assert (s.beta0, s.decay, s.n_self, s.n_turbo) == (beta0, decay, n_self, 9)

    def test_beta_formula(self):
        s = Schedule.for_order(4)
        assert math.isclose(s.beta(2, 1), 0.7 * 0.9 ** 3)

    def test_overrides(self):
        s = Schedule.for_order(16, n_turbo=3, n_self=1, beta0=0.5)
        assert (s.n_turbo, s.n_self, s.beta0, s.decay) == (3, 1, 0.5, 0.85)

    def test_beta_in_unit_interval(self):
        s = Schedule.for_order(64)
        assert all(0.0 <= s.beta(t, k) <= 1.0 for t in range(10) for k in range(7))

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            Schedule(beta0=1.5)
        with pytest.raises(ValueError):
            Schedule(n_self=-1)


class TestClosedForms:
    def test_table4_cells(self):
        for case in ComplexityPreset.table4().cases:
            got = analytic_counts(case.precoder, case.detector, case.q, case.n, case.order, case.n_self)
            assert got == (case.additions, case.multiplications), case

    def test_preset_size(self):
        assert len(ComplexityPreset.table4().cases) == 21

    def test_64qam_q8_log_map(self):
        assert map_counts(DetectorKind.SWH_LOG, 8, 64) == (335_544_434, 342)

    def test_sdft_uses_group_length(self):
        assert epic_counts(PrecoderKind.SDFT, 8, 256, 4, 2) == (144, 165)

    def test_exact_has_no_closed_form(self):
        with pytest.raises(ValueError):
            map_counts(DetectorKind.SWH_EXACT, 4, 4)

    def test_unknown_preset(self):
        with pytest.raises(ValueError):
            ComplexityPreset.by_name("table9")


class TestOpTally:
    def test_accumulates(self):
        t = OpTally()
        t.add(additions=6, multiplications=2)
        t.add(additions=2)
        assert t.per_symbol(4) == (2.0, 0.5)
