"""
Profiles — frozen iteration schedules and the complexity reference preset.

``Schedule.for_order(J)`` returns the damping schedule used for a QAM
order; ``ComplexityPreset.table4()`` lists every reference row of the
per-symbol operation-count tables with its expected values.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

from linksim.errors import InvalidArgumentError
from linksim.policy.kinds import DetectorKind, PrecoderKind


# ── Damping schedule ─────────────────────────────────────────────────────────

# J → (beta0, decay, n_self)
_ORDER_DEFAULTS: Dict[int, Tuple[float, float, int]] = {
    4: (0.7, 0.9, 2),
    16: (0.85, 0.85, 5),
    64: (1.0, 0.85, 6),
}


@dataclass(frozen=True)
class Schedule:
    """Turbo / self-iteration schedule with geometric damping.

    ``beta(tau, s) = beta0 * decay ** (tau + s)``, clamped to [0, 1].
    Indices run over ``tau in 0..n_turbo`` and ``s in 0..n_self``.
    """

    n_turbo: int = 9
    n_self: int = 2
    beta0: float = 0.7
    decay: float = 0.9
    profile_id: str = "qpsk"

    def __post_init__(self) -> None:
        if self.n_turbo < 0 or self.n_self < 0:
            raise InvalidArgumentError("iteration counts must be non-negative")
        if not (0.0 <= self.beta0 <= 1.0) or not (0.0 <= self.decay <= 1.0):
            raise InvalidArgumentError("beta0 and decay must lie in [0, 1]")

    def beta(self, tau: int, s: int) -> float:
        return min(1.0, max(0.0, self.beta0 * self.decay ** (tau + s)))

    @classmethod
    def for_order(
        cls,
        order: int,
        n_turbo: int = 9,
        n_self: Optional[int] = None,
        beta0: Optional[float] = None,
        decay: Optional[float] = None,
    ) -> Schedule:
        """Default schedule for QAM order *order*, with optional overrides."""
        b0, rho, ns = _ORDER_DEFAULTS.get(order, _ORDER_DEFAULTS[64])
        base = cls(
            n_turbo=n_turbo, n_self=ns, beta0=b0, decay=rho,
            profile_id=f"qam{order}",
        )
        overrides = {
            k: v for k, v in
            (("n_self", n_self), ("beta0", beta0), ("decay", decay))
            if v is not None
        }
        return replace(base, **overrides) if overrides else base


# ── Complexity reference rows ────────────────────────────────────────────────

@dataclass(frozen=True)
class ComplexityCase:
    """One reference cell pair: expected real additions / multiplications."""

    precoder: PrecoderKind
    detector: DetectorKind
    q: int
    order: int
    n_self: int
    additions: int
    multiplications: int
    n: int = 256


def _map_rows(detector: DetectorKind, table) -> Tuple[ComplexityCase, ...]:
    return tuple(
        ComplexityCase(PrecoderKind.SWH, detector, q, j, 0, adds, mults)
        for (q, j), (adds, mults) in table.items()
    )


def _epic_rows(precoder: PrecoderKind, q: int, table) -> Tuple[ComplexityCase, ...]:
    return tuple(
        ComplexityCase(precoder, DetectorKind.EPIC, q, j, ns, adds, mults)
        for j, (ns, adds, mults) in table.items()
    )


@dataclass(frozen=True)
class ComplexityPreset:
    """Named set of reference rows checked by ``complexity --preset``."""

    preset_id: str
    cases: Tuple[ComplexityCase, ...]

    @classmethod
    def table4(cls) -> ComplexityPreset:
        """Per-QAM-symbol additions and multiplications for N = 256."""
        log_map = _map_rows(DetectorKind.SWH_LOG, {
            (4, 4): (138, 30),
            (4, 16): (3_610, 78),
            (4, 64): (81_978, 174),
            (8, 4): (2_066, 54),
            (8, 16): (917_554, 150),
            (8, 64): (335_544_434, 342),
        })
        max_log = _map_rows(DetectorKind.SWH_MAXLOG, {
            (4, 4): (74, 20),
            (4, 16): (1_562, 52),
            (4, 64): (32_826, 116),
            (8, 4): (1_042, 36),
            (8, 16): (393_266, 100),
            (8, 64): (134_217_842, 228),
        })
        swh = _epic_rows(PrecoderKind.SWH, 8, {
            4: (2, 144, 129), 16: (5, 804, 834), 64: (6, 3_304, 3_661),
        })
        sdft = _epic_rows(PrecoderKind.SDFT, 8, {
            4: (2, 144, 165), 16: (5, 804, 906), 64: (6, 3_304, 3_745),
        })
        dft = _epic_rows(PrecoderKind.DFT, 256, {
            4: (2, 204, 225), 16: (5, 924, 1_026), 64: (6, 3_444, 3_885),
        })
        return cls(
            preset_id="table4",
            cases=log_map + max_log + swh + sdft + dft,
        )

    @classmethod
    def by_name(cls, name: str) -> ComplexityPreset:
        if name == "table4":
            return cls.table4()
        raise InvalidArgumentError(f"unknown complexity preset: {name!r}")
