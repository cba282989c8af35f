"""
Frozen vocabulary for precoders, detectors, and process outcomes.

The string values are the ones accepted in configuration files and
written to result CSVs; changing one is a schema change.
"""
from __future__ import annotations

from enum import Enum, IntEnum

from linksim.errors import InvalidArgumentError


# ── Precoders ────────────────────────────────────────────────────────────────

class PrecoderKind(str, Enum):
    DFT = "dft"
    SDFT = "sdft"
    SWH = "swh"

    @property
    def is_sparse(self) -> bool:
        return self is not PrecoderKind.DFT


# ── Detectors ────────────────────────────────────────────────────────────────

class MapVariant(str, Enum):
    EXACT = "exact"
    LOG = "log"
    MAXLOG = "maxlog"


class EpicVariant(str, Enum):
    EPIC = "epic"
    VAMP = "vamp"


class DetectorKind(str, Enum):
    SWH_EXACT = "swh-exact"
    SWH_LOG = "swh-log"
    SWH_MAXLOG = "swh-maxlog"
    EPIC = "epic"
    VAMP = "vamp"

    @property
    def is_map(self) -> bool:
        return self.value.startswith("swh-")

    @property
    def map_variant(self) -> MapVariant:
        if not self.is_map:
            raise InvalidArgumentError(f"{self.value} is not a MAP detector")
        return MapVariant(self.value.split("-", 1)[1])

    @property
    def epic_variant(self) -> EpicVariant:
        if self.is_map:
            raise InvalidArgumentError(f"{self.value} is not an EP detector")
        return EpicVariant(self.value)


# ── Channel and interleaver families ─────────────────────────────────────────

class ChannelModel(str, Enum):
    PROAKIS_C = "proakis-c"
    RANDOM = "random"


class InterleaverMode(str, Enum):
    RANDOM = "random"
    IDENTITY = "identity"


class DbStorage(str, Enum):
    FULL = "full"
    HALF = "half"


# ── Reporting ────────────────────────────────────────────────────────────────

class CounterSource(str, Enum):
    ANALYTIC = "analytic"
    MEASURED = "measured"


class ExitStatus(IntEnum):
    OK = 0
    USAGE = 1
    IO = 2
    CAPABILITY = 3
