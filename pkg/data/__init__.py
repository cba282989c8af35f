"""
data — Offline analysis of linksim sweep outputs.

Quick start::

    from data import load_sweeps, add_confidence, gap_table

    ds = load_sweeps(Path("results"))
    fer = add_confidence(ds.records)
    gaps = gap_table(fer, [("sdft/epic/Q8/J4", "swh/epic/Q8/J4")])

Layers
------
loader   fer.csv files → one raw DataFrame (no derived columns).
metrics  Wilson intervals, SNR at a target FER, SNR gaps between curves.
"""

PACKAGE_NAME = "linksim_data"
SCHEMA_VERSION = "0.1"

from .loader import (
    SweepDataset,
    load_fer_csv,
    load_sweeps,
    scheme_label,
)

from .metrics import (
    DEFAULT_TARGET_FER,
    add_confidence,
    gap_table,
    snr_at_fer,
    snr_gap,
    wilson_interval,
)

__all__ = [
    # loader
    "load_sweeps",
    "load_fer_csv",
    "scheme_label",
    "SweepDataset",
    # metrics
    "wilson_interval",
    "add_confidence",
    "snr_at_fer",
    "snr_gap",
    "gap_table",
    "DEFAULT_TARGET_FER",
    # meta
    "PACKAGE_NAME",
    "SCHEMA_VERSION",
]
