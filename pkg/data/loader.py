"""
Loader for linksim sweep outputs.

Walks a results tree, reads every ``fer.csv`` written by ``linksim simulate``
and assembles one raw DataFrame — no derived columns, no metrics.

Usage::

    from data.loader import load_sweeps

    ds = load_sweeps(Path("results"))
    ds.records      # one row per (run, scheme, detector, Q, J, ebn0_db)
    ds.runs         # run directories, relative to the root
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence

import pandas as pd

from linksim.io.schema import FER_COLUMNS

log = logging.getLogger(__name__)

DEFAULT_RESULTS_ROOT = Path(__file__).resolve().parent.parent / "results"
FER_FILE = "fer.csv"


# ═══════════════════════════════════════════════════════════════════════════════
# Public dataclass
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass
class SweepDataset:
    """Raw FER records of every run found under a results root.

    Attributes
    ----------
    records : pd.DataFrame
        Columns: ``run, label`` followed by the ``fer.csv`` header
        (``scheme, detector, Q, J, ebn0_db, frames, frame_errors, fer, ber,
        mean_ti``).  ``label`` is ``<scheme>/<detector>/Q<Q>/J<J>``.

    runs : list[str]
        Run directories (relative to the root) in load order.
    """

    records: pd.DataFrame
    runs: List[str] = field(default_factory=list)


# ═══════════════════════════════════════════════════════════════════════════════
# Loading
# ═══════════════════════════════════════════════════════════════════════════════

def scheme_label(scheme: str, detector: str, q: int, order: int) -> str:
    return f"{scheme}/{detector}/Q{int(q)}/J{int(order)}"


def load_fer_csv(path: Path) -> pd.DataFrame:
    """Read one ``fer.csv`` and check its header."""
    df = pd.read_csv(path)
    missing = [c for c in FER_COLUMNS if c not in df.columns]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")
    df = df[FER_COLUMNS].copy()
    df.insert(0, "label", [
        scheme_label(s, d, q, j)
        for s, d, q, j in zip(df["scheme"], df["detector"], df["Q"], df["J"])
    ])
    return df


def load_sweeps(root: Path = DEFAULT_RESULTS_ROOT, paths: Sequence[Path] = ()) -> SweepDataset:
    """Load every ``fer.csv`` below *root* (or exactly *paths* when given)."""
    root = Path(root)
    files = [Path(p) for p in paths] or sorted(root.rglob(FER_FILE))
    frames: List[pd.DataFrame] = []
    runs: List[str] = []
    for path in files:
        run = str(path.parent.relative_to(root)) if path.is_relative_to(root) else str(path.parent)
        df = load_fer_csv(path)
        df.insert(0, "run", run)
        frames.append(df)
        runs.append(run)
    log.info("Loaded %d sweep file(s) from %s", len(files), root)
    if not frames:
        return SweepDataset(records=pd.DataFrame(columns=["run", "label", *FER_COLUMNS]), runs=[])
    return SweepDataset(records=pd.concat(frames, ignore_index=True), runs=runs)
