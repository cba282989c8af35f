"""
Writer — serialize linksim results.

Filesystem layout (under the run's output directory):
    <output_dir>/fer.csv               FER sweep records
    <output_dir>/exit.csv              MI trajectory per turbo iteration
    <output_dir>/exit_decoder.csv      decoder transfer curve samples
    <output_dir>/complexity.csv        analytic / measured operation counts
    <output_dir>/run_manifest.json     provenance of the run
"""
import json
from pathlib import Path
from typing import List, Sequence

import pandas as pd

from linksim.io.schema import (
    COMPLEXITY_COLUMNS,
    DECODER_CURVE_COLUMNS,
    EXIT_COLUMNS,
    FER_COLUMNS,
    ComplexityRow,
    DecoderPoint,
    ExitPoint,
    FerRecord,
    RunManifest,
)


def _write_frame(rows: List[dict], columns: List[str], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows, columns=columns).to_csv(path, index=False)
    return path


def write_fer_csv(records: Sequence[FerRecord], path: Path) -> Path:
    return _write_frame([r.to_row() for r in records], FER_COLUMNS, path)


def read_fer_csv(path: Path) -> List[FerRecord]:
    """Parse a FER CSV back into records (``bit_errors`` is not stored)."""
    df = pd.read_csv(path)
    missing = [c for c in FER_COLUMNS if c not in df.columns]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")
    return [
        FerRecord(
            scheme=str(row["scheme"]),
            detector=str(row["detector"]),
            q=int(row["Q"]),
            order=int(row["J"]),
            ebn0_db=float(row["ebn0_db"]),
            frames=int(row["frames"]),
            frame_errors=int(row["frame_errors"]),
            fer=float(row["fer"]),
            ber=float(row["ber"]),
            mean_ti=float(row["mean_ti"]),
        )
        for row in df.to_dict(orient="records")
    ]


def write_exit_csv(points: Sequence[ExitPoint], path: Path) -> Path:
    return _write_frame([p.to_row() for p in points], EXIT_COLUMNS, path)


def write_decoder_curve_csv(points: Sequence[DecoderPoint], path: Path) -> Path:
    return _write_frame([p.to_row() for p in points], DECODER_CURVE_COLUMNS, path)


def write_complexity_csv(rows: Sequence[ComplexityRow], path: Path) -> Path:
    return _write_frame([r.to_row() for r in rows], COMPLEXITY_COLUMNS, path)


def write_manifest(manifest: RunManifest, output_dir: Path) -> Path:
    """Write ``run_manifest.json`` into *output_dir* (created if missing)."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    path = output_dir / "run_manifest.json"
    path.write_text(
        json.dumps(
            manifest.model_dump(mode="json"),
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )
    return path
