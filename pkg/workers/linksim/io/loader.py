"""
Loader — read a flat ``key = value`` experiment file into ``LinkConfig``.

Format::

    # comment
    precoder = swh
    detector = swh-maxlog
    q = 4
    ebn0_db = 0, 1, 2, 3        # explicit list
    ebn0_db = 0:0.5:4           # start:step:stop, stop included

Unknown keys, duplicate keys and invalid values are rejected with
``ConfigError``.  A missing file raises ``FileNotFoundError``.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional

import numpy as np
from pydantic import ValidationError

from linksim.errors import ConfigError
from linksim.io.schema import LinkConfig

logger = logging.getLogger(__name__)

_LIST_KEYS = {"ebn0_db"}


def _parse_grid(raw: str) -> List[float]:
    if ":" in raw:
        parts = [p.strip() for p in raw.split(":")]
        if len(parts) != 3:
            raise ConfigError(f"range must be start:step:stop, got {raw!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"empty or descending range {raw!r}")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(count)]
    return [float(p) for p in raw.split(",") if p.strip()]


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, object]:
    """Split a config file into raw key/value pairs."""
    values: Dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: missing key")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _parse_grid(raw) if key in _LIST_KEYS else raw
        except ValueError as e:
            raise ConfigError(f"{source}:{lineno}: {e}") from e
    return values


def build_config(values: Mapping[str, object], source: str = "<config>") -> LinkConfig:
    try:
        return LinkConfig(**dict(values))
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
            for err in e.errors()
        )
        raise ConfigError(f"{source}: {problems}") from e


def load_config(
    path: Optional[Path],
    overrides: Optional[Mapping[str, object]] = None,
) -> LinkConfig:
    """Read *path* (or start from defaults when None) and apply *overrides*."""
    values: Dict[str, object] = {}
    source = "<defaults>"
    if path is not None:
        source = str(path)
        values = parse_config_text(Path(path).read_text(), source=source)
        logger.info("Loaded config %s (%d keys)", source, len(values))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return build_config(values, source=source)
