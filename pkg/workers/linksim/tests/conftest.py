"""
Test fixtures for linksim.

Small geometries and seeded generators shared by the module tests.
"""
from __future__ import annotations

import os
import textwrap
from pathlib import Path

import numpy as np
import pytest

from linksim.core.numerics import Constellation
from linksim.io.schema import LinkConfig


def pytest_collection_modifyitems(config, items):
    if os.environ.get("LINKSIM_RUN_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="set LINKSIM_RUN_SLOW=1 to run slow comparisons")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


# ── Fixtures ─────────────────────────────────────────────────────────────────

@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(params=[4, 16, 64], ids=["qpsk", "qam16", "qam64"])
def constellation(request) -> Constellation:
    return Constellation(request.param)


@pytest.fixture
def qpsk() -> Constellation:
    return Constellation(4)


@pytest.fixture
def small_config() -> LinkConfig:
    """QPSK SWH Max-Log-MAP on a short block with a tiny stop rule."""
    return LinkConfig(
        n=16,
        q=4,
        order=4,
        precoder="swh",
        detector="swh-maxlog",
        n_tau=2,
        ebn0_db=[2.0],
        seed=7,
        min_frame_errors=5,
        max_frames=12,
    )


SAMPLE_CONFIG = textwrap.dedent("""\
    # QPSK SWH max-log sweep
    n = 16
    q = 4
    order = 4
    precoder = swh
    detector = swh-maxlog
    n_tau = 2          # short turbo loop
    ebn0_db = 0:2:4
    seed = 3
    min_frame_errors = 2
    max_frames = 4
""")


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    p = tmp_path / "link.cfg"
    p.write_text(SAMPLE_CONFIG)
    return p
