"""Shared pytest hooks for the analysis-layer tests."""
from __future__ import annotations

import os

import pytest


def pytest_collection_modifyitems(config, items):
    if os.environ.get("LINKSIM_RUN_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="set LINKSIM_RUN_SLOW=1 to run slow comparisons")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
