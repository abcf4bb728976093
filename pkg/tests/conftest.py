"""Shared windows and an isolated output directory."""
from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from causal_horizon.gallery import make_space  # noqa: E402


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch):
    for key in ("CAUSAL_HORIZON_OUT", "CAUSAL_HORIZON_WORKERS", "CAUSAL_HORIZON_SEED"):
        monkeypatch.delenv(key, raising=False)


@pytest.fixture(scope="session")
def strip_space():
    return make_space("strip")


@pytest.fixture(scope="session")
def strip_window(strip_space):
    return strip_space.window(1 / 16)


@pytest.fixture(scope="session")
def minkowski_space():
    return make_space("minkowski2")


@pytest.fixture(scope="session")
def minkowski_window(minkowski_space):
    return minkowski_space.window(1 / 8, (-1.0, -1.0), (1.0, 1.0))


@pytest.fixture(scope="session")
def small_minkowski_window(minkowski_space):
    """81 points; small enough for property tests."""
    return minkowski_space.window(1 / 4, (-1.0, -1.0), (1.0, 1.0))
