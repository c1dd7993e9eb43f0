import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from isacbf.config import SimConfig


@pytest.fixture
def cfg() -> SimConfig:
    return SimConfig()


@pytest.fixture
def small_cfg() -> SimConfig:
    """Reduced geometry for fast structural / gradient tests."""
    return SimConfig(n_tx=8, n_rx=8, n_vehicles=2, history_len=3, n_slots=12)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
