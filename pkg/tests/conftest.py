import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from micromorphic_bandgap import characteristic_scales, example_config_path, table1_parameters  # noqa: E402

MU_C0 = 150e6


@pytest.fixture
def table1():
    return table1_parameters(2 * MU_C0)


@pytest.fixture
def table1_scales(table1):
    return characteristic_scales(table1)


@pytest.fixture
def rng():
    return np.random.default_rng(20140117)


@pytest.fixture
def table1_config_path():
    return Path(str(example_config_path()))
