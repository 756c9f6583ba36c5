import os
from pathlib import Path

import numpy as np
import pytest

from zetapulse import loads

data_dir = os.path.join(os.path.dirname(__file__), "../data")


def scenario_path(name):
    return Path(data_dir, "scenarios", f"{name}.json")


def read_scenario_obj(name):
    return loads(scenario_path(name))


def random_states(rng, count):
    psi = rng.normal(size=(count, 2)) + 1j * rng.normal(size=(count, 2))
    return psi / np.linalg.norm(psi, axis=1, keepdims=True)


needs_data = pytest.mark.skipif(
    not Path(data_dir, "scenarios").exists(),
    reason="Test depends on ./data/scenarios that contains the bundled scenarios",
)
