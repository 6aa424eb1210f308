import warnings

import numpy as np
import pytest

# TBB version grumble from the parallel layer is environmental noise
warnings.filterwarnings("ignore", message=".*TBB.*")


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)
