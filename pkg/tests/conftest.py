import numpy as np
import pytest

from rcbeam import ArrayGeometry, PulseSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def small_geom():
    # 4x4, lambda pitch at 4 MHz in water-like medium
    return ArrayGeometry(
        n_rows=4,
        n_cols=4,
        pitch=375e-6,
        center_frequency=4.0e6,
        sampling_rate=16.0e6,
        sound_speed=1500.0,
    )


@pytest.fixture
def small_pulse():
    return PulseSpec(center_frequency=4.0e6, fractional_bandwidth=0.7)
