import math

import numpy as np
import pytest
from hypothesis import strategies as st

from kgbohm import PRESET, WaveField

finite = dict(allow_nan=False, allow_infinity=False)


@st.composite
def wavefields(draw, dim=None, max_modes=5):
    """Random on-shell fields with O(1) amplitudes and wave vectors."""
    d = draw(st.integers(1, 3)) if dim is None else dim
    n = draw(st.integers(1, max_modes))
    m = draw(st.floats(0.2, 3.0, **finite))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    amps = rng.uniform(0.2, 1.5, n) * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    ks = rng.uniform(-3, 3, (n, d))
    return WaveField.from_arrays(m, amps, ks)


events = st.tuples(
    st.floats(-20, 20, **finite),
    st.floats(-20, 20, **finite),
)


def event_for(wf, t, x):
    return t, np.full(wf.spatial_dim, x) * np.linspace(1.0, 0.6, wf.spatial_dim)


def preset_event(eta, t=0.0):
    """An event of the preset field with the given beat phase."""
    x = (eta - (PRESET.m - PRESET.omega) * t) / PRESET.k
    return t, [x]


@pytest.fixture
def preset():
    return PRESET


@pytest.fixture
def preset_field():
    return PRESET.field()


SQRT8 = math.sqrt(8.0)
