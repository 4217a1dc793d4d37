import numpy as np
import pytest
from hypothesis import strategies as st

from snakecharm.geometry import Partition, random_configuration


def rng_of(seed):
    return np.random.default_rng(seed)


@st.composite
def arm_configs(draw, d_min=2, d_max=6, n_min=1, n_max=8, unit_lengths=False):
    """Random arm configuration driven by a drawn RNG seed."""
    d = draw(st.integers(d_min, d_max))
    n = draw(st.integers(n_min, n_max))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    lengths = None if unit_lengths else rng.uniform(0.5, 1.5, n)
    return random_configuration(rng, d, n, lengths=lengths)


@st.composite
def sampled_configs(draw, d_min=2, d_max=5, n_min=1, n_max=4, m_min=2, m_max=9):
    d = draw(st.integers(d_min, d_max))
    n = draw(st.integers(n_min, n_max))
    m = draw(st.integers(m_min, m_max))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return random_configuration(rng, d, n, kind="sampled", m=m,
                                lengths=rng.uniform(0.5, 1.5, n))


@pytest.fixture
def rng():
    return np.random.default_rng(20260825)


def collinear_arm(rng, d, n, lengths=None):
    """Collinear configuration u_i = eps_i * x with random axis and signs."""
    x = rng.standard_normal(d)
    x /= np.linalg.norm(x)
    signs = rng.choice([-1.0, 1.0], size=n)
    if lengths is None:
        part = Partition.uniform(n)
    else:
        part = Partition(np.concatenate([[0.0], np.cumsum(lengths)]))
    from snakecharm.geometry import Configuration

    return Configuration.arm(part, signs[:, None] * x[None, :])
