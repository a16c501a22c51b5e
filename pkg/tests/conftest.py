import numpy as np
import pytest

from fluxholo import FluxConfig, validate

SEED = 20260811


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture
def three_distinct():
    """N=3, one free mode, distinct fluxes, generic positions."""
    return validate(FluxConfig([0.0, 0.9 + 0.7j, 0.2 + 1.9j], [0.4, 0.5, 0.6]))


@pytest.fixture
def three_identical_09():
    """N=3, identical fluxes 0.9, two free modes (topological regime)."""
    return validate(FluxConfig([0.0, 0.3 + 1.0j, -0.2 + 2.2j], [0.9, 0.9, 0.9]))


@pytest.fixture
def two_fluxon():
    """N=2 with total flux 1.5, one free mode."""
    return validate(FluxConfig([0.0, 0.3 + 1.0j], [0.7, 0.8]))


def random_subcritical_config(rng, n, min_sep=0.5, min_im_gap=0.05):
    """Subcritical fluxes away from thresholds; generic positions with
    distinct imaginary parts."""
    while True:
        fluxes = rng.uniform(0.1, 0.9, n)
        total = fluxes.sum()
        if abs(total - round(total)) > 5e-2 and total > 1.05:
            break
    while True:
        pos = rng.uniform(-1.5, 1.5, n) + 1j * rng.uniform(-1.5, 1.5, n)
        d = np.abs(pos[:, None] - pos[None, :]) + np.diag([np.inf] * n)
        im = np.abs(pos.imag[:, None] - pos.imag[None, :]) + np.diag([np.inf] * n)
        if d.min() > min_sep and im.min() > min_im_gap:
            break
    return validate(FluxConfig(pos, fluxes))
