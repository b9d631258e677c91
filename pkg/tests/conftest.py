import numpy as np
import pytest

from gaussep import (
    GaussianState,
    embed,
    phase_shifter,
    single_mode_squeezer,
    two_mode_squeezed_vacuum,
)

@pytest.fixture
def tmsv_half():
    return two_mode_squeezed_vacuum(0.5)


def random_local_symplectic(rng):
    """S1 (+) S2 built from per-mode phase shifters and squeezers."""
    S = np.eye(4)
    for m in range(2):
        ps1 = embed(phase_shifter(rng.uniform(0, 2 * np.pi)), 2, [m]).matrix
        sq = embed(
            single_mode_squeezer(rng.uniform(0, 1.0), rng.uniform(0, 2 * np.pi)), 2, [m]
        ).matrix
        ps2 = embed(phase_shifter(rng.uniform(0, 2 * np.pi)), 2, [m]).matrix
        S = ps2 @ sq @ ps1 @ S
    return S


def random_signal_state(rng, with_means=True, max_squeeze=0.8, max_thermal=1.5):
    """Random valid two-mode state, optionally displaced."""
    from gaussep import random_state

    state = random_state(rng, max_squeeze=max_squeeze, max_thermal=max_thermal)
    if with_means:
        means = rng.normal(0.0, 1.0, size=4)
        state = GaussianState(means=means, cov=state.cov)
    return state
