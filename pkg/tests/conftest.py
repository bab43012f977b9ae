import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from spikecodec import EncoderConfig, bank_from_config


@pytest.fixture(scope="session")
def default_config():
    return EncoderConfig()


@pytest.fixture(scope="session")
def default_bank(default_config):
    return bank_from_config(default_config)


@pytest.fixture(scope="session")
def mini_config():
    """Small bank over short segments for brute-force-oracle tests."""
    return EncoderConfig(sps=16, sample_rate=16000, segment_len=256, m_count=8,
                         fmin=300.0, fmax=6000.0, max_kernel_len=160, fft_size=512)


@pytest.fixture(scope="session")
def mini_bank(mini_config):
    return bank_from_config(mini_config)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


def direct_surface(residual, bank):
    """Time-domain correlation oracle mirroring correlate_all's contract."""
    residual = np.asarray(residual, dtype=np.float64)
    length = residual.size
    surface = np.zeros((bank.m_count, length))
    for m, kernel in enumerate(bank.kernels):
        eff = kernel.effective_len
        if eff <= length:
            surface[m, :length - eff + 1] = np.correlate(
                residual, kernel.samples[:eff], mode="valid")
    return surface


def brute_force_best(surface):
    """Exhaustive scan argmax with the (smaller m, smaller tau) tie rule."""
    best = (0, 0, 0.0)
    best_mag = -1.0
    for m in range(surface.shape[0]):
        for tau in range(surface.shape[1]):
            mag = abs(surface[m, tau])
            if mag > best_mag:
                best_mag = mag
                best = (m, tau, surface[m, tau])
    return best
