"""Shared helpers for the test suite."""

import numpy as np
import pytest

from relaybc.channel import ChannelSet, SystemConfig, generate_channels


def crandn(rng, rows, cols):
    """Standard circularly-symmetric complex Gaussian matrix."""
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def random_hpd(rng, n, ridge=1.0):
    """Random Hermitian positive definite matrix M M^H + ridge I."""
    m = crandn(rng, n, n)
    return m @ m.conj().T + ridge * np.eye(n)


def scalar_channel(h_kb=1.0, h_kr=1.0, h_rb=1.0):
    """Single-user single-antenna channel set with given scalar gains."""
    return ChannelSet(
        bs_relay=np.array([[h_rb]], dtype=complex),
        bs_users=[np.array([[h_kb]], dtype=complex)],
        relay_users=[np.array([[h_kr]], dtype=complex)],
    )


@pytest.fixture
def saturated_cell():
    """Two-user cell whose streams saturate the antenna budget."""
    config = SystemConfig(M=4, K=2, N=(2, 2), ps=10.0, pr=10.0)
    return config, generate_channels(config, 314)


@pytest.fixture
def slack_cell():
    """Two-user cell with spare base-station antennas."""
    config = SystemConfig(M=4, K=2, N=(1, 1), ps=10.0, pr=10.0)
    return config, generate_channels(config, 2718)


def fd_gradient(fn, mats, step=1e-5):
    """Central finite differences of a real scalar function of complex
    matrices, taken over the real and imaginary part of every entry.

    ``mats`` is a list of complex arrays; returns one stacked real
    gradient vector.
    """
    grads = []
    for idx in range(len(mats)):
        base = mats[idx]
        for i in range(base.shape[0]):
            for j in range(base.shape[1]):
                for direction in (1.0, 1j):
                    plus = [m.copy() for m in mats]
                    minus = [m.copy() for m in mats]
                    plus[idx][i, j] += step * direction
                    minus[idx][i, j] -= step * direction
                    grads.append((fn(plus) - fn(minus)) / (2.0 * step))
    return np.asarray(grads)
