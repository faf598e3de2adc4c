"""Closed-form relay beamformers and the iterative-design initializer.

Both baseline beamformers take the source precoder as given and scale
their output so the relay power budget holds with equality.
"""

import math

import numpy as np

from .errors import DegenerateChannel
from .linalg import solve_hpd
from .wmmse import DesignState, mmse_receiver, relay_gram, relay_power


def stacked_user_channel(ch):
    """Vertical stack of all relay->user channels (sum(N_k) x M)."""
    return np.vstack(ch.relay_users)


def _scale_to_budget(f0, pi, pr):
    pw = relay_power(f0, pi)
    if pw <= 0.0:
        raise DegenerateChannel("unnormalized relay beamformer is zero")
    return math.sqrt(pr / pw) * f0


def mrc_mrt(ch, precoders, pr):
    """Maximum-ratio combining / maximum-ratio transmission beamformer.

    F is a positive multiple of H_ur^H P^H H_rb^H, scaled so the relay
    transmits exactly pr.
    """
    h_ur = stacked_user_channel(ch)
    p = np.hstack(precoders)
    f0 = h_ur.conj().T @ p.conj().T @ ch.bs_relay.conj().T
    return _scale_to_budget(f0, relay_gram(ch, precoders), pr)


def mrc_rzf(ch, precoders, pr):
    """Maximum-ratio combining / regularized zero-forcing beamformer.

    The user-side stack is inverted with ridge term (M/pr) I, then the
    result is scaled so the relay transmits exactly pr.
    """
    h_ur = stacked_user_channel(ch)
    m = ch.bs_relay.shape[0]
    p = np.hstack(precoders)
    gram = h_ur @ h_ur.conj().T + (m / pr) * np.eye(h_ur.shape[0], dtype=complex)
    f0 = h_ur.conj().T @ solve_hpd(gram, p.conj().T @ ch.bs_relay.conj().T)
    return _scale_to_budget(f0, relay_gram(ch, precoders), pr)


def identity_precoders(config):
    """Scaled-identity precoder blocks: sqrt(ps/M) times the first
    sum(N_k) columns of I_M, split per user."""
    scale = math.sqrt(config.ps / config.M)
    eye = scale * np.eye(config.M, dtype=complex)
    blocks, col = [], 0
    for n in config.N:
        blocks.append(eye[:, col:col + n])
        col += n
    return blocks


def algorithm1_init(config, ch):
    """Starting point of the alternating optimization.

    P is the scaled identity, F = rho I with rho chosen so the relay
    budget holds with equality, receive filters are the MMSE filters at
    this (P, F), and the MSE weights start at identity.
    """
    precoders = identity_precoders(config)
    pi = relay_gram(ch, precoders)
    rho = math.sqrt(config.pr / float(np.real(np.trace(pi)) + config.M))
    relay_bf = rho * np.eye(config.M, dtype=complex)
    receivers = [mmse_receiver(ch, precoders, relay_bf, k) for k in range(config.K)]
    mse_weights = [np.eye(n, dtype=complex) for n in config.N]
    return DesignState(precoders, relay_bf, receivers, mse_weights)
