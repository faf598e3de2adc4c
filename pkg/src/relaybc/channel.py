"""System configuration and seeded Rayleigh channel generation.

All nodes live on a unit line (base station at 0, users near 1, relay in
between).  Channel matrices have i.i.d. circularly-symmetric complex
Gaussian entries with per-entry variance 1/d^tau where d is the
transmitter-receiver distance.  Receiver and relay noise is normalized
to unit variance, so power budgets are transmit SNRs.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, GeometryError

NOISE_VAR = 1.0  # noise covariance is the identity throughout


@dataclass
class SystemConfig:
    """Static description of one relaying broadcast cell.

    M            antennas at the base station and at the relay
    K            number of users
    N            per-user receive antenna counts (sum(N) <= M)
    ps, pr       source / relay power budgets (linear, noise-normalized)
    weights      per-user rate priorities w_k >= 0
    tau          path-loss exponent
    pos_*        node positions on the unit line
    half_duplex_rate_factor
                 when True, rates carry the 1/2 two-phase pre-log factor;
                 off by default so rates are pure log-det values
    """

    M: int
    K: int
    N: tuple
    ps: float
    pr: float
    weights: tuple = None
    tau: float = 3.0
    pos_bs: float = 0.0
    pos_relay: float = 0.5
    pos_users: tuple = None
    half_duplex_rate_factor: bool = False

    def __post_init__(self):
        self.N = tuple(int(n) for n in self.N)
        if self.weights is None:
            self.weights = (1.0,) * self.K
        self.weights = tuple(float(w) for w in self.weights)
        if self.pos_users is None:
            self.pos_users = (1.0,) * self.K
        self.pos_users = tuple(float(p) for p in self.pos_users)

        if self.M < 1 or self.K < 1:
            raise ConfigError("M and K must be at least 1")
        if len(self.N) != self.K:
            raise ConfigError(f"N has {len(self.N)} entries for K={self.K} users")
        if any(n < 1 for n in self.N):
            raise ConfigError("every user needs at least one antenna")
        if sum(self.N) > self.M:
            raise ConfigError(f"sum(N)={sum(self.N)} exceeds M={self.M} supported streams")
        if not (self.ps > 0 and self.pr > 0):
            raise ConfigError("power budgets must be positive")
        if len(self.weights) != self.K or any(w < 0 for w in self.weights):
            raise ConfigError("weights must be K non-negative values")
        if not self.tau > 0:
            raise ConfigError("path-loss exponent must be positive")
        if len(self.pos_users) != self.K:
            raise ConfigError("pos_users must hold one position per user")

    @property
    def total_streams(self):
        return sum(self.N)


@dataclass
class ChannelSet:
    """One realization of every channel matrix in the cell.

    bs_relay     M x M source->relay channel
    bs_users     per-user N_k x M direct links
    relay_users  per-user N_k x M relay->user channels
    """

    bs_relay: np.ndarray
    bs_users: list = field(default_factory=list)
    relay_users: list = field(default_factory=list)

    @property
    def num_users(self):
        return len(self.bs_users)

    @property
    def user_antennas(self):
        return tuple(h.shape[0] for h in self.bs_users)


def snr_to_powers(snr_db):
    """Map a transmit SNR in dB to equal (ps, pr) linear budgets."""
    p = 10.0 ** (snr_db / 10.0)
    return p, p


def generate_channels(config, seed):
    """Draw one seeded ChannelSet for ``config``.

    Entries are i.i.d. CN(0, 1/d^tau); real and imaginary parts each
    carry half the variance.  The draw order (bs_relay, then all direct
    links, then all relay links) is part of the determinism contract:
    the same (config, seed) always yields the same matrices.
    """
    d_rb = abs(config.pos_relay - config.pos_bs)
    d_kb = [abs(p - config.pos_bs) for p in config.pos_users]
    d_kr = [abs(p - config.pos_relay) for p in config.pos_users]
    if d_rb <= 0 or any(d <= 0 for d in d_kb) or any(d <= 0 for d in d_kr):
        raise GeometryError("all transmitter-receiver distances must be positive")

    rng = np.random.Generator(np.random.Philox(seed))

    def draw(rows, cols, dist):
        sigma = math.sqrt(1.0 / (2.0 * dist ** config.tau))
        return sigma * (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols)))

    bs_relay = draw(config.M, config.M, d_rb)
    bs_users = [draw(config.N[k], config.M, d_kb[k]) for k in range(config.K)]
    relay_users = [draw(config.N[k], config.M, d_kr[k]) for k in range(config.K)]
    return ChannelSet(bs_relay, bs_users, relay_users)
