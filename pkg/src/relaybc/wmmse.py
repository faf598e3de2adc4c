"""Per-iteration closed-form blocks of the weighted-MMSE design.

Conventions: the stacked channel seen by user k is H_k = [H_kb ;
H_kr F H_rb] (direct link on top, relayed link below), the stacked
two-phase noise has covariance diag(I, I + H_kr F F^H H_kr^H), and all
rates / objectives are in bits (log base 2).
"""

from dataclasses import dataclass

import numpy as np

from .errors import BracketFailure, DimensionMismatch
from .linalg import (
    hermitize,
    inv_hpd,
    logdet_hpd,
    solve_hpd,
    solve_hpd_jittered,
    trace_product,
)

POWER_RTOL = 1e-6        # contractual accuracy of the power bisections
BISECT_RTOL = 1e-12      # internal target; keeps block descent monotone
MAX_BISECT_STEPS = 200


@dataclass
class DesignState:
    """One iterate of the alternating optimization.

    precoders    per-user M x N_k source precoder blocks
    relay_bf     M x M relay beamforming matrix
    receivers    per-user N_k x 2N_k receive filters [A_1k A_2k]
    mse_weights  per-user N_k x N_k weight matrices
    """

    precoders: list
    relay_bf: np.ndarray
    receivers: list
    mse_weights: list

    @property
    def precoder_matrix(self):
        return np.hstack(self.precoders)


@dataclass
class MseReport:
    """Per-user MSE matrices and the derived rate/objective values."""

    mse: list
    rates: list
    weighted_sum_rate: float
    objective: float


def _stream_offsets(ch):
    offs, total = [], 0
    for n in ch.user_antennas:
        offs.append(total)
        total += n
    return offs, total


def effective_channel(ch, relay_bf, k):
    """Stacked direct-plus-relayed channel for user k (2N_k x M)."""
    h_rb = ch.bs_relay
    if relay_bf.shape != h_rb.shape:
        raise DimensionMismatch(
            f"relay beamformer shape {relay_bf.shape} != channel shape {h_rb.shape}"
        )
    return np.vstack((ch.bs_users[k], ch.relay_users[k] @ relay_bf @ h_rb))


def noise_covariance(ch, relay_bf, k):
    """Covariance of the stacked two-phase noise at user k (2N_k square).

    Block diagonal: identity for the first phase, I + (H_kr F)(H_kr F)^H
    for the relayed phase where forwarded relay noise adds in.
    """
    h_kr = ch.relay_users[k]
    if relay_bf.shape[0] != h_kr.shape[1]:
        raise DimensionMismatch("relay beamformer does not match the relay-user channel")
    n = h_kr.shape[0]
    b = h_kr @ relay_bf
    cov = np.eye(2 * n, dtype=complex)
    cov[n:, n:] += b @ b.conj().T
    return cov


def mmse_receiver(ch, precoders, relay_bf, k):
    """Linear MMSE receive filter for user k (N_k x 2N_k)."""
    offs, _ = _stream_offsets(ch)
    n = ch.user_antennas[k]
    h = effective_channel(ch, relay_bf, k)
    hp = h @ np.hstack(precoders)
    cov = hermitize(hp @ hp.conj().T + noise_covariance(ch, relay_bf, k))
    hp_k = hp[:, offs[k]:offs[k] + n]
    return solve_hpd(cov, hp_k).conj().T


def mse_matrix(ch, precoders, relay_bf, a_k, k):
    """Error covariance of user k's stream estimate (N_k square)."""
    offs, _ = _stream_offsets(ch)
    n = ch.user_antennas[k]
    h = effective_channel(ch, relay_bf, k)
    hp = h @ np.hstack(precoders)
    if a_k.shape != (n, 2 * n):
        raise DimensionMismatch(f"receive filter for user {k} must be {n}x{2 * n}")
    t = a_k @ hp
    t_own = t[:, offs[k]:offs[k] + n]
    d = np.eye(n, dtype=complex) - t_own
    interf = t @ t.conj().T - t_own @ t_own.conj().T
    noise = a_k @ noise_covariance(ch, relay_bf, k) @ a_k.conj().T
    return hermitize(d @ d.conj().T + interf + noise)


def rate_from_mse(e_k, half_duplex=False):
    """Achievable rate in bits from an MSE matrix: -log2 det(E_k)."""
    rate = -logdet_hpd(e_k)
    return 0.5 * rate if half_duplex else rate


def user_rate(ch, precoders, relay_bf, a_k, k, half_duplex=False):
    """Achievable rate of user k for the given receive filter."""
    return rate_from_mse(mse_matrix(ch, precoders, relay_bf, a_k, k), half_duplex)


def weight_update(e_k):
    """Optimal MSE weight matrix: the inverse of the MSE matrix."""
    return inv_hpd(e_k)


def source_power(precoders):
    """Transmit power Tr(P P^H) of the stacked source precoder."""
    return float(sum(np.sum(np.abs(p) ** 2) for p in precoders))


def relay_gram(ch, precoders):
    """Covariance of the relay's useful input: H_rb P P^H H_rb^H."""
    hp = ch.bs_relay @ np.hstack(precoders)
    return hermitize(hp @ hp.conj().T)


def relay_power(relay_bf, pi):
    """Relay transmit power Tr(F (Pi + I) F^H)."""
    q = pi + np.eye(pi.shape[0], dtype=complex)
    return float(np.real(np.einsum("ij,ij->", relay_bf @ q, relay_bf.conj())))


def wmmse_objective(mse, mse_weights, weights):
    """Weighted-MMSE objective: sum_k w_k (Tr(W_k E_k) - log2 det W_k)."""
    total = 0.0
    for e_k, w_k, w in zip(mse, mse_weights, weights):
        total += w * (trace_product(w_k, e_k).real - logdet_hpd(w_k))
    return total


def evaluate(ch, state, weights, half_duplex=False):
    """MseReport for a design state: MSEs, rates, sum-rate, objective."""
    mse = [
        mse_matrix(ch, state.precoders, state.relay_bf, state.receivers[k], k)
        for k in range(ch.num_users)
    ]
    rates = [max(rate_from_mse(e_k, half_duplex), 0.0) for e_k in mse]
    wsr = float(sum(w * r for w, r in zip(weights, rates)))
    return MseReport(mse, rates, wsr, wmmse_objective(mse, state.mse_weights, weights))


# ---------------------------------------------------------------------------
# Source precoder block
# ---------------------------------------------------------------------------

def _precoder_system(ch, relay_bf, receivers, mse_weights, weights):
    """Normal-equation pieces for the precoder update.

    Returns (J, B) with J = sum_j w_j Ht_j^H W_j Ht_j and per-user
    B_k = w_k Ht_k^H W_k, where Ht_j = A_j H_j is the filtered channel.
    """
    fh = relay_bf @ ch.bs_relay
    m = fh.shape[0]
    lhs = np.zeros((m, m), dtype=complex)
    rhs = []
    for k in range(ch.num_users):
        h = np.vstack((ch.bs_users[k], ch.relay_users[k] @ fh))
        ht = receivers[k] @ h
        htw = ht.conj().T @ mse_weights[k]
        lhs += weights[k] * (htw @ ht)
        rhs.append(weights[k] * htw)
    return hermitize(lhs), rhs


def _precoder_from_system(lhs, rhs, lam):
    m = lhs.shape[0]
    a = lhs if lam == 0.0 else lhs + lam * np.eye(m)
    stacked = solve_hpd_jittered(a, np.hstack(rhs))
    blocks, col = [], 0
    for b in rhs:
        blocks.append(stacked[:, col:col + b.shape[1]])
        col += b.shape[1]
    return blocks


def precoder_update(ch, relay_bf, receivers, mse_weights, weights, lam):
    """Ridge-regularized precoder blocks P_k(lam) for a fixed multiplier."""
    if lam < 0:
        raise ValueError("multiplier must be non-negative")
    lhs, rhs = _precoder_system(ch, relay_bf, receivers, mse_weights, weights)
    return _precoder_from_system(lhs, rhs, lam)


def _bisect_multiplier(eigvals, coeffs, budget):
    """Find x >= 0 with sum_i c_i / (d_i + x)^2 ~= budget.

    The quadratic form is evaluated in the eigenbasis of the left
    factor, so each probe costs O(n).  The power is monotonically
    decreasing in x; the bracket [0, hi] is grown by doubling, then
    bisected.  Returns (x, power(x)); x = 0 when the budget is already
    satisfied there.

    Coefficients below 1e-14 of the largest are rounding debris from
    rank-deficient systems (the right-hand side lies in the range of
    the left factor) and are dropped; keeping them would fake an
    active constraint through c/(d + x)^2 blow-ups on null directions.
    """
    inf = float("inf")
    if not (np.all(np.isfinite(coeffs)) and np.all(np.isfinite(eigvals))):
        raise BracketFailure("power at zero multiplier is not finite")
    floor = 1e-14 * float(np.max(coeffs))
    c = [float(v) if v > floor else 0.0 for v in coeffs]
    d = [float(v) for v in eigvals]

    def power(x):
        total = 0.0
        for ci, di in zip(c, d):
            if ci == 0.0:
                continue
            den = di + x
            if den <= 0.0:
                return inf
            total += ci / (den * den)
        return total

    p0 = power(0.0)
    if p0 <= budget:
        return 0.0, p0

    hi = 1.0
    while power(hi) > budget:
        hi *= 2.0
        if hi > 1e120:
            raise BracketFailure("could not bracket the power budget")
    lo = 0.0
    mid, pm = hi, power(hi)
    for _ in range(MAX_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        pm = power(mid)
        if pm > budget:
            lo = mid
        else:
            hi = mid
        if abs(pm - budget) <= BISECT_RTOL * budget or hi - lo <= 1e-18 * max(1.0, hi):
            break
    return mid, pm


def _search_precoder_system(lhs, rhs, ps):
    """Multiplier search on an assembled precoder system."""
    eigvals, basis = np.linalg.eigh(lhs)
    eigvals = np.clip(eigvals, 0.0, None)
    proj = basis.conj().T @ np.hstack(rhs)
    coeffs = np.sum(np.abs(proj) ** 2, axis=1)
    lam, _ = _bisect_multiplier(eigvals, coeffs, ps)
    return lam, _precoder_from_system(lhs, rhs, lam)


def precoder_multiplier_search(ch, relay_bf, receivers, mse_weights, weights, ps):
    """Precoder update meeting the source power budget.

    Returns (lam, precoders).  lam = 0 when the unconstrained update is
    already feasible; otherwise lam is bisected until the transmit power
    matches ps (well inside the POWER_RTOL contract).
    """
    if not ps > 0:
        raise ValueError("source power budget must be positive")
    lhs, rhs = _precoder_system(ch, relay_bf, receivers, mse_weights, weights)
    return _search_precoder_system(lhs, rhs, ps)


# ---------------------------------------------------------------------------
# Relay beamformer block
# ---------------------------------------------------------------------------

def _relay_system(ch, precoders, receivers, mse_weights, weights):
    """Pieces of the relay KKT solution F = (T + mu I)^-1 C (Pi + I)^-1.

    T collects the weighted relay-side quadratic terms, C the negated
    weighted cross terms, and Pi is the relay input covariance.
    """
    p = np.hstack(precoders)
    ppd = p @ p.conj().T
    h_rb = ch.bs_relay
    pi = hermitize((h_rb @ ppd) @ h_rb.conj().T)
    m = h_rb.shape[0]
    t = np.zeros((m, m), dtype=complex)
    c = np.zeros((m, m), dtype=complex)
    for k in range(ch.num_users):
        n = ch.user_antennas[k]
        a1 = receivers[k][:, :n]
        a2 = receivers[k][:, n:]
        m2 = a2 @ ch.relay_users[k]
        left = m2.conj().T @ mse_weights[k]
        t += weights[k] * (left @ m2)
        inner = (a1 @ ch.bs_users[k]) @ ppd - precoders[k].conj().T
        c -= weights[k] * (left @ inner) @ h_rb.conj().T
    return hermitize(t), c, pi


def _relay_from_system(t, c, pi, mu, cqinv=None):
    m = t.shape[0]
    if cqinv is None:
        q = pi + np.eye(m, dtype=complex)
        cqinv = solve_hpd(q, c.conj().T)  # (Pi + I)^-1 C^H
    lhs = t if mu == 0.0 else t + mu * np.eye(m)
    return solve_hpd_jittered(lhs, cqinv.conj().T)


def relay_update(ch, precoders, receivers, mse_weights, weights, mu):
    """Relay beamformer F(mu) for a fixed multiplier."""
    if mu < 0:
        raise ValueError("multiplier must be non-negative")
    t, c, pi = _relay_system(ch, precoders, receivers, mse_weights, weights)
    return _relay_from_system(t, c, pi, mu)


def _search_relay_system(t, c, pi, pr):
    """Multiplier search on an assembled relay system."""
    q = pi + np.eye(t.shape[0], dtype=complex)
    eigvals, basis = np.linalg.eigh(t)
    eigvals = np.clip(eigvals, 0.0, None)
    # Tr(F (Pi+I) F^H) = sum_i (V^H C (Pi+I)^-1 C^H V)_ii / (d_i + mu)^2
    cqinv = solve_hpd(q, c.conj().T)  # (Pi + I)^-1 C^H
    z = basis.conj().T @ c
    coeffs = np.clip(np.real(np.einsum("ij,ji->i", z, cqinv @ basis)), 0.0, None)
    mu, _ = _bisect_multiplier(eigvals, coeffs, pr)
    return mu, _relay_from_system(t, c, pi, mu, cqinv=cqinv)


def relay_multiplier_search(ch, precoders, receivers, mse_weights, weights, pr):
    """Relay update meeting the relay power budget; returns (mu, F)."""
    if not pr > 0:
        raise ValueError("relay power budget must be positive")
    t, c, pi = _relay_system(ch, precoders, receivers, mse_weights, weights)
    return _search_relay_system(t, c, pi, pr)
