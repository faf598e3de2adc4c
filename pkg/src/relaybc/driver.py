"""The alternating-optimization loop and the non-iterative baselines.

One iteration cycles four exact block updates: source precoders (with
their power multiplier), relay beamformer (with its multiplier), MMSE
receive filters, and MSE weight matrices.  When every user has the same
antenna count the per-user work runs through batched 3-D numpy kernels;
the generic per-user path handles mixed antenna counts and is the
reference the batched path is tested against.
"""

from dataclasses import dataclass

import numpy as np

from .baselines import algorithm1_init, identity_precoders, mrc_mrt, mrc_rzf
from .errors import BracketFailure, FactorizationFailure
from .linalg import hermitize, inv_and_logdet_hpd, solve_hpd, trace_product
from .wmmse import (
    DesignState,
    MseReport,
    _precoder_system,
    _relay_system,
    _search_precoder_system,
    _search_relay_system,
    _stream_offsets,
    relay_power,
    source_power,
)

SCHEMES = ("wmmse", "mrc_mrt", "mrc_rzf")


@dataclass
class TraceRecord:
    """Snapshot taken at the end of one full iteration."""

    iteration: int
    objective: float
    weighted_sum_rate: float
    source_power: float
    relay_power: float
    lam: float
    mu: float


@dataclass
class SolverResult:
    state: DesignState
    report: MseReport
    trace: list
    iterations_used: int
    converged: bool


def _receiver_step(ch, precoders, relay_bf):
    """MMSE receivers, weights, MSE matrices and -log2 det E at (P, F).

    Same math as mmse_receiver / mse_matrix / weight_update, but shares
    the per-user intermediate products across the four outputs.
    """
    p = np.hstack(precoders)
    fh = relay_bf @ ch.bs_relay
    offs, _ = _stream_offsets(ch)
    receivers, mse_weights, mse, raw_rates = [], [], [], []
    for k in range(ch.num_users):
        n = ch.user_antennas[k]
        h_kr = ch.relay_users[k]
        h = np.vstack((ch.bs_users[k], h_kr @ fh))
        hp = h @ p
        b = h_kr @ relay_bf
        g2 = b @ b.conj().T
        cov = hp @ hp.conj().T
        cov[:n, :n] += np.eye(n)
        cov[n:, n:] += np.eye(n) + g2
        hp_k = hp[:, offs[k]:offs[k] + n]
        a_k = solve_hpd(cov, hp_k).conj().T
        t = a_k @ hp
        t_own = t[:, offs[k]:offs[k] + n]
        d = np.eye(n, dtype=complex) - t_own
        a1 = a_k[:, :n]
        a2 = a_k[:, n:]
        e_k = hermitize(
            d @ d.conj().T
            + t @ t.conj().T
            - t_own @ t_own.conj().T
            + a1 @ a1.conj().T
            + a2 @ (np.eye(n) + g2) @ a2.conj().T
        )
        w_k, logdet_e = inv_and_logdet_hpd(e_k)
        receivers.append(a_k)
        mse_weights.append(w_k)
        mse.append(e_k)
        raw_rates.append(-logdet_e)
    return receivers, mse_weights, mse, raw_rates


class _GenericStepper:
    """Per-user reference implementation of the three iteration stages."""

    def __init__(self, ch):
        self.ch = ch

    def precoder_search(self, relay_bf, receivers, mse_weights, weights, ps):
        lhs, rhs = _precoder_system(self.ch, relay_bf, receivers, mse_weights, weights)
        return _search_precoder_system(lhs, rhs, ps)

    def relay_search(self, precoders, receivers, mse_weights, weights, pr):
        t, c, pi = _relay_system(self.ch, precoders, receivers, mse_weights, weights)
        mu, relay_bf = _search_relay_system(t, c, pi, pr)
        return mu, relay_bf, pi

    def receiver_step(self, precoders, relay_bf):
        return _receiver_step(self.ch, precoders, relay_bf)


class _BatchedStepper:
    """Batched kernels for cells where every user has the same N_k.

    The stacked effective channel computed during the receiver stage is
    reused by the next precoder stage (the relay beamformer does not
    change in between).
    """

    def __init__(self, ch):
        self.h_rb = ch.bs_relay
        self.hkb = np.stack(ch.bs_users)      # (K, N, M)
        self.hkr = np.stack(ch.relay_users)   # (K, N, M)
        self.k, self.n, self.m = self.hkb.shape
        self.eye_n = np.eye(self.n, dtype=complex)
        self.kidx = np.arange(self.k)
        self._hs = None
        self._hs_for = None

    @staticmethod
    def _ct(a):
        return a.conj().transpose(0, 2, 1)

    def _effective(self, relay_bf):
        if self._hs_for is relay_bf:
            return self._hs
        fh = relay_bf @ self.h_rb
        return np.concatenate((self.hkb, self.hkr @ fh), axis=1)  # (K, 2N, M)

    def _own_blocks(self, a):
        # (K, R, K*N) -> per-user diagonal blocks (K, R, N)
        k, r, _ = a.shape
        return a.reshape(k, r, k, self.n)[self.kidx, :, self.kidx, :]

    def precoder_search(self, relay_bf, receivers, mse_weights, weights, ps):
        hs = self._effective(relay_bf)
        a_s = np.stack(receivers)
        w_s = np.stack(mse_weights)
        w_arr = np.asarray(weights, dtype=float)
        ht = a_s @ hs                              # (K, N, M)
        wht = (w_arr[:, None, None] * w_s) @ ht
        lhs = np.einsum("kni,knj->ij", ht.conj(), wht)
        lhs = 0.5 * (lhs + lhs.conj().T)
        bmat = self._ct(ht) @ (w_arr[:, None, None] * w_s)   # (K, M, N)
        return _search_precoder_system(lhs, list(bmat), ps)

    def relay_search(self, precoders, receivers, mse_weights, weights, pr):
        p = np.hstack(precoders)
        ppd = p @ p.conj().T
        pi = self.h_rb @ ppd @ self.h_rb.conj().T
        pi = 0.5 * (pi + pi.conj().T)
        a_s = np.stack(receivers)
        w_s = np.stack(mse_weights)
        w_arr = np.asarray(weights, dtype=float)
        a1 = a_s[:, :, :self.n]
        a2 = a_s[:, :, self.n:]
        m2 = a2 @ self.hkr                          # (K, N, M)
        left = self._ct(m2) @ (w_arr[:, None, None] * w_s)   # (K, M, N)
        t = np.einsum("kmn,knj->mj", left, m2)
        t = 0.5 * (t + t.conj().T)
        inner = (a1 @ self.hkb) @ ppd - self._ct(np.stack(precoders))
        c = -np.einsum("kmn,knj->mj", left, inner) @ self.h_rb.conj().T
        mu, relay_bf = _search_relay_system(t, c, pi, pr)
        return mu, relay_bf, pi

    def receiver_step(self, precoders, relay_bf):
        n, k = self.n, self.k
        hs = self._effective(relay_bf)
        self._hs, self._hs_for = hs, relay_bf
        hp = hs @ np.hstack(precoders)              # (K, 2N, K*N)
        b = self.hkr @ relay_bf
        g2 = b @ self._ct(b)
        cov = hp @ self._ct(hp)
        cov[:, :n, :n] += self.eye_n
        cov[:, n:, n:] += self.eye_n + g2
        hp_own = self._own_blocks(hp)
        x = np.linalg.solve(cov, hp_own)
        a_s = self._ct(x)                           # (K, N, 2N)
        t = a_s @ hp
        t_own = self._own_blocks(t)
        d = self.eye_n - t_own
        a1 = a_s[:, :, :n]
        a2 = a_s[:, :, n:]
        e_s = (
            d @ self._ct(d)
            + t @ self._ct(t)
            - t_own @ self._ct(t_own)
            + a1 @ self._ct(a1)
            + a2 @ ((self.eye_n + g2) @ self._ct(a2))
        )
        e_s = 0.5 * (e_s + self._ct(e_s))
        try:
            chol = np.linalg.cholesky(e_s)
        except np.linalg.LinAlgError as exc:
            raise FactorizationFailure(str(exc)) from exc
        diags = np.abs(np.diagonal(chol, axis1=1, axis2=2))
        raw_rates = list(-2.0 * np.sum(np.log2(diags), axis=1))
        w_s = np.linalg.inv(e_s)
        w_s = 0.5 * (w_s + self._ct(w_s))
        return list(a_s), list(w_s), list(e_s), raw_rates


def _make_stepper(ch):
    if len(set(ch.user_antennas)) == 1:
        return _BatchedStepper(ch)
    return _GenericStepper(ch)


def _report(config, mse_weights, mse, raw_rates):
    weights = config.weights
    rates = [
        max(0.5 * r if config.half_duplex_rate_factor else r, 0.0) for r in raw_rates
    ]
    wsr = float(sum(w * r for w, r in zip(weights, rates)))
    obj = float(
        sum(
            w * (trace_product(w_k, e_k).real - raw)
            for w, w_k, e_k, raw in zip(weights, mse_weights, mse, raw_rates)
        )
    )
    return MseReport(mse, rates, wsr, obj)


def run_algorithm1(config, ch, tol=1e-6, max_iters=500):
    """Alternate the four block updates until the objective settles.

    Stops when the relative objective decrease drops below ``tol`` or
    after ``max_iters`` full iterations, whichever comes first.
    """
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    if max_iters < 1:
        raise ValueError("need at least one iteration")

    state = algorithm1_init(config, ch)
    weights = config.weights
    precoders, relay_bf = state.precoders, state.relay_bf
    receivers, mse_weights = state.receivers, state.mse_weights
    stepper = _make_stepper(ch)

    trace = []
    prev_obj = None
    converged = False
    iterations = 0
    report = None
    for iterations in range(1, max_iters + 1):
        try:
            lam, precoders = stepper.precoder_search(
                relay_bf, receivers, mse_weights, weights, config.ps
            )
            mu, relay_bf, pi = stepper.relay_search(
                precoders, receivers, mse_weights, weights, config.pr
            )
            receivers, mse_weights, mse, raw_rates = stepper.receiver_step(
                precoders, relay_bf
            )
        except (FactorizationFailure, BracketFailure) as exc:
            exc.args = (f"iteration {iterations}: {exc}",)
            raise
        report = _report(config, mse_weights, mse, raw_rates)
        trace.append(
            TraceRecord(
                iterations,
                report.objective,
                report.weighted_sum_rate,
                source_power(precoders),
                relay_power(relay_bf, pi),
                lam,
                mu,
            )
        )
        if prev_obj is not None and abs(prev_obj - report.objective) <= tol * max(
            abs(prev_obj), 1e-12
        ):
            converged = True
            break
        prev_obj = report.objective

    state = DesignState(list(precoders), relay_bf, list(receivers), list(mse_weights))
    return SolverResult(state, report, trace, iterations, converged)


def run_baseline(config, ch, scheme):
    """One-shot design: fixed scaled-identity precoder, closed-form relay
    beamformer, MMSE receivers.  No iteration."""
    precoders = identity_precoders(config)
    if scheme == "mrc_mrt":
        relay_bf = mrc_mrt(ch, precoders, config.pr)
    elif scheme == "mrc_rzf":
        relay_bf = mrc_rzf(ch, precoders, config.pr)
    else:
        raise ValueError(f"unknown baseline scheme {scheme!r}")
    receivers, mse_weights, mse, raw_rates = _receiver_step(ch, precoders, relay_bf)
    report = _report(config, mse_weights, mse, raw_rates)
    state = DesignState(precoders, relay_bf, receivers, mse_weights)
    return SolverResult(state, report, [], 0, True)


def run_scheme(config, ch, scheme, tol=1e-6, max_iters=500):
    """Dispatch a scheme name to the iterative solver or a baseline."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if scheme == "wmmse":
        return run_algorithm1(config, ch, tol=tol, max_iters=max_iters)
    return run_baseline(config, ch, scheme)
