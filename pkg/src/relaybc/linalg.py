"""Dense complex-matrix helpers used by the solver.

Everything here works on plain complex ndarrays.  Hermitian positive
definite (HPD) systems are solved through a Cholesky factorization so
that a failed factorization doubles as the positive-definiteness check.
"""

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, FactorizationFailure

# Centralized tolerance knobs for the whole solver.
HERMITIAN_TOL = 1e-10   # max |A - A^H| entrywise, relative to entry scale
SOLVE_RTOL = 1e-10      # contractual relative residual of solve_hpd
JITTER_SCALE = 1e-12    # diagonal jitter for singular PSD left factors


def hermitize(a):
    """(A + A^H) / 2 - purge rounding asymmetry before factorizing."""
    return 0.5 * (a + a.conj().T)


def cho_factor_hpd(a):
    """Cholesky factor of a Hermitian positive definite matrix.

    Raises FactorizationFailure if ``a`` is visibly non-Hermitian or not
    positive definite.  The matrix is symmetrized before factorizing.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max())) if a.size else 1.0
    if float(np.abs(a - a.conj().T).max()) > HERMITIAN_TOL * scale:
        raise FactorizationFailure("matrix is not Hermitian within tolerance")
    try:
        return sla.cho_factor(hermitize(a), lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise FactorizationFailure(str(exc)) from exc


def solve_hpd(a, b):
    """Solve A X = B for Hermitian positive definite A."""
    factor = cho_factor_hpd(a)
    b = np.asarray(b)
    if b.shape[0] != np.asarray(a).shape[0]:
        raise DimensionMismatch(
            f"right-hand side has {b.shape[0]} rows, matrix is {a.shape[0]}x{a.shape[0]}"
        )
    return sla.cho_solve(factor, b, check_finite=False)


def solve_hpd_jittered(a, b):
    """solve_hpd with a diagonal-jitter retry for singular PSD systems.

    Cholesky on a numerically singular PSD matrix can either fail or
    sneak through with rounding-level pivots that would amplify
    null-space noise catastrophically, so near-singularity is detected
    from the pivot ratio rather than from the exception alone.
    """
    a = np.asarray(a)
    try:
        factor = cho_factor_hpd(a)
        pivots = np.abs(np.diag(factor[0]))
        if pivots.min() > 1e-7 * pivots.max():
            b = np.asarray(b)
            if b.shape[0] != a.shape[0]:
                raise DimensionMismatch(
                    f"right-hand side has {b.shape[0]} rows, matrix is {a.shape[0]}x{a.shape[0]}"
                )
            return sla.cho_solve(factor, b, check_finite=False)
    except FactorizationFailure:
        pass
    n = a.shape[0]
    jitter = JITTER_SCALE * (1.0 + float(np.real(np.trace(a))) / n)
    return solve_hpd(a + jitter * np.eye(n), b)


def inv_hpd(a):
    """Inverse of a Hermitian positive definite matrix, symmetrized."""
    factor = cho_factor_hpd(a)
    eye = np.eye(np.asarray(a).shape[0], dtype=complex)
    return hermitize(sla.cho_solve(factor, eye, check_finite=False))


def logdet_hpd(a):
    """Base-2 log-determinant of a Hermitian positive definite matrix."""
    factor, _ = cho_factor_hpd(a)
    return float(2.0 * np.sum(np.log2(np.abs(np.diag(factor)))))


def inv_and_logdet_hpd(a):
    """(A^-1, log2 det A) from a single Cholesky factorization."""
    factor = cho_factor_hpd(a)
    eye = np.eye(np.asarray(a).shape[0], dtype=complex)
    inv = hermitize(sla.cho_solve(factor, eye, check_finite=False))
    logdet = float(2.0 * np.sum(np.log2(np.abs(np.diag(factor[0])))))
    return inv, logdet


def trace_product(a, b):
    """Tr(A B) without forming the full product."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0] or b.shape[1] != a.shape[0]:
        raise DimensionMismatch(f"cannot trace a product of shapes {a.shape} and {b.shape}")
    return complex(np.einsum("ij,ji->", a, b))
