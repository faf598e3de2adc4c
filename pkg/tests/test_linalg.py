import numpy as np
import pytest

from relaybc.errors import DimensionMismatch, FactorizationFailure
from relaybc.linalg import (
    hermitize,
    inv_and_logdet_hpd,
    inv_hpd,
    logdet_hpd,
    solve_hpd,
    solve_hpd_jittered,
    trace_product,
)

from conftest import crandn, random_hpd


def test_solve_identity():
    x = solve_hpd(np.eye(2), np.array([[1.0], [2.0]]))
    assert np.allclose(x, [[1.0], [2.0]])


def test_solve_diagonal():
    x = solve_hpd(np.diag([2.0, 4.0]), np.eye(2))
    assert np.allclose(x, np.diag([0.5, 0.25]))


def test_solve_residual_random():
    rng = np.random.default_rng(1)
    a = random_hpd(rng, 4)
    b = crandn(rng, 4, 3)
    x = solve_hpd(a, b)
    assert np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_solve_residual_many_sizes():
    rng = np.random.default_rng(2)
    for _ in range(100):
        n = int(rng.integers(1, 9))
        a = random_hpd(rng, n)
        b = crandn(rng, n, int(rng.integers(1, 5)))
        x = solve_hpd(a, b)
        assert np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_solve_rejects_non_hermitian():
    a = np.array([[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(FactorizationFailure):
        solve_hpd(a, np.eye(2))


def test_solve_rejects_indefinite():
    with pytest.raises(FactorizationFailure):
        solve_hpd(np.diag([1.0, -1.0]), np.eye(2))


def test_solve_rejects_bad_shapes():
    with pytest.raises(DimensionMismatch):
        solve_hpd(np.ones((2, 3)), np.eye(2))
    with pytest.raises(DimensionMismatch):
        solve_hpd(np.eye(2), np.ones((3, 1)))


def test_logdet_identity_and_diagonal():
    assert logdet_hpd(np.eye(3)) == pytest.approx(0.0, abs=1e-12)
    assert logdet_hpd(np.diag([2.0, 2.0])) == pytest.approx(2.0, abs=1e-12)


def _det3_cofactor(a):
    # direct cofactor expansion along the first row
    return (
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )


def test_logdet_matches_cofactor_expansion():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = random_hpd(rng, 3)
        det = np.real(_det3_cofactor(a))
        assert logdet_hpd(a) == pytest.approx(np.log2(det), rel=1e-9)


def test_logdet_inverse_cancels():
    rng = np.random.default_rng(4)
    for _ in range(20):
        a = random_hpd(rng, 5)
        assert abs(logdet_hpd(a) + logdet_hpd(inv_hpd(a))) <= 1e-8


def test_inv_and_logdet_consistent():
    rng = np.random.default_rng(5)
    a = random_hpd(rng, 4)
    inv, logdet = inv_and_logdet_hpd(a)
    assert np.allclose(inv, inv_hpd(a))
    assert logdet == pytest.approx(logdet_hpd(a))
    assert np.linalg.norm(inv @ a - np.eye(4)) <= 1e-10


def test_trace_product_hand_values():
    assert trace_product(np.eye(2), np.eye(2)) == pytest.approx(2.0)
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    b = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert trace_product(a, b) == pytest.approx(1.0)


def test_trace_product_matches_explicit_product():
    rng = np.random.default_rng(6)
    a = crandn(rng, 4, 4)
    b = crandn(rng, 4, 4)
    assert trace_product(a, b) == pytest.approx(np.trace(a @ b), abs=1e-12)


def test_trace_product_cyclic():
    rng = np.random.default_rng(7)
    a = crandn(rng, 3, 5)
    b = crandn(rng, 5, 3)
    assert trace_product(a, b) == pytest.approx(trace_product(b, a), abs=1e-12)


def test_trace_product_rejects_bad_shapes():
    with pytest.raises(DimensionMismatch):
        trace_product(np.ones((2, 3)), np.ones((2, 3)))


def test_hermitize_removes_asymmetry():
    rng = np.random.default_rng(8)
    a = random_hpd(rng, 4)
    a[0, 1] += 1e-13
    h = hermitize(a)
    assert np.abs(h - h.conj().T).max() == 0.0


def test_jittered_solve_zero_system():
    x = solve_hpd_jittered(np.zeros((3, 3)), np.zeros((3, 2)))
    assert np.all(x == 0.0)


def test_jittered_solve_singular_range_rhs():
    # rank-2 PSD system with the right-hand side inside its range
    rng = np.random.default_rng(9)
    u = crandn(rng, 4, 2)
    a = u @ u.conj().T
    b = u @ crandn(rng, 2, 1)
    x = solve_hpd_jittered(a, b)
    assert np.isfinite(x).all()
    assert np.linalg.norm(a @ x - b) <= 1e-4 * np.linalg.norm(b)
