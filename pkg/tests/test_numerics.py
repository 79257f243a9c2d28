import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import charpoly_roots, random_hermitian, random_hpd, random_psd
from wngload.numerics import (EvdConvergenceError, NotPositiveDefiniteError, SpectralBounds,
                              cholesky_solve, hermitian_evd, hermitize, rank_one_update, trace)


def test_evd_identity():
    e = hermitian_evd(np.eye(3))
    np.testing.assert_allclose(e.eigenvalues, [1, 1, 1])
    np.testing.assert_allclose(e.eigenvectors.conj().T @ e.eigenvectors, np.eye(3), atol=1e-14)


def test_evd_2x2_by_hand():
    # det([[2-l, 1], [1, 2-l]]) = (2-l)^2 - 1 -> l = 1, 3
    np.testing.assert_allclose(hermitian_evd(np.array([[2.0, 1.0], [1.0, 2.0]])).eigenvalues,
                               [1.0, 3.0], atol=1e-15)


def test_evd_matches_characteristic_polynomial(rng):
    A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    R = A.conj().T @ A
    np.testing.assert_allclose(hermitian_evd(R).eigenvalues, charpoly_roots(R), atol=1e-9)


def test_evd_complex_entries_need_phase_rotation():
    R = np.array([[1.0, 2j], [-2j, 1.0]])
    np.testing.assert_allclose(hermitian_evd(R).eigenvalues, [-1.0, 3.0], atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 5, 16, 40])
def test_evd_reconstruction_and_unitarity(rng, n):
    R = random_hermitian(rng, n)
    e = hermitian_evd(R)
    V, lam = e.eigenvectors, e.eigenvalues
    assert np.all(np.diff(lam) >= 0)
    assert np.linalg.norm(V @ np.diag(lam) @ V.conj().T - R) <= 1e-10 * np.linalg.norm(R)
    np.testing.assert_allclose(V.conj().T @ V, np.eye(n), atol=1e-10)


def test_evd_is_deterministic(rng):
    R = random_hermitian(rng, 9)
    a, b = hermitian_evd(R), hermitian_evd(R.copy())
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_evd_zero_matrix():
    e = hermitian_evd(np.zeros((4, 4)))
    assert np.array_equal(e.eigenvalues, np.zeros(4))
    assert e.condition_number == np.inf


def test_evd_non_convergence_reports_residual(monkeypatch, rng):
    import wngload.numerics as numerics
    monkeypatch.setattr(numerics, "EVD_MAX_SWEEPS", 0)
    with pytest.raises(EvdConvergenceError) as info:
        hermitian_evd(random_hermitian(rng, 5))
    assert info.value.residual > 0


def test_evd_rejects_non_finite():
    with pytest.raises(ValueError):
        hermitian_evd(np.array([[1.0, np.nan], [np.nan, 1.0]]))


def test_evd_shift_property(rng):
    for _ in range(50):
        R = random_psd(rng, 6)
        mu = rng.uniform(0, 5)
        shifted = hermitian_evd(R + mu * np.eye(6)).eigenvalues
        np.testing.assert_allclose(shifted, hermitian_evd(R).eigenvalues + mu,
                                   atol=1e-10 * max(1.0, np.linalg.norm(R)))


def test_cholesky_identity_and_scalar():
    b = np.array([1 + 2j, -3j, 0.5])
    np.testing.assert_allclose(cholesky_solve(np.eye(3), b), b)
    np.testing.assert_allclose(cholesky_solve(2 * np.eye(3), np.ones(3)), 0.5 * np.ones(3))


def test_cholesky_residual(rng):
    for _ in range(20):
        R = random_hpd(rng, 5)
        b = rng.normal(size=5) + 1j * rng.normal(size=5)
        x = cholesky_solve(R, b)
        assert np.linalg.norm(R @ x - b) <= 1e-9 * np.linalg.norm(b)


def test_cholesky_rejects_singular(rng):
    y = rng.normal(size=4) + 1j * rng.normal(size=4)
    with pytest.raises(NotPositiveDefiniteError):
        cholesky_solve(np.outer(y, y.conj()) - 1e-3 * np.eye(4), np.ones(4))


def test_rank_one_examples():
    R = rank_one_update(np.zeros((3, 3), complex), np.array([1, 0, 0]), 1.0)
    expected = np.zeros((3, 3))
    expected[0, 0] = 1
    np.testing.assert_array_equal(R, expected)


def test_rank_one_inverse_pair(rng):
    R = random_psd(rng, 6)
    y = rng.normal(size=6) + 1j * rng.normal(size=6)
    back = rank_one_update(rank_one_update(R, y, 1 / 37), y, -1 / 37)
    np.testing.assert_allclose(back, R, atol=1e-12)


def test_rank_one_sequential_equals_batch(rng):
    L, M = 37, 8
    Y = rng.normal(size=(L, M)) + 1j * rng.normal(size=(L, M))
    R = np.zeros((M, M), complex)
    for y in Y:
        R = rank_one_update(R, y, 1 / L)
    batch = Y.T @ Y.conj() / L
    assert np.linalg.norm(R - batch) <= 1e-10 * np.linalg.norm(batch)
    assert np.array_equal(R, R.conj().T)


def test_rank_one_dimension_mismatch():
    with pytest.raises(ValueError):
        rank_one_update(np.eye(3), np.ones(4), 1.0)


def test_trace_examples(rng):
    assert trace(np.eye(15)) == 15
    assert trace(np.diag([1.0, 2.0, 3.0])) == 6
    R = random_hermitian(rng, 7)
    assert abs(trace(R) - hermitian_evd(R).eigenvalues.sum()) <= 1e-10 * np.linalg.norm(R)


def test_trace_dominates_lambda_max(rng):
    for _ in range(200):
        R = random_psd(rng, 5, rank=rng.integers(1, 6))
        assert trace(R) >= hermitian_evd(R).eigenvalues[-1] - 1e-12


def test_kantorovich_inequality(rng):
    for _ in range(1000):
        n = rng.integers(2, 9)
        R = random_hpd(rng, n)
        x = rng.normal(size=n) + 1j * rng.normal(size=n)
        lam = hermitian_evd(R).eigenvalues
        kappa = lam[-1] / lam[0]
        lhs = np.vdot(x, x).real ** 2 / (np.vdot(x, R @ x).real
                                          * np.vdot(x, np.linalg.solve(R, x)).real)
        assert lhs >= 4 * kappa / (kappa + 1) ** 2 * (1 - 1e-12)


def test_spectral_bounds_validation():
    SpectralBounds(0.0, 0.0)
    with pytest.raises(ValueError):
        SpectralBounds(2.0, 1.0)
    with pytest.raises(ValueError):
        SpectralBounds(-1.0, 1.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
                min_size=9, max_size=9))
def test_hermitize_is_exactly_hermitian(entries):
    R = hermitize(np.array(entries).reshape(3, 3))
    assert np.array_equal(R, R.conj().T)
