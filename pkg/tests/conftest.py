import itertools

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (A + A.conj().T)


def random_psd(rng, n, rank=None):
    """``A^H A / k`` with ``A`` of shape (k, n); rank-deficient when k < n."""
    k = n if rank is None else rank
    A = rng.normal(size=(k, n)) + 1j * rng.normal(size=(k, n))
    R = A.conj().T @ A / k
    return 0.5 * (R + R.conj().T)


def random_hpd(rng, n):
    # condition numbers spread over several decades
    R = random_psd(rng, n)
    return R + 10.0 ** rng.uniform(-3, 1) * np.eye(n)


def _permutation_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def charpoly_roots(A):
    """Eigenvalues as roots of ``det(lambda I - A)`` via Leibniz expansion.

    Brute force over all permutations with polynomial products; independent
    of any eigensolver. Roots are Newton-polished on the same polynomial.
    """
    n = A.shape[0]
    coeffs = np.zeros(n + 1, dtype=complex)  # highest degree first
    for perm in itertools.permutations(range(n)):
        term = np.array([1.0 + 0j])
        for i, j in enumerate(perm):
            factor = np.array([1.0, -A[i, j]]) if i == j else np.array([-A[i, j]])
            term = np.polymul(term, factor)
        coeffs[n + 1 - term.size:] += _permutation_sign(perm) * term
    coeffs = coeffs.real
    roots = np.sort(np.roots(coeffs).real)
    deriv = np.polyder(coeffs)
    for _ in range(3):
        step = np.polyval(coeffs, roots) / np.polyval(deriv, roots)
        roots = np.where(np.isfinite(step), roots - step, roots)
    return np.sort(roots)


# criterion number -> "criterion N: PASS|FAIL  detail", filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
