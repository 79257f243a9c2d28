"""Dense complex Hermitian primitives.

Everything here works on plain ``numpy`` arrays: vectors are 1-D complex
arrays of length M, Hermitian matrices are M x M complex arrays that are kept
exactly Hermitian by re-symmetrizing after every write.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from numba import njit

EVD_MAX_SWEEPS = 100
EVD_TOL = 1e-12


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a Cholesky factorization meets a non-positive pivot."""


class EvdConvergenceError(RuntimeError):
    """Raised when the Jacobi eigensolver runs out of sweeps."""

    def __init__(self, residual, sweeps):
        super().__init__(
            f"Jacobi EVD did not converge after {sweeps} sweeps "
            f"(off-diagonal residual {residual:.3e})")
        self.residual = residual
        self.sweeps = sweeps


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray   # ascending, real
    eigenvectors: np.ndarray  # unitary, columns match eigenvalues
    sweeps: int = 0

    @property
    def condition_number(self):
        lo, hi = self.eigenvalues[0], self.eigenvalues[-1]
        return np.inf if lo <= 0 else hi / lo


@dataclass(frozen=True)
class SpectralBounds:
    lower: float
    upper: float

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper):
            raise ValueError(
                f"invalid spectral bounds: lower={self.lower}, upper={self.upper}")


def H(A):
    """Conjugate transpose."""
    return np.conj(np.swapaxes(A, -1, -2))


def hermitize(R):
    """Return (R + R^H) / 2 with an exactly real diagonal."""
    R = 0.5 * (R + R.conj().T)
    # (R + R^H)/2 is exactly Hermitian off the diagonal; force the diagonal too
    np.fill_diagonal(R, R.diagonal().real)
    return R


def as_hermitian(R):
    R = np.asarray(R, dtype=np.complex128)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {R.shape}")
    if not np.all(np.isfinite(R)):
        raise ValueError("matrix has non-finite entries")
    return R


@njit(cache=True)
def _jacobi(R, want_vectors, tol, max_sweeps):
    n = R.shape[0]
    A = R.copy()
    V = np.eye(n, dtype=np.complex128)
    norm = 0.0
    for i in range(n):
        for j in range(n):
            norm += A[i, j].real ** 2 + A[i, j].imag ** 2
    thresh = tol * np.sqrt(norm)

    sweep = 0
    while True:
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += 2.0 * (A[p, q].real ** 2 + A[p, q].imag ** 2)
        off = np.sqrt(off)
        if off <= thresh or sweep >= max_sweeps:
            break
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                app = A[p, p].real
                aqq = A[q, q].real
                # once |a_pq| is below the last bit of both diagonals, drop it
                if sweep > 4 and abs(app) + 100.0 * mag == abs(app) \
                        and abs(aqq) + 100.0 * mag == abs(aqq):
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    continue
                ph = apq / mag
                phc = ph.conjugate()
                tau = (aqq - app) / (2.0 * mag)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = 1.0 / (abs(tau) + np.sqrt(1.0 + tau * tau))
                    if tau < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # A <- A G, G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on (p, q)
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * phc * akq
                    A[k, q] = s * akp + c * phc * akq
                # A <- G^H A
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * ph * aqk
                    A[q, k] = s * apk + c * ph * aqk
                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                if want_vectors:
                    for k in range(n):
                        vkp = V[k, p]
                        vkq = V[k, q]
                        V[k, p] = c * vkp - s * phc * vkq
                        V[k, q] = s * vkp + c * phc * vkq

    w = np.empty(n)
    for i in range(n):
        w[i] = A[i, i].real
    return w, V, sweep, off, off <= thresh


def hermitian_evd(R, want_vectors=True):
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.

    Parameters
    ----------
    R : (M, M) array_like
        Hermitian matrix. Only exact Hermitian input is meaningful; the
        rotations read both triangles.
    want_vectors : bool
        Skip accumulating the eigenvectors when only the spectrum is needed.

    Returns
    -------
    EigenDecomposition
        Eigenvalues sorted ascending and the matching unitary eigenvectors
        (identity when ``want_vectors`` is False).

    Raises
    ------
    EvdConvergenceError
        If the off-diagonal Frobenius norm is still above ``1e-12 * ||R||``
        after ``EVD_MAX_SWEEPS`` sweeps.
    """
    R = as_hermitian(R)
    w, V, sweeps, off, ok = _jacobi(R, want_vectors, EVD_TOL, EVD_MAX_SWEEPS)
    if not ok:
        raise EvdConvergenceError(off, sweeps)
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], V[:, order] if want_vectors else V, sweeps)


def eigvalsh(R):
    """Ascending eigenvalues only."""
    return hermitian_evd(R, want_vectors=False).eigenvalues


def cholesky_solve(R, b):
    """Solve ``R x = b`` for Hermitian positive-definite ``R``.

    Raises NotPositiveDefiniteError when the factorization fails, which in
    this package means the caller applied no or insufficient loading.
    """
    try:
        factor = la.cho_factor(R, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"matrix is not positive-definite: {exc}") from None
    return la.cho_solve(factor, b, check_finite=False)


def rank_one_update(R, y, scale):
    """Return ``R + scale * y y^H``, re-symmetrized."""
    y = np.asarray(y)
    if R.shape != (y.shape[0], y.shape[0]):
        raise ValueError(f"dimension mismatch: R is {R.shape}, y has length {y.shape[0]}")
    return hermitize(R + scale * np.outer(y, y.conj()))


def trace(R):
    return float(np.sum(np.asarray(R).diagonal().real))
