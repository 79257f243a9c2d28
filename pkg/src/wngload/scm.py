"""Sliding-window spatial correlation tracking.

Two trackers share the same rectangular-window semantics:

* :class:`ScmTracker` keeps ``R = (1/L) sum_{l<L} y[i-l] y[i-l]^H``.
* :class:`GscTracker` keeps the generalized sidelobe canceller components
  ``p_q = w_q^H R w_q``, ``r_qn = B^H R w_q`` and ``R_n = B^H R B`` without
  ever forming ``R``.

Before L snapshots have arrived the missing ones count as zeros, so the
estimate is still divided by L.
"""
import numpy as np

from .numerics import H, hermitize


class _Ring:
    """Fixed-capacity ring of vectors; ``push`` returns the evicted one."""

    def __init__(self, capacity, dim):
        self.buf = np.zeros((capacity, dim), dtype=np.complex128)
        self.capacity = capacity
        self.count = 0
        self._next = 0

    def push(self, v):
        old = self.buf[self._next].copy() if self.count == self.capacity else None
        self.buf[self._next] = v
        self._next = (self._next + 1) % self.capacity
        self.count = min(self.count + 1, self.capacity)
        return old

    def contents(self):
        """Stored vectors, oldest first."""
        if self.count < self.capacity:
            return self.buf[:self.count]
        return np.roll(self.buf, -self._next, axis=0)


class ScmTracker:
    """Sliding-window sample correlation matrix.

    Each push adds ``y y^H / L`` and, once the window is full, subtracts the
    evicted snapshot's outer product. The matrix is re-symmetrized after
    every update.
    """

    def __init__(self, window_length, order):
        if window_length < 1 or order < 1:
            raise ValueError("window_length and order must be positive")
        self.window_length = int(window_length)
        self.order = int(order)
        self._ring = _Ring(self.window_length, self.order)
        self.scm = np.zeros((self.order, self.order), dtype=np.complex128)
        self.pushes = 0

    @property
    def warmup(self):
        return self.pushes < self.window_length

    def push(self, y):
        y = np.asarray(y, dtype=np.complex128)
        if y.shape != (self.order,):
            raise ValueError(f"snapshot has shape {y.shape}, expected ({self.order},)")
        inv_l = 1.0 / self.window_length
        old = self._ring.push(y)
        R = self.scm + inv_l * np.outer(y, y.conj())
        if old is not None:
            R -= inv_l * np.outer(old, old.conj())
        self.scm = hermitize(R)
        self.pushes += 1
        return self.scm

    def window(self):
        return self._ring.contents()


def push_snapshot(tracker, y):
    tracker.push(y)
    return tracker


def check_blocking(w_q, B, tol=1e-10):
    """Validate the GSC pair: ``B^H B = I`` and ``B^H w_q = 0``."""
    M = w_q.shape[0]
    if B.shape != (M, M - 1):
        raise ValueError(f"blocking matrix has shape {B.shape}, expected ({M}, {M - 1})")
    if np.abs(H(B) @ B - np.eye(M - 1)).max(initial=0.0) > tol:
        raise ValueError("blocking matrix columns are not orthonormal")
    if np.abs(H(B) @ w_q).max(initial=0.0) * M > tol * np.sqrt(M):
        raise ValueError("blocking matrix does not block the steering vector")


class GscTracker:
    """Sliding-window tracker of ``(p_q, r_qn, R_n)`` from blocked snapshots.

    ``w_q`` is the quiescent weight ``d/M`` and ``B`` an orthonormal basis of
    the complement of ``d``; both are fixed at construction.
    """

    def __init__(self, window_length, w_q, B):
        w_q = np.asarray(w_q, dtype=np.complex128)
        B = np.asarray(B, dtype=np.complex128)
        check_blocking(w_q, B)
        self.window_length = int(window_length)
        self.order = w_q.shape[0]
        self.w_q = w_q
        self.B = B
        self._BH = H(B).copy()
        # rows of the ring hold z = [sqrt(M) w_q^H y ; B^H y]
        self._ring = _Ring(self.window_length, self.order)
        self.p_q = 0.0
        self.r_qn = np.zeros(self.order - 1, dtype=np.complex128)
        self.R_n = np.zeros((self.order - 1, self.order - 1), dtype=np.complex128)
        self.pushes = 0

    @property
    def warmup(self):
        return self.pushes < self.window_length

    def transform(self, y):
        z = np.empty(self.order, dtype=np.complex128)
        z[0] = np.sqrt(self.order) * np.vdot(self.w_q, y)
        z[1:] = self._BH @ y
        return z

    def push(self, y):
        y = np.asarray(y, dtype=np.complex128)
        if y.shape != (self.order,):
            raise ValueError(f"snapshot has shape {y.shape}, expected ({self.order},)")
        z = self.transform(y)
        old = self._ring.push(z)
        self._accumulate(z, 1.0)
        if old is not None:
            self._accumulate(old, -1.0)
        self.R_n = hermitize(self.R_n)
        self.pushes += 1

    def _accumulate(self, z, sign):
        scale = sign / self.window_length
        quiescent = z[0] / np.sqrt(self.order)  # w_q^H y
        blocked = z[1:]                         # B^H y
        self.p_q += scale * (quiescent.real ** 2 + quiescent.imag ** 2)
        self.r_qn += scale * blocked * quiescent.conjugate()
        self.R_n += scale * np.outer(blocked, blocked.conj())


def push_transformed(tracker, y):
    tracker.push(y)
    return tracker


def assemble_partitioned(tracker):
    """Build ``[[M p_q, sqrt(M) r_qn^H], [sqrt(M) r_qn, R_n]]``.

    This equals ``T^H R T`` for the unitary ``T = [sqrt(M) w_q, B]`` and so has
    the same eigenvalues as the full sliding-window SCM.
    """
    M = tracker.order
    R = np.empty((M, M), dtype=np.complex128)
    R[0, 0] = M * tracker.p_q
    R[1:, 0] = np.sqrt(M) * tracker.r_qn
    R[0, 1:] = R[1:, 0].conj()
    R[1:, 1:] = tracker.R_n
    return R
