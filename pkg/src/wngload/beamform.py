"""Distortionless beamformers: loaded MPDR, loaded GSC, Cox scaling and references."""
from dataclasses import dataclass

import numpy as np

from .loading import InfeasibleConstraintError
from .numerics import cholesky_solve


@dataclass(frozen=True)
class BeamformerWeights:
    w: np.ndarray
    wng: float  # linear, |w^H d|^2 / ||w||^2

    @classmethod
    def from_vector(cls, w, d):
        return cls(w, wng(w, d))

    @property
    def wng_db(self):
        return 10.0 * np.log10(self.wng)


@dataclass(frozen=True)
class BlockingMatrix:
    """Orthonormal basis ``B`` of the complement of ``d``, with ``w_q = d/M``."""
    B: np.ndarray
    w_q: np.ndarray

    @property
    def transform(self):
        """The unitary ``T = [sqrt(M) w_q, B]``."""
        M = self.w_q.shape[0]
        return np.column_stack([np.sqrt(M) * self.w_q, self.B])


def _vector(w):
    return w.w if isinstance(w, BeamformerWeights) else np.asarray(w)


def _check_steering(d):
    M = d.shape[0]
    norm2 = np.vdot(d, d).real
    if abs(norm2 - M) > 1e-9 * M:
        raise ValueError(f"steering vector must satisfy ||d||^2 = M = {M}, got {norm2}")


def wng(w, d):
    """White noise gain ``|w^H d|^2 / ||w||^2`` (linear)."""
    w = _vector(w)
    energy = np.vdot(w, w).real
    if energy == 0.0:
        raise ValueError("white noise gain of a zero weight vector is undefined")
    return abs(np.vdot(w, d)) ** 2 / energy


def quiescent_weights(d):
    """Delay-and-sum ``d / M``: the distortionless weights with maximal WNG."""
    d = np.asarray(d, dtype=np.complex128)
    return BeamformerWeights(d / d.shape[0], float(d.shape[0]))


def mpdr_weights(Q, d):
    """``w = Q^{-1} d / (d^H Q^{-1} d)`` through a Cholesky solve.

    ``Q`` must be positive-definite, i.e. already loaded.
    """
    d = np.asarray(d, dtype=np.complex128)
    _check_steering(d)
    x = cholesky_solve(Q, d)
    w = x / np.vdot(d, x).conjugate()
    return BeamformerWeights.from_vector(w, d)


def omniscient_capon(R_true, d):
    """MPDR on the exact ensemble correlation matrix, with no loading."""
    return mpdr_weights(R_true, d)


def blocking_matrix(d):
    """Householder construction of the GSC blocking matrix.

    The reflector ``P = I - 2 v v^H / (v^H v)`` with ``v = u - alpha e_1``
    maps ``u = d/sqrt(M)`` to ``alpha e_1``; being Hermitian and unitary, its
    columns 2..M are an orthonormal basis orthogonal to ``d``.
    """
    d = np.asarray(d, dtype=np.complex128)
    _check_steering(d)
    M = d.shape[0]
    u = d / np.sqrt(M)
    # alpha opposes the phase of u[0] so that v[0] never cancels
    alpha = -np.exp(1j * np.angle(u[0]))
    v = u.copy()
    v[0] -= alpha
    P = np.eye(M, dtype=np.complex128) - 2.0 * np.outer(v, v.conj()) / np.vdot(v, v).real
    return BlockingMatrix(P[:, 1:].copy(), d / M)


def gsc_weights(tracker, mu, w_q, B):
    """GSC weights ``w_q - B (R_n + mu I)^{-1} r_qn`` from tracked components.

    ``B`` may be a :class:`BlockingMatrix` or the raw ``M x (M-1)`` array.
    """
    B = B.B if isinstance(B, BlockingMatrix) else np.asarray(B)
    w_q = np.asarray(w_q)
    M = w_q.shape[0]
    if M == 1:
        w = w_q.copy()
    else:
        Q_n = tracker.R_n + mu * np.eye(M - 1)
        w_a = cholesky_solve(Q_n, tracker.r_qn)
        w = w_q - B @ w_a
    return BeamformerWeights.from_vector(w, M * w_q)


def cox_scaled_weights(w_unloaded, d, wng_min):
    """Post-hoc WNG repair by shrinking the null-space part of ``w``.

    With ``w = w_par + w_perp`` (``w_par`` along ``d``), a vector whose WNG is
    below ``wng_min`` is replaced by ``w_par + beta * w_perp`` where ``beta``
    is chosen so that ``||w||^2 = 1 / wng_min`` exactly. The response toward
    ``d`` is untouched.
    """
    d = np.asarray(d, dtype=np.complex128)
    w = _vector(w_unloaded)
    M = d.shape[0]
    if wng_min > M * (1.0 + 1e-12):
        raise InfeasibleConstraintError(f"wng_min={wng_min} exceeds the array size M={M}")
    energy = np.vdot(w, w).real
    if energy <= 1.0 / wng_min:
        return BeamformerWeights.from_vector(w, d)
    w_par = d * (np.vdot(d, w) / M)
    w_perp = w - w_par
    budget = 1.0 / wng_min - np.vdot(w_par, w_par).real
    beta = np.sqrt(max(budget, 0.0) / np.vdot(w_perp, w_perp).real)
    return BeamformerWeights.from_vector(w_par + beta * w_perp, d)


def loaded(R, mu):
    """``R + mu I``."""
    return R + mu * np.eye(R.shape[0])


def cox_unloaded_weights(R, d):
    """MPDR weights with only a negligible numerical floor ``1e-10 tr(R)/M``."""
    M = R.shape[0]
    floor = 1e-10 * max(np.sum(R.diagonal().real) / M, np.finfo(float).tiny)
    return mpdr_weights(loaded(R, floor), d)


def beam_response(w, d_theta):
    """Array response ``w^H d(theta)`` for one or many steering vectors (rows)."""
    return np.asarray(d_theta) @ _vector(w).conj()

