"""WNG-constrained adaptive diagonal loading.

A floor ``W >= W_min`` on the white noise gain of an MPDR beamformer is
guaranteed whenever the loaded correlation matrix has condition number at
most::

    kappa_max = (2 A - 1) + 2 sqrt(A (A - 1)),   A = M / W_min

which is where ``4 kappa / (kappa + 1)**2 = 1 / A``. The smallest loading
``mu`` with ``(lam_max + mu) / (lam_min + mu) <= kappa_max`` is::

    mu = max(0, (lam_max - kappa_max * lam_min) / (kappa_max - 1))

The extreme eigenvalues come from one of three estimators of increasing
cost and tightness: the trace (O(M)), Gershgorin discs (O(M^2)) or a full
Jacobi EVD (O(M^3)).
"""
import enum
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .numerics import (EVD_MAX_SWEEPS, EVD_TOL, EvdConvergenceError, SpectralBounds,
                       _jacobi, trace)

# relative slack when checking 1 <= wng_min <= M, for values coming from dB
_WNG_RANGE_RTOL = 1e-12


class InfeasibleConstraintError(ValueError):
    """The requested WNG floor cannot be met (or met with finite loading)."""


class InvalidPsdError(ValueError):
    """A matrix assumed positive semi-definite has a negative diagonal."""


class LoadingMode(enum.Enum):
    TRACE = "trace"
    GERSHGORIN = "gershgorin"
    EVD = "evd"


def db_to_linear(x_db):
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def kappa_max_from_wng(wng_min, M):
    """Largest condition number that still guarantees ``WNG >= wng_min``.

    ``wng_min`` is linear and must lie in ``[1, M]``. Returns 1 exactly when
    ``wng_min == M``.
    """
    if not (1.0 - _WNG_RANGE_RTOL <= wng_min <= M * (1.0 + _WNG_RANGE_RTOL)):
        raise InfeasibleConstraintError(
            f"wng_min={wng_min!r} (linear) must lie in [1, M={M}]")
    a_g = max(M / wng_min, 1.0)
    return (2.0 * a_g - 1.0) + 2.0 * np.sqrt(a_g * (a_g - 1.0))


@dataclass(frozen=True)
class WngConstraint:
    """WNG floor (linear) for an M-element array and its condition cap."""
    wng_min: float
    M: int
    kappa_max: float = field(init=False)

    def __post_init__(self):
        # validates the range as a side effect
        object.__setattr__(self, "kappa_max", kappa_max_from_wng(self.wng_min, self.M))

    @classmethod
    def from_db(cls, wng_min_db, M):
        return cls(db_to_linear(wng_min_db), M)

    @property
    def array_gain_limit(self):
        return self.M / self.wng_min

    @property
    def wng_min_db(self):
        return linear_to_db(self.wng_min)


@dataclass(frozen=True)
class LoadingDecision:
    mode: LoadingMode
    bounds: SpectralBounds
    kappa_unloaded: float
    mu: float
    kappa_loaded_bound: float


def required_loading(bounds, kappa_max):
    """Minimal ``mu >= 0`` with ``(upper + mu) / (lower + mu) <= kappa_max``."""
    lo, hi = bounds.lower, bounds.upper
    if kappa_max < 1.0:
        raise ValueError(f"kappa_max must be >= 1, got {kappa_max}")
    if kappa_max == 1.0:
        if hi > lo:
            raise InfeasibleConstraintError(
                "kappa_max = 1 (wng_min = M) cannot be reached with finite loading; "
                "relax wng_min or use the quiescent beamformer")
        return 0.0
    return max(0.0, (hi - kappa_max * lo) / (kappa_max - 1.0))


@njit(cache=True)
def _trace_kernel(R):
    n = R.shape[0]
    total = 0.0
    scale = 0.0
    most_negative = 0.0
    for m in range(n):
        r = R[m, m].real
        total += r
        scale += abs(r)
        if r < most_negative:
            most_negative = r
    return total, scale, most_negative


@njit(cache=True)
def _gershgorin_kernel(R):
    n = R.shape[0]
    upper = -np.inf
    lower = np.inf
    for m in range(n):
        radius = 0.0
        for j in range(n):
            if j != m:
                # hypot (complex abs) is several times slower than this
                z = R[m, j]
                radius += np.sqrt(z.real * z.real + z.imag * z.imag)
        centre = R[m, m].real
        if centre + radius > upper:
            upper = centre + radius
        if centre - radius < lower:
            lower = centre - radius
    return lower, upper


def bounds_trace(R):
    """``(0, tr R)``: trace caps lam_max of a PSD matrix; lam_min is taken as 0.

    Reads the M diagonal entries only.
    """
    total, scale, most_negative = _trace_kernel(R)
    if most_negative < -1e-12 * scale:
        raise InvalidPsdError(f"negative diagonal entry {most_negative:.3e} in a PSD matrix")
    return SpectralBounds(0.0, max(total, 0.0))


def bounds_gershgorin(R):
    """Gershgorin disc bounds; the lower one is clamped at 0."""
    lower, upper = _gershgorin_kernel(R)
    lower = max(0.0, lower)
    return SpectralBounds(lower, max(upper, lower))


def bounds_evd(R):
    """Exact extreme eigenvalues (lam_min clamped at 0) from the Jacobi EVD.

    The computed values are projected onto the trace and Gershgorin
    enclosures, which hold exactly; this only removes rounding (a rank-1
    input can otherwise report lam_max one ulp above tr R) and keeps the
    EVD loading no larger than either cheaper mode's.
    """
    w, _, sweeps, off, ok = _jacobi(R, False, EVD_TOL, EVD_MAX_SWEEPS)
    if not ok:
        raise EvdConvergenceError(off, sweeps)
    g_lower, g_upper = _gershgorin_kernel(R)
    total = _trace_kernel(R)[0]
    upper = min(w.max(), g_upper, total)
    lower = max(0.0, w.min(), g_lower)
    return SpectralBounds(lower, max(upper, lower))


_BOUNDS = {
    LoadingMode.TRACE: bounds_trace,
    LoadingMode.GERSHGORIN: bounds_gershgorin,
    LoadingMode.EVD: bounds_evd,
}


def spectral_bounds(R, mode):
    return _BOUNDS[LoadingMode(mode)](R)


def compute_loading(R, mode, constraint):
    """Bound the spectrum of ``R`` with ``mode`` and pick the minimal loading.

    An all-zero ``R`` would give ``mu = 0`` and a singular loaded matrix; in
    that case (and only then) ``mu`` is raised to a tiny absolute floor so a
    downstream Cholesky still succeeds.
    """
    mode = LoadingMode(mode)
    if R.shape != (constraint.M, constraint.M):
        raise ValueError(f"matrix shape {R.shape} does not match M={constraint.M}")
    bounds = _BOUNDS[mode](R)
    kappa_max = constraint.kappa_max
    mu = required_loading(bounds, kappa_max)
    if bounds.lower + mu <= 0.0:
        mu = 1e-12 * max(1.0, trace(R) / constraint.M)
    kappa_unloaded = bounds.upper / bounds.lower if bounds.lower > 0 else np.inf
    kappa_loaded = (bounds.upper + mu) / (bounds.lower + mu)
    return LoadingDecision(mode, bounds, kappa_unloaded, mu, kappa_loaded)
