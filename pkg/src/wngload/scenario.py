"""Birth-death interference simulation on a half-wavelength ULA.

Random streams use numpy's Philox counter-based generator. Each trial seed
feeds a ``SeedSequence`` that is split into two independent streams: one
drives the interferer schedule, the other the signal samples. The schedule
can therefore be replayed without drawing any snapshots.
"""
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np


class ScenarioConfigError(ValueError):
    pass


@dataclass(frozen=True)
class UlaGeometry:
    num_elements: int = 15
    spacing: float = 0.5              # wavelengths
    center_frequency: float = 1000.0  # Hz, metadata only

    def __post_init__(self):
        if self.num_elements < 2:
            raise ScenarioConfigError("a ULA needs at least 2 elements")
        if not self.spacing > 0:
            raise ScenarioConfigError("element spacing must be positive")


@dataclass(frozen=True)
class InterfererState:
    angle: float          # degrees
    power: float          # linear, relative to unit sensor noise
    remaining_life: int   # snapshots


@dataclass(frozen=True)
class ScenarioConfig:
    num_elements: int = 15
    window_length: int = 37
    total_snapshots: int = 20000
    target_angle: float = 90.0
    snr_db: Optional[float] = -5.0    # None: no target
    inr_db: float = 7.0
    max_interferers: int = 2
    birth_probability: float = 0.002  # per free slot per snapshot
    mean_lifetime: float = 1000.0     # snapshots, geometric law
    rng_seed: int = 0
    beampattern_window: Tuple[float, float] = (-13.0, -3.0)  # dB
    grid_step: float = 1.0            # degrees
    spacing: float = 0.5
    center_frequency: float = 1000.0

    @property
    def geometry(self):
        return UlaGeometry(self.num_elements, self.spacing, self.center_frequency)

    @property
    def target_power(self):
        return 0.0 if self.snr_db is None else 10.0 ** (self.snr_db / 10.0)

    @property
    def interferer_power(self):
        return 10.0 ** (self.inr_db / 10.0)

    noise_power = 1.0


@dataclass(frozen=True)
class EnsembleCorrelation:
    R_true: np.ndarray
    interference_plus_noise: np.ndarray  # R_true without the target term
    target_power: float
    noise_power: float
    interferer_powers: Tuple[float, ...] = field(default_factory=tuple)


def steering_vector(geom, angle):
    """ULA response ``exp(i 2 pi spacing m cos(angle))``, m = 0..M-1."""
    if not 0.0 < angle < 180.0:
        raise ValueError(f"angle must lie in (0, 180) degrees, got {angle}")
    return _steering(geom.num_elements, geom.spacing, float(angle)).copy()


@lru_cache(maxsize=4096)
def _steering(M, spacing, angle):
    phase = 2.0 * np.pi * spacing * np.cos(np.deg2rad(angle))
    d = np.exp(1j * phase * np.arange(M))
    d.flags.writeable = False
    return d


def steering_matrix(geom, angles):
    """Steering vectors for many angles, one per row."""
    angles = np.asarray(angles, dtype=float)
    phase = 2.0 * np.pi * geom.spacing * np.cos(np.deg2rad(angles))
    return np.exp(1j * np.outer(phase, np.arange(geom.num_elements)))


def angle_grid(grid_step):
    """Open-interval grid ``step, 2 step, ... < 180`` in degrees."""
    n = int(np.ceil(180.0 / grid_step)) - 1
    grid = grid_step * np.arange(1, n + 1)
    return grid[grid < 180.0]


def allowed_angles(geom, target, lo_db, hi_db, grid_step=1.0):
    """Grid angles whose quiescent beampattern level lies in ``[lo_db, hi_db]``.

    The level is ``20 log10 |w_q^H d(theta)|`` with ``w_q = d(target)/M``, so
    the target itself sits at 0 dB.
    """
    if not lo_db < hi_db < 0:
        raise ScenarioConfigError(f"need lo_db < hi_db < 0, got ({lo_db}, {hi_db})")
    grid = angle_grid(grid_step)
    w_q = steering_vector(geom, target) / geom.num_elements
    response = np.abs(steering_matrix(geom, grid) @ w_q.conj())
    with np.errstate(divide="ignore"):
        level = 20.0 * np.log10(response)
    chosen = grid[(level >= lo_db) & (level <= hi_db)]
    if chosen.size == 0:
        raise ScenarioConfigError(
            f"no grid angle has a beampattern level in [{lo_db}, {hi_db}] dB")
    return [float(a) for a in chosen]


@lru_cache(maxsize=64)
def _allowed_for(config):
    lo, hi = config.beampattern_window
    return tuple(allowed_angles(config.geometry, config.target_angle, lo, hi, config.grid_step))


def step_birth_death(state, config, rng, allowed=None):
    """Advance the interferer population by one snapshot.

    Live interferers age by one snapshot and expire at zero remaining life.
    Every free slot then spawns a new interferer with probability
    ``birth_probability``, at a uniformly drawn allowed angle and with a
    geometric lifetime of mean ``mean_lifetime``. A newborn is live for the
    current snapshot.
    """
    if allowed is None:
        allowed = _allowed_for(config)
    survivors = []
    for s in state:
        if s.remaining_life > 1:
            survivors.append(replace(s, remaining_life=s.remaining_life - 1))
    for _ in range(config.max_interferers - len(survivors)):
        if rng.random() < config.birth_probability:
            angle = allowed[rng.integers(len(allowed))]
            life = int(rng.geometric(1.0 / config.mean_lifetime))
            survivors.append(InterfererState(angle, config.interferer_power, life))
    return survivors


def true_ecm(state, config, geom=None):
    """Exact correlation ``s2 d d^H + sum_j p_j d_j d_j^H + I``."""
    geom = geom or config.geometry
    M = geom.num_elements
    R_in = config.noise_power * np.eye(M, dtype=np.complex128)
    for s in state:
        dj = _steering(M, geom.spacing, s.angle)
        R_in = R_in + s.power * np.outer(dj, dj.conj())
    d = _steering(M, geom.spacing, float(config.target_angle))
    R = R_in + config.target_power * np.outer(d, d.conj())
    return EnsembleCorrelation(R, R_in, config.target_power, config.noise_power,
                               tuple(s.power for s in state))


def _cgauss(z, power):
    return np.sqrt(power / 2.0) * (z[0::2] + 1j * z[1::2])


def draw_snapshot(state, config, geom, rng):
    """One array snapshot ``y = d s + sum_j d_j g_j + v`` and its target sample ``s``.

    All sources are independent circular complex Gaussians. Normal variates
    are consumed in the order: target, interferers (in state order), noise.
    """
    M = geom.num_elements
    J = len(state)
    z = rng.standard_normal(2 * (1 + J + M))
    s = _cgauss(z[:2], config.target_power)[0]
    y = s * _steering(M, geom.spacing, float(config.target_angle))
    for j, intf in enumerate(state):
        g = _cgauss(z[2 + 2 * j:4 + 2 * j], intf.power)[0]
        y = y + g * _steering(M, geom.spacing, intf.angle)
    y = y + _cgauss(z[2 + 2 * J:], config.noise_power)
    return y, s


def trial_rngs(seed):
    """Independent (schedule, signal) Philox generators for one trial seed."""
    schedule_seq, signal_seq = np.random.SeedSequence(int(seed)).spawn(2)
    return (np.random.Generator(np.random.Philox(schedule_seq)),
            np.random.Generator(np.random.Philox(signal_seq)))


class BirthDeathScenario:
    """Stateful driver producing one snapshot per call to :meth:`step`.

    ``step`` returns ``(y, s, ecm, changed)`` where ``changed`` tells whether
    the interferer set (and therefore the true ECM) differs from the previous
    snapshot.
    """

    def __init__(self, config, seed=None):
        self.config = config
        self.geometry = config.geometry
        self.allowed = _allowed_for(config)
        self.seed = config.rng_seed if seed is None else seed
        self._schedule_rng, self._signal_rng = trial_rngs(self.seed)
        self.state = []
        self.ecm = true_ecm(self.state, config, self.geometry)
        self.steering = steering_vector(self.geometry, config.target_angle)
        self.frame = -1

    def advance(self):
        """Move the interferer schedule forward one snapshot."""
        previous = [(s.angle, s.power) for s in self.state]
        self.state = step_birth_death(self.state, self.config, self._schedule_rng, self.allowed)
        changed = [(s.angle, s.power) for s in self.state] != previous
        if changed:
            self.ecm = true_ecm(self.state, self.config, self.geometry)
        self.frame += 1
        return changed

    def step(self):
        changed = self.advance()
        y, s = draw_snapshot(self.state, self.config, self.geometry, self._signal_rng)
        return y, s, self.ecm, changed
