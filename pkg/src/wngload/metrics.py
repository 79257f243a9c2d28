"""Per-frame scoring and ensemble reduction.

The MSE estimand is the target reconstruction error ``|w^H y - s|^2``: with a
distortionless beamformer the output should equal the target sample ``s``.
"""
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

DB_FLOOR = -100.0

FRAME_METRICS = ("wng_db", "sinr_db", "mse_inst")
LOADING_METRICS = ("mu", "kappa_loaded", "lambda_lo", "lambda_hi")


def _weights(w):
    return getattr(w, "w", w)


def output_sinr(w, ecm, d):
    """Output SINR in dB under the true component covariances."""
    w = _weights(w)
    signal = ecm.target_power * abs(np.vdot(w, d)) ** 2
    noise = np.vdot(w, ecm.interference_plus_noise @ w).real
    if noise <= 0.0:
        raise ZeroDivisionError("interference-plus-noise output power is zero")
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(signal / noise)


def instantaneous_mse(output, s_target):
    return abs(output - s_target) ** 2


def cumulative_mean(x):
    """Running mean ``mean(x[:i+1])`` along the last axis."""
    x = np.asarray(x, dtype=float)
    return np.cumsum(x, axis=-1) / np.arange(1, x.shape[-1] + 1)


def clamp_db(x):
    return np.maximum(x, DB_FLOOR)


@dataclass
class FrameRecord:
    frame: int
    warmup: bool
    values: Dict[str, Dict[str, float]]  # method -> metric -> value


@dataclass
class TrialResult:
    """Per-frame arrays for one trial: ``data[method][metric]`` has length T."""
    trial: int
    seed: int
    warmup: np.ndarray
    data: Dict[str, Dict[str, np.ndarray]]

    @property
    def methods(self):
        return list(self.data)

    @property
    def frames(self):
        return self.warmup.shape[0]

    def cumulative_mse(self, method):
        return cumulative_mean(self.data[method]["mse_inst"])

    def records(self):
        for i in range(self.frames):
            yield FrameRecord(i, bool(self.warmup[i]), {
                m: {k: float(v[i]) for k, v in metrics.items()}
                for m, metrics in self.data.items()})


@dataclass
class EnsembleSummary:
    """Trial means per frame. ``mean[method][metric]`` has length T.

    Metrics are the per-trial frame metrics plus ``cum_mse``, the running
    mean of ``mse_inst`` within each trial.
    """
    trials: int
    warmup: np.ndarray
    mean: Dict[str, Dict[str, np.ndarray]] = field(default_factory=dict)

    @property
    def methods(self):
        return list(self.mean)

    def post_warmup(self, method, metric):
        return self.mean[method][metric][~self.warmup]


def accumulate(results: List[TrialResult]) -> EnsembleSummary:
    """Average trial results frame by frame, in the given order."""
    if not results:
        raise ValueError("need at least one trial")
    first = results[0]
    for r in results[1:]:
        if r.frames != first.frames or r.methods != first.methods:
            raise ValueError(f"trial {r.trial} does not match the shape of trial {first.trial}")
        for m in first.methods:
            if list(r.data[m]) != list(first.data[m]):
                raise ValueError(f"trial {r.trial} has different metrics for {m!r}")

    n = len(results)
    mean = {}
    for m in first.methods:
        mean[m] = {}
        for k in first.data[m]:
            total = np.zeros(first.frames)
            for r in results:
                total += r.data[m][k]
            mean[m][k] = total / n
        if "mse_inst" in first.data[m]:
            total = np.zeros(first.frames)
            for r in results:
                total += r.cumulative_mse(m)
            mean[m]["cum_mse"] = total / n
    return EnsembleSummary(n, first.warmup.copy(), mean)
