"""Ensemble experiments: config handling, the per-trial pipeline and CSV output."""
import csv
import dataclasses
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .beamform import (blocking_matrix, cox_scaled_weights, cox_unloaded_weights, gsc_weights,
                       loaded, mpdr_weights, omniscient_capon, quiescent_weights)
from .loading import LoadingMode, WngConstraint, compute_loading, linear_to_db
from .metrics import (FRAME_METRICS, LOADING_METRICS, TrialResult, accumulate, clamp_db,
                      output_sinr)
from .numerics import cholesky_solve
from .scenario import (BirthDeathScenario, ScenarioConfig, ScenarioConfigError, angle_grid,
                       steering_matrix, trial_rngs, step_birth_death, true_ecm, _allowed_for)
from .scm import GscTracker, ScmTracker, assemble_partitioned

log = logging.getLogger(__name__)

LOADED_METHODS = ("trace", "gershgorin", "evd")
BASELINE_METHODS = ("cox", "omniscient", "quiescent")
ALL_METHODS = LOADED_METHODS + BASELINE_METHODS
ARCHITECTURES = ("mpdr", "gsc")


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` is a dotted path."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    wng_min_db: Optional[float] = None  # None: 10 log10(M) - 3
    methods: Tuple[str, ...] = ALL_METHODS
    architectures: Tuple[str, ...] = ARCHITECTURES
    trials: int = 50
    output_dir: str = "results"
    workers: int = 1
    include_warmup: bool = False
    scan_decimation: int = 10

    @property
    def resolved_wng_min_db(self):
        if self.wng_min_db is None:
            return 10.0 * math.log10(self.scenario.num_elements) - 3.0
        return self.wng_min_db

    @property
    def constraint(self):
        return WngConstraint.from_db(self.resolved_wng_min_db, self.scenario.num_elements)

    def method_labels(self):
        """Column labels: ``<mode>_<arch>`` for loaded methods, bare names otherwise."""
        labels = []
        for m in self.methods:
            if m in LOADED_METHODS:
                labels.extend(f"{m}_{a}" for a in self.architectures)
            else:
                labels.append(m)
        return labels

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["wng_min_db"] = self.resolved_wng_min_db
        d["methods"] = list(self.methods)
        d["architectures"] = list(self.architectures)
        d["scenario"]["beampattern_window"] = list(self.scenario.beampattern_window)
        return d


def _coerce(value, kind, path):
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected a boolean, got {value!r}")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)) \
                or not math.isfinite(value):
            raise ConfigError(path, f"expected a finite number, got {value!r}")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    raise TypeError(kind)


_SCENARIO_TYPES = {
    "num_elements": int, "window_length": int, "total_snapshots": int,
    "target_angle": float, "snr_db": float, "inr_db": float, "max_interferers": int,
    "birth_probability": float, "mean_lifetime": float, "rng_seed": int,
    "grid_step": float, "spacing": float, "center_frequency": float,
}
_EXPERIMENT_TYPES = {
    "trials": int, "output_dir": str, "workers": int, "include_warmup": bool,
    "scan_decimation": int,
}


def _parse_scenario(raw):
    if not isinstance(raw, dict):
        raise ConfigError("scenario", "expected an object")
    kwargs = {}
    for key, value in raw.items():
        path = f"scenario.{key}"
        if key == "beampattern_window":
            if not isinstance(value, (list, tuple)) or len(value) != 2:
                raise ConfigError(path, "expected [lo_db, hi_db]")
            kwargs[key] = tuple(_coerce(v, float, path) for v in value)
        elif key == "snr_db" and value is None:
            kwargs[key] = None
        elif key in _SCENARIO_TYPES:
            kwargs[key] = _coerce(value, _SCENARIO_TYPES[key], path)
        else:
            raise ConfigError(path, "unknown field")
    return ScenarioConfig(**kwargs)


def config_from_dict(raw):
    """Build and validate an :class:`ExperimentConfig` from parsed JSON."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a JSON object")
    kwargs = {}
    for key, value in raw.items():
        if key == "scenario":
            kwargs[key] = _parse_scenario(value)
        elif key == "wng_min_db":
            kwargs[key] = None if value is None else _coerce(value, float, key)
        elif key in ("methods", "architectures"):
            if not isinstance(value, (list, tuple)) or not all(isinstance(v, str) for v in value):
                raise ConfigError(key, "expected a list of names")
            kwargs[key] = tuple(value)
        elif key in _EXPERIMENT_TYPES:
            kwargs[key] = _coerce(value, _EXPERIMENT_TYPES[key], key)
        else:
            raise ConfigError(key, "unknown field")
    config = ExperimentConfig(**kwargs)
    validate(config)
    return config


def validate(config):
    s = config.scenario
    checks = [
        ("scenario.num_elements", s.num_elements >= 2, "must be >= 2"),
        ("scenario.window_length", s.window_length >= 1, "must be >= 1"),
        ("scenario.total_snapshots", s.total_snapshots >= 1, "must be >= 1"),
        ("scenario.target_angle", 0.0 < s.target_angle < 180.0, "must lie in (0, 180)"),
        ("scenario.max_interferers", s.max_interferers >= 0, "must be >= 0"),
        ("scenario.birth_probability", 0.0 <= s.birth_probability <= 1.0, "must lie in [0, 1]"),
        ("scenario.mean_lifetime", s.mean_lifetime >= 1.0, "must be >= 1"),
        ("scenario.grid_step", 0.0 < s.grid_step < 180.0, "must lie in (0, 180)"),
        ("scenario.spacing", s.spacing > 0.0, "must be positive"),
        ("scenario.rng_seed", 0 <= s.rng_seed < 2 ** 63, "must be a non-negative 64-bit integer"),
        ("trials", config.trials >= 1, "must be >= 1"),
        ("workers", config.workers >= 1, "must be >= 1"),
        ("scan_decimation", config.scan_decimation >= 1, "must be >= 1"),
        ("methods", len(config.methods) > 0, "must not be empty"),
        ("architectures", len(config.architectures) > 0, "must not be empty"),
    ]
    for path, ok, message in checks:
        if not ok:
            raise ConfigError(path, message)
    for m in config.methods:
        if m not in ALL_METHODS:
            raise ConfigError("methods", f"unknown method {m!r}; choose from {list(ALL_METHODS)}")
    if len(set(config.methods)) != len(config.methods):
        raise ConfigError("methods", "duplicate entries")
    for a in config.architectures:
        if a not in ARCHITECTURES:
            raise ConfigError("architectures", f"unknown architecture {a!r}")
    if len(set(config.architectures)) != len(config.architectures):
        raise ConfigError("architectures", "duplicate entries")
    max_db = 10.0 * math.log10(s.num_elements)
    if config.resolved_wng_min_db > max_db + 1e-9:
        raise ConfigError("wng_min_db", f"must be <= 10 log10(M) = {max_db:.4f} dB")
    if config.resolved_wng_min_db < -1e-12:
        raise ConfigError("wng_min_db", "must be >= 0 dB (a distortionless WNG is at least 1)")
    try:
        _allowed_for(s)
    except ScenarioConfigError as exc:
        raise ConfigError("scenario.beampattern_window", str(exc)) from None
    return config


def load_config(path, **overrides):
    with open(path, encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    return apply_overrides(config_from_dict(raw), **overrides)


def apply_overrides(config, trials=None, seed=None, out=None, workers=None):
    changes = {}
    if trials is not None:
        changes["trials"] = trials
    if out is not None:
        changes["output_dir"] = out
    if workers is not None:
        changes["workers"] = workers
    if seed is not None:
        changes["scenario"] = dataclasses.replace(config.scenario, rng_seed=seed)
    return validate(dataclasses.replace(config, **changes))


# --------------------------------------------------------------------------
# trial pipeline


def run_trial(config, trial_index):
    """Run one trial and return its per-frame metrics.

    The trial seed is ``scenario.rng_seed + trial_index``.
    """
    sc = config.scenario
    seed = sc.rng_seed + trial_index
    scenario = BirthDeathScenario(sc, seed=seed)
    d = scenario.steering
    M, T, L = sc.num_elements, sc.total_snapshots, sc.window_length
    constraint = config.constraint

    modes = [LoadingMode(m) for m in config.methods if m in LOADED_METHODS]
    archs = list(config.architectures) if modes else []
    labels = config.method_labels()
    need_scm = "mpdr" in archs or "cox" in config.methods
    scm = ScmTracker(L, M) if need_scm else None
    blocking = blocking_matrix(d)
    gsc = GscTracker(L, blocking.w_q, blocking.B) if "gsc" in archs else None

    data = {}
    for label in labels:
        metrics = FRAME_METRICS + (LOADING_METRICS if label.split("_")[0] in LOADED_METHODS else ())
        data[label] = {k: np.empty(T) for k in metrics}
    warmup = np.arange(T) < L - 1

    quiescent = quiescent_weights(d)
    omniscient = None

    for i in range(T):
        y, s, ecm, changed = scenario.step()
        weights = {}
        if scm is not None:
            scm.push(y)
        if gsc is not None:
            gsc.push(y)

        for arch in archs:
            R = scm.scm if arch == "mpdr" else assemble_partitioned(gsc)
            for mode in modes:
                decision = compute_loading(R, mode, constraint)
                if arch == "mpdr":
                    w = mpdr_weights(loaded(R, decision.mu), d)
                else:
                    w = gsc_weights(gsc, decision.mu, blocking.w_q, blocking)
                label = f"{mode.value}_{arch}"
                weights[label] = w
                rec = data[label]
                rec["mu"][i] = decision.mu
                rec["kappa_loaded"][i] = decision.kappa_loaded_bound
                rec["lambda_lo"][i] = decision.bounds.lower
                rec["lambda_hi"][i] = decision.bounds.upper

        if "cox" in data:
            weights["cox"] = cox_scaled_weights(cox_unloaded_weights(scm.scm, d), d,
                                                constraint.wng_min)
        if "omniscient" in data:
            if omniscient is None or changed:
                omniscient = omniscient_capon(ecm.R_true, d)
            weights["omniscient"] = omniscient
        if "quiescent" in data:
            weights["quiescent"] = quiescent

        for label, w in weights.items():
            rec = data[label]
            rec["wng_db"][i] = linear_to_db(w.wng)
            rec["sinr_db"][i] = output_sinr(w, ecm, d)
            out = np.vdot(w.w, y)
            rec["mse_inst"][i] = (out - s).real ** 2 + (out - s).imag ** 2

    return TrialResult(trial_index, seed, warmup, data)


def _run_trial_star(args):
    return run_trial(*args)


def run_trials(config):
    jobs = [(config, t) for t in range(config.trials)]
    if config.workers == 1 or config.trials == 1:
        return [run_trial(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        # map preserves submission order, so the reduction is schedule-independent
        return list(pool.map(_run_trial_star, jobs))


# --------------------------------------------------------------------------
# output


def fmt(x):
    return f"{x:.9g}"


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _frame_rows(summary, include_warmup):
    frames = np.arange(summary.warmup.shape[0])
    return frames if include_warmup else frames[~summary.warmup]


def write_ensemble_csv(path, summary, include_warmup=False):
    columns = []
    for m in summary.methods:
        for k in ("wng_db", "sinr_db", "cum_mse"):
            columns.append((m, k))
    header = ["frame"] + [f"{m}_{k}" for m, k in columns]
    rows = []
    for i in _frame_rows(summary, include_warmup):
        row = [str(i)]
        for m, k in columns:
            v = summary.mean[m][k][i]
            row.append(fmt(clamp_db(v) if k.endswith("_db") else v))
        rows.append(row)
    _write_csv(path, header, rows)


def write_loading_csv(path, summary, include_warmup=False):
    header = ["frame", "method", "architecture", "lambda_lo", "lambda_hi", "mu", "kappa_loaded"]
    loaded_labels = [m for m in summary.methods if "mu" in summary.mean[m]]
    rows = []
    for i in _frame_rows(summary, include_warmup):
        for label in loaded_labels:
            mode, arch = label.split("_")
            v = summary.mean[label]
            rows.append([str(i), mode, arch] + [fmt(v[k][i]) for k in
                                                ("lambda_lo", "lambda_hi", "mu", "kappa_loaded")])
    _write_csv(path, header, rows)


def write_trials_csv(path, results, include_warmup=False):
    labels = results[0].methods
    header = ["trial", "seed"]
    for m in labels:
        header += [f"{m}_mean_wng_db", f"{m}_min_wng_db", f"{m}_mean_sinr_db", f"{m}_final_cum_mse"]
    rows = []
    for r in results:
        keep = np.ones(r.frames, bool) if include_warmup else ~r.warmup
        row = [str(r.trial), str(r.seed)]
        for m in labels:
            wng_db = r.data[m]["wng_db"][keep]
            sinr_db = r.data[m]["sinr_db"][keep]
            mse = r.data[m]["mse_inst"][keep]
            row += [fmt(clamp_db(np.mean(wng_db))), fmt(clamp_db(np.min(wng_db))),
                    fmt(clamp_db(np.mean(sinr_db))), fmt(np.mean(mse))]
        rows.append(row)
    _write_csv(path, header, rows)


def write_config_echo(path, config):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(config.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")


def run_experiment(config, write=True):
    """Run all trials, reduce them and (optionally) write the output files.

    Files written to ``config.output_dir``: ``config.json`` (resolved
    config), ``ensemble.csv``, ``trials.csv`` and ``loading.csv``.
    Returns ``(summary, results)``.
    """
    log.info("running %d trial(s) x %d snapshots with %d worker(s)",
             config.trials, config.scenario.total_snapshots, config.workers)
    results = run_trials(config)
    summary = accumulate(results)
    if write:
        out = config.output_dir
        os.makedirs(out, exist_ok=True)
        write_config_echo(os.path.join(out, "config.json"), config)
        write_ensemble_csv(os.path.join(out, "ensemble.csv"), summary, config.include_warmup)
        write_trials_csv(os.path.join(out, "trials.csv"), results, config.include_warmup)
        write_loading_csv(os.path.join(out, "loading.csv"), summary, config.include_warmup)
    return summary, results


# --------------------------------------------------------------------------
# spatial spectrum


def capon_spectrum(R, steering):
    """Capon power ``1 / (d^H R^{-1} d)`` for each row of ``steering``."""
    X = cholesky_solve(R, steering.T)
    return 1.0 / np.einsum("am,ma->a", steering.conj(), X).real


def spatial_spectrum(config, trial_index=0):
    """Capon scan of the true ECM along the interferer schedule of one trial.

    Returns ``(frames, angles, power_db)`` with one row every
    ``scan_decimation`` snapshots.
    """
    sc = config.scenario
    schedule_rng, _ = trial_rngs(sc.rng_seed + trial_index)
    geom = sc.geometry
    allowed = _allowed_for(sc)
    angles = angle_grid(sc.grid_step)
    steering = steering_matrix(geom, angles)
    frames = np.arange(0, sc.total_snapshots, config.scan_decimation)
    power = np.empty((frames.size, angles.size))
    state = []
    row = 0
    for i in range(sc.total_snapshots):
        state = step_birth_death(state, sc, schedule_rng, allowed)
        if i % config.scan_decimation == 0:
            power[row] = capon_spectrum(true_ecm(state, sc, geom).R_true, steering)
            row += 1
    return frames, angles, 10.0 * np.log10(power)


def scan_spatial_spectrum(config, path=None):
    """Write ``spectrum.csv``: ``frame`` then one dB column per scan angle."""
    frames, angles, power_db = spatial_spectrum(config)
    path = path or os.path.join(config.output_dir, "spectrum.csv")
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    header = ["frame"] + [f"{a:g}" for a in angles]
    rows = ([str(f)] + [fmt(v) for v in clamp_db(p)] for f, p in zip(frames, power_db))
    _write_csv(path, header, rows)
    return path
