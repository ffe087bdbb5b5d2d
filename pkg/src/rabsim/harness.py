"""Monte Carlo engine: seeded trials, aggregation, CSV output.

A trial draws one mismatch realization and one snapshot stream, then steps
every configured algorithm over the identical stream, scoring each snapshot's
weights against the true scenario quantities (realized desired steering
vector and analytic interference-plus-noise covariance).  Trials are
embarrassingly parallel and keyed by ``(master_seed, snr_index, trial, role)``
so results are bit-identical for any worker count.
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .adaptive import CcgBeamformer, McgBeamformer, SgBeamformer
from .analysis import (loaded_smi_weights, optimal_weights, output_sinr,
                       smi_weights, steering_mse)
from .arrays import (SnapshotBatch, generate_snapshots, make_coherent_mismatch,
                     make_incoherent_mismatch_stream, make_steering)
from .config import AlgorithmSpec, ScenarioConfig
from .errors import ExperimentError, NumericError
from .okspme import NoisePowerSource, OkspmeBeamformer, default_estimator
from .tracking import CovarianceTracker

STEADY_WINDOW = 50  # snapshots averaged for one SNR-sweep point


@dataclass
class TrialRecord:
    trial_index: int
    snr_db: float
    sinr_db: dict
    steering_mse: dict
    failed: dict


@dataclass
class AggregateResult:
    x_kind: str                    # "snapshot" or "snr_db"
    x_values: list
    mean_sinr_db: dict             # algorithm -> array over x
    mean_steering_mse: dict
    contributing: dict             # algorithm -> trials that produced data
    failures: dict                 # algorithm -> failed trial count
    trials: int


def _interference_covariance(sources, m_sensors: int, noise_power: float) -> np.ndarray:
    """True interference-plus-noise covariance of one scenario segment."""
    r = noise_power * np.eye(m_sensors, dtype=complex)
    for s in sources:
        if not s.is_desired:
            a = make_steering(m_sensors, s.doa_deg)
            r += s.power * np.outer(a, a.conj())
    return r


def build_beamformer(spec: AlgorithmSpec, *, a_init: np.ndarray, num_sources: int,
                     noise_power: float, a_nominal: np.ndarray | None = None):
    """Instantiate one algorithm from its spec and the trial context.

    ``a_init`` seeds the adaptive steering estimators (a draw inside the
    presumed sector); the non-adaptive baselines are pinned to ``a_nominal``,
    the presumed-direction steering vector.  Returns None for the clairvoyant
    'optimal' entry, which the trial loop evaluates directly from the true
    scenario quantities.
    """
    p = spec.params
    if a_nominal is None:
        a_nominal = a_init
    if spec.name == "optimal":
        return None
    if spec.name == "smi":
        tracker = CovarianceTracker(len(a_init), delta0=p.get("delta0", 0.1))
        return _SmiRunner("smi", tracker, a_nominal, loading=0.0)
    if spec.name == "loaded-smi":
        tracker = CovarianceTracker(len(a_init), delta0=p.get("delta0", 0.0))
        loading = p.get("loading_scale", 10.0) * noise_power
        return _SmiRunner("loaded-smi", tracker, a_nominal, loading=loading)

    noise = NoisePowerSource(mode=p.get("noise_mode", "oracle"),
                             value=noise_power, num_sources=num_sources)
    forgetting_default = spec.name in ("okspme-ccg", "okspme-mcg")
    mode = p.get("tracker", "forgetting" if forgetting_default else "sample_mean")
    lam = p.get("lam", 0.998 if mode == "forgetting" else 1.0)
    est = default_estimator(a_init, num_sources, noise,
                            delta=p.get("delta", 0.1),
                            delta0=p.get("delta0", 0.1),
                            mode=mode, lam=lam,
                            unit_norm=p.get("unit_norm", False))
    if spec.name == "okspme":
        return OkspmeBeamformer(est)
    if spec.name == "okspme-sg":
        return SgBeamformer(est, mu_scale=p.get("mu_scale", 0.005),
                            smooth_power=p.get("smooth_power", True))
    if spec.name == "okspme-ccg":
        return CcgBeamformer(est, n_inner=p.get("n_inner", 5))
    return McgBeamformer(est, lam=lam, eta_a=p.get("eta_a", 0.1),
                         eta_v=p.get("eta_v", 0.1))


class _SmiRunner:
    """Sample-matrix-inversion baseline pinned to the nominal steering vector."""

    def __init__(self, name, tracker, a_nominal, loading):
        self.name = name
        self.tracker = tracker
        self.a_nominal = np.asarray(a_nominal, dtype=complex)
        self.loading = loading
        self.w = np.ones(len(a_nominal), dtype=complex)

    @property
    def a_hat(self):
        return self.a_nominal

    def process(self, x):
        self.tracker.update_covariance(x)
        r = self.tracker.covariance()
        if self.loading > 0:
            self.w = loaded_smi_weights(r, self.a_nominal, self.loading)
        else:
            self.w = smi_weights(r, self.a_nominal)
        return self.w


def simulate_trial_data(cfg: ScenarioConfig, snr_db: float, snr_index: int,
                        trial: int):
    """Generate one trial's observations and ground truth.

    Returns ``(batch, inc_per_snapshot, a_init, desired_power)`` where
    ``inc_per_snapshot`` maps snapshot index to the segment's true INC matrix.
    """
    seed = cfg.master_seed
    data_rng = rng.stream(seed, snr_index, trial, rng.ROLE_DATA)
    scat_rng = rng.stream(seed, snr_index, trial, rng.ROLE_SCATTER)
    init_rng = rng.stream(seed, snr_index, trial, rng.ROLE_INIT)

    a_nom = make_steering(cfg.sensors, cfg.desired_doa_deg)
    kind = cfg.scattering.kind
    if kind == "coherent":
        desired_sv = make_coherent_mismatch(a_nom, cfg.scattering, scat_rng)
        sv_source = desired_sv
    elif kind == "incoherent":
        sv_source = make_incoherent_mismatch_stream(a_nom, cfg.scattering, scat_rng)
    else:
        sv_source = a_nom

    segments = cfg.segments(snr_db)
    bounds = [start for start, _ in segments] + [cfg.snapshots]
    obs_parts, truth_parts = [], []
    inc_by_segment = []
    for (start, sources), end in zip(segments, bounds[1:]):
        count = end - start
        if count <= 0:
            continue
        batch = generate_snapshots(sources, sv_source, cfg.noise_power, count, data_rng)
        obs_parts.append(batch.observations)
        truth_parts.append(batch.true_steering if batch.true_steering.ndim == 2
                           else np.repeat(batch.true_steering[:, None], count, axis=1))
        inc_by_segment.append((start, end,
                               _interference_covariance(sources, cfg.sensors,
                                                        cfg.noise_power)))

    observations = np.concatenate(obs_parts, axis=1)
    truth = np.concatenate(truth_parts, axis=1)
    batch = SnapshotBatch(observations=observations, true_steering=truth,
                          noise_power=cfg.noise_power)

    inc = [None] * cfg.snapshots
    for start, end, r in inc_by_segment:
        for i in range(start, end):
            inc[i] = r

    theta0 = init_rng.uniform(cfg.desired_doa_deg - cfg.sector_halfwidth_deg,
                              cfg.desired_doa_deg + cfg.sector_halfwidth_deg)
    a_init = make_steering(cfg.sensors, theta0)
    return batch, inc, a_init, cfg.desired_power(snr_db)


def run_trial(cfg: ScenarioConfig, trial_index: int, snr_db: float | None = None,
              snr_index: int = 0) -> TrialRecord:
    """Run every configured algorithm over one seeded trial."""
    if snr_db is None:
        snr_db = cfg.snr_points()[0]
    batch, inc, a_init, p_des = simulate_trial_data(cfg, snr_db, snr_index,
                                                    trial_index)
    n = cfg.snapshots
    sinr = {spec.name: np.full(n, np.nan) for spec in cfg.algorithms}
    mse = {spec.name: np.full(n, np.nan) for spec in cfg.algorithms}
    failed = {spec.name: False for spec in cfg.algorithms}

    a_nominal = make_steering(cfg.sensors, cfg.desired_doa_deg)
    for spec in cfg.algorithms:
        bf = build_beamformer(spec, a_init=a_init, num_sources=cfg.num_sources,
                              noise_power=cfg.noise_power, a_nominal=a_nominal)
        try:
            with np.errstate(over="raise", invalid="raise"):
                for i in range(n):
                    x = batch.observations[:, i]
                    a_true = batch.steering_at(i)
                    if bf is None:
                        w = optimal_weights(a_true, inc[i])
                        a_est = a_true
                    else:
                        w = bf.process(x)
                        a_est = bf.a_hat
                    sinr[spec.name][i] = output_sinr(w, p_des, a_true, inc[i])
                    mse[spec.name][i] = steering_mse(a_est, a_true)
        except (NumericError, np.linalg.LinAlgError, FloatingPointError,
                ZeroDivisionError):
            failed[spec.name] = True

    return TrialRecord(trial_index=trial_index, snr_db=snr_db, sinr_db=sinr,
                       steering_mse=mse, failed=failed)


def _trial_job(args):
    cfg, trial, snr_db, snr_index = args
    return run_trial(cfg, trial, snr_db, snr_index)


def _collect_trials(cfg: ScenarioConfig, snr_db: float, snr_index: int,
                    workers: int) -> list:
    jobs = [(cfg, t, snr_db, snr_index) for t in range(cfg.trials)]
    if workers <= 1 or cfg.trials == 1:
        return [_trial_job(j) for j in jobs]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial_job, jobs, chunksize=max(1, cfg.trials // (4 * workers))))


def run_experiment(cfg: ScenarioConfig, workers: int = 1) -> AggregateResult:
    """Average `cfg.trials` independent trials per scenario point.

    Snapshot studies (scalar SNR) average the SINR trace in the dB domain per
    snapshot; SNR sweeps reduce each trial to its steady-state mean (last
    ``STEADY_WINDOW`` snapshots) before averaging across trials.
    """
    names = [spec.name for spec in cfg.algorithms]
    window = min(STEADY_WINDOW, cfg.snapshots)

    if not cfg.is_sweep:
        records = _collect_trials(cfg, cfg.snr_points()[0], 0, workers)
        x_values = list(range(1, cfg.snapshots + 1))
        mean_sinr, mean_mse, contributing, failures = {}, {}, {}, {}
        for name in names:
            good = [r for r in records if not r.failed[name]]
            failures[name] = cfg.trials - len(good)
            contributing[name] = len(good)
            if not good:
                raise ExperimentError(f"all trials failed for algorithm {name!r}")
            mean_sinr[name] = np.mean([r.sinr_db[name] for r in good], axis=0)
            mean_mse[name] = np.mean([r.steering_mse[name] for r in good], axis=0)
        return AggregateResult("snapshot", x_values, mean_sinr, mean_mse,
                               contributing, failures, cfg.trials)

    x_values = cfg.snr_points()
    mean_sinr = {name: np.empty(len(x_values)) for name in names}
    mean_mse = {name: np.empty(len(x_values)) for name in names}
    contributing = {name: [] for name in names}
    failures = {name: 0 for name in names}
    for j, snr_db in enumerate(x_values):
        records = _collect_trials(cfg, snr_db, j, workers)
        for name in names:
            good = [r for r in records if not r.failed[name]]
            failures[name] += cfg.trials - len(good)
            contributing[name].append(len(good))
            if not good:
                raise ExperimentError(
                    f"all trials failed for algorithm {name!r} at SNR {snr_db} dB")
            mean_sinr[name][j] = np.mean([np.mean(r.sinr_db[name][-window:])
                                          for r in good])
            mean_mse[name][j] = np.mean([np.mean(r.steering_mse[name][-window:])
                                         for r in good])
    return AggregateResult("snr_db", x_values, mean_sinr, mean_mse,
                           contributing, failures, cfg.trials)


def write_csv(result: AggregateResult, path) -> None:
    """Persist the aggregate, one row per (algorithm, x point).

    Floats are serialized with ``repr`` (shortest round-trip form) and rows
    are ordered by algorithm name then x, so identical experiments produce
    byte-identical files.
    """
    lines = ["algorithm,x_kind,x_value,mean_sinr_db,mean_steering_mse,trials"]
    for name in sorted(result.mean_sinr_db):
        for j, x in enumerate(result.x_values):
            x_text = str(x) if result.x_kind == "snapshot" else repr(float(x))
            count = result.contributing[name]
            count_j = count[j] if isinstance(count, list) else count
            lines.append(",".join([
                name, result.x_kind, x_text,
                repr(float(result.mean_sinr_db[name][j])),
                repr(float(result.mean_steering_mse[name][j])),
                str(count_j),
            ]))
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
