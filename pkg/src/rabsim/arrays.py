"""Uniform linear array signal model.

Steering vectors for a half-wavelength ULA, the two local-scattering
mismatch models (coherent: one fixed composite vector per trial;
incoherent: a fresh random composite every snapshot), and the snapshot
generator that mixes sources and sensor noise.

Conventions: a plain steering vector has element ``k = exp(j*pi*k*sin(theta))``
and therefore Euclidean norm ``sqrt(M)``.  Angles at the API boundary are
degrees; radians appear only inside formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ParameterError

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class SourceConfig:
    """One narrowband plane-wave source: direction, linear power, role."""

    doa_deg: float
    power: float
    is_desired: bool = False

    def __post_init__(self):
        if self.power < 0:
            raise ParameterError(f"source power must be >= 0, got {self.power}")


@dataclass(frozen=True)
class ScatteringSpec:
    """Local scattering around the desired signal.

    ``kind`` is one of ``none | coherent | incoherent``.  Scattered-path
    angles are drawn uniformly on ``mean +- sqrt(3)*std``, the unique uniform
    law with the requested mean and standard deviation.
    """

    kind: str = "none"
    num_paths: int = 4
    angle_mean_deg: float = 10.0
    angle_std_deg: float = 2.0

    def __post_init__(self):
        if self.kind not in ("none", "coherent", "incoherent"):
            raise ParameterError(f"unknown scattering kind {self.kind!r}")
        if self.num_paths < 0:
            raise ParameterError("num_paths must be >= 0")
        if self.angle_std_deg < 0:
            raise ParameterError("angle_std_deg must be >= 0")


@dataclass
class SnapshotBatch:
    """Array observations plus the ground truth needed to score them.

    ``observations`` is M x count (one column per snapshot).
    ``true_steering`` is the realized desired-signal steering vector: a single
    M vector when it is snapshot-invariant, else an M x count matrix.
    """

    observations: np.ndarray
    true_steering: np.ndarray
    noise_power: float

    def steering_at(self, i: int) -> np.ndarray:
        if self.true_steering.ndim == 1:
            return self.true_steering
        return self.true_steering[:, i]


def make_steering(m_sensors: int, theta_deg: float) -> np.ndarray:
    """Steering vector of an M-element half-wavelength ULA toward ``theta_deg``."""
    if m_sensors < 2:
        raise ParameterError(f"need at least 2 sensors, got {m_sensors}")
    if not -90.0 <= theta_deg <= 90.0:
        raise ParameterError(f"DoA must lie in [-90, 90] degrees, got {theta_deg}")
    phase = math.pi * math.sin(math.radians(theta_deg))
    return np.exp(1j * phase * np.arange(m_sensors))


def scatter_angles(spec: ScatteringSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw the scattered-path DoAs for one trial (degrees)."""
    half_width = SQRT3 * spec.angle_std_deg
    lo = spec.angle_mean_deg - half_width
    hi = spec.angle_mean_deg + half_width
    return rng.uniform(lo, hi, size=spec.num_paths)


def make_coherent_mismatch(
    nominal: np.ndarray,
    spec: ScatteringSpec,
    rng: np.random.Generator,
    *,
    phases: Sequence[float] | None = None,
) -> np.ndarray:
    """Composite steering vector for time-invariant multipath.

    Returns ``p + sum_k exp(j*phi_k) b(theta_k)`` where ``p`` is the direct
    path (the nominal vector), path angles follow ``spec`` and path phases are
    uniform on [0, 2*pi].  One draw per trial; constant across snapshots.
    ``phases`` overrides the random phase draw (test hook).
    """
    if spec.kind != "coherent":
        raise ParameterError(f"spec.kind must be 'coherent', got {spec.kind!r}")
    m = nominal.shape[0]
    thetas = scatter_angles(spec, rng)
    if phases is None:
        phis = rng.uniform(0.0, 2.0 * math.pi, size=spec.num_paths)
    else:
        phis = np.asarray(phases, dtype=float)
        if phis.shape != (spec.num_paths,):
            raise ParameterError("phases must provide one phase per path")
    out = nominal.astype(complex, copy=True)
    for theta, phi in zip(thetas, phis):
        out += np.exp(1j * phi) * make_steering(m, theta)
    return out


def make_incoherent_mismatch_stream(
    nominal: np.ndarray,
    spec: ScatteringSpec,
    rng: np.random.Generator,
) -> Iterator[np.ndarray]:
    """Generator of per-snapshot steering vectors for time-varying multipath.

    Yields ``s_0(i) p + sum_k s_k(i) b(theta_k)`` with i.i.d. unit-variance
    circular complex Gaussian gains redrawn every snapshot.  Path angles are
    drawn once, when the generator is created.
    """
    if spec.kind != "incoherent":
        raise ParameterError(f"spec.kind must be 'incoherent', got {spec.kind!r}")
    m = nominal.shape[0]
    thetas = scatter_angles(spec, rng)
    paths = np.empty((spec.num_paths + 1, m), dtype=complex)
    paths[0] = nominal
    for k, theta in enumerate(thetas):
        paths[k + 1] = make_steering(m, theta)
    while True:
        z = rng.standard_normal((spec.num_paths + 1, 2))
        gains = (z[:, 0] + 1j * z[:, 1]) / math.sqrt(2.0)
        yield gains @ paths


def generate_snapshots(
    sources: Sequence[SourceConfig],
    desired_sv,
    noise_power: float,
    count: int,
    rng: np.random.Generator,
) -> SnapshotBatch:
    """Simulate ``count`` snapshots of ``x(i) = sum_k a_k s_k(i) + n(i)``.

    ``desired_sv`` is either a fixed M vector or an iterator yielding one per
    snapshot (incoherent scattering).  Source symbols are zero-mean circular
    complex Gaussian at the configured powers; sensor noise is circular
    complex Gaussian with per-element variance ``noise_power``.
    """
    if not sources:
        raise ParameterError("source list must not be empty")
    if count < 1:
        raise ParameterError("snapshot count must be >= 1")
    if noise_power < 0:
        raise ParameterError("noise power must be >= 0")
    desired = [s for s in sources if s.is_desired]
    if len(desired) != 1:
        raise ParameterError("exactly one source must be flagged is_desired")

    streaming = not isinstance(desired_sv, np.ndarray)
    interferers = [s for s in sources if not s.is_desired]
    if streaming:
        sv_iter = iter(desired_sv)
        first = np.asarray(next(sv_iter))
        m = first.shape[0]
    else:
        first = None
        m = desired_sv.shape[0]

    a_int = np.column_stack([make_steering(m, s.doa_deg) for s in interferers]) \
        if interferers else np.zeros((m, 0), dtype=complex)
    p_int = np.array([s.power for s in interferers], dtype=float)

    def draw_symbols(power: float, n: int) -> np.ndarray:
        z = rng.standard_normal((n, 2))
        return math.sqrt(power / 2.0) * (z[:, 0] + 1j * z[:, 1])

    obs = np.zeros((m, count), dtype=complex)
    # Desired-signal contribution; the realized steering is recorded as truth.
    s_des = draw_symbols(desired[0].power, count)
    if streaming:
        truth = np.empty((m, count), dtype=complex)
        truth[:, 0] = first
        for i in range(1, count):
            truth[:, i] = np.asarray(next(sv_iter))
        obs += truth * s_des[None, :]
    else:
        truth = np.asarray(desired_sv, dtype=complex)
        obs += np.outer(truth, s_des)

    for k in range(a_int.shape[1]):
        obs += np.outer(a_int[:, k], draw_symbols(p_int[k], count))

    if noise_power > 0:
        z = rng.standard_normal((m, count, 2))
        obs += math.sqrt(noise_power / 2.0) * (z[..., 0] + 1j * z[..., 1])

    return SnapshotBatch(observations=obs, true_steering=truth, noise_power=noise_power)
