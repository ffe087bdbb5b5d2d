"""Reference beamformers, SINR metrics, steering-error bounds, flop models.

Everything here is closed-form: the sample-matrix-inversion baselines, the
oracle SINR used to judge every algorithm, the analytic bounds on the
steering-estimate mean squared error as a function of the presumed angular
sector, and per-snapshot flop counts for the algorithm family and the usual
competitors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericError, ParameterError

SINR_FLOOR_DB = -200.0


def smi_weights(R_hat: np.ndarray, a_nominal: np.ndarray) -> np.ndarray:
    """Sample-matrix-inversion beamformer ``R^-1 a / (a^H R^-1 a)``."""
    try:
        z = scipy.linalg.solve(R_hat, a_nominal, assume_a="her")
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericError("sample covariance is singular") from exc
    if not np.isfinite(z).all():
        raise NumericError("sample covariance solve produced non-finite weights")
    return z / np.vdot(a_nominal, z)


def loaded_smi_weights(R_hat: np.ndarray, a_nominal: np.ndarray,
                       loading: float) -> np.ndarray:
    """SMI weights from the diagonally loaded covariance ``R + loading I``."""
    if loading < 0:
        raise ParameterError("loading must be >= 0")
    return smi_weights(R_hat + loading * np.eye(R_hat.shape[0]), a_nominal)


def optimal_weights(a_true: np.ndarray, R_in_true: np.ndarray) -> np.ndarray:
    """Clairvoyant MVDR weights from the true interference-plus-noise matrix."""
    try:
        factor = scipy.linalg.cho_factor(R_in_true, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NumericError("true INC matrix is not positive definite") from exc
    z = scipy.linalg.cho_solve(factor, a_true)
    return z / np.vdot(a_true, z)


def optimal_sinr(sigma1_sq: float, a_true: np.ndarray, R_in_true: np.ndarray) -> float:
    """Attainable SINR ``10 log10(sigma1^2 a^H R_in^-1 a)`` in dB."""
    try:
        factor = scipy.linalg.cho_factor(R_in_true, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NumericError("true INC matrix is not positive definite") from exc
    quad = np.vdot(a_true, scipy.linalg.cho_solve(factor, a_true)).real
    return 10.0 * math.log10(sigma1_sq * quad)


def output_sinr(w: np.ndarray, sigma1_sq: float, a_true: np.ndarray,
                R_in_true: np.ndarray) -> float:
    """Realized SINR of the weights against the true scenario, in dB.

    Evaluates ``sigma1^2 |w^H a|^2 / (w^H R_in w)``; a fully nulled desired
    signal reports the floor value instead of -inf, and a zero denominator
    (only possible for a degenerate noise-free scenario) reports +inf.
    """
    if not np.any(w):
        raise ParameterError("weights must be nonzero")
    num = sigma1_sq * abs(np.vdot(w, a_true)) ** 2
    den = np.vdot(w, R_in_true @ w).real
    if den <= 0:
        return math.inf if num > 0 else SINR_FLOOR_DB
    if num <= 0:
        return SINR_FLOOR_DB
    return max(SINR_FLOOR_DB, 10.0 * math.log10(num / den))


def steering_mse(a_hat: np.ndarray, a_true: np.ndarray) -> float:
    """Squared error between the estimate and the true steering vector.

    The estimate is rescaled to the true vector's norm first, matching the
    fixed-norm premise of the analytic bounds.
    """
    scale = np.linalg.norm(a_true) / np.linalg.norm(a_hat)
    return float(np.linalg.norm(a_hat * scale - a_true) ** 2)


@dataclass(frozen=True)
class MseBounds:
    lower: float
    upper: float
    method: str


def _check_sector(theta_rad: float):
    if not 0.0 < theta_rad < math.pi / 4:
        raise ParameterError(
            f"sector half-angle must lie in (0, pi/4) rad, got {theta_rad}")


def _one_minus_sinc(t: float) -> float:
    """``1 - sin(t)/t`` without the cancellation that direct evaluation hits.

    For small ``t`` the direct form subtracts two nearly equal numbers and
    amplifies rounding by ~1/t^2; the alternating series converges fast on
    the sector range and keeps the result accurate to machine precision.
    """
    if abs(t) > 0.5:
        return 1.0 - math.sin(t) / t
    t2 = t * t
    term = t2 / 6.0
    total = term
    k = 1
    while True:
        # next factor: -t^2 / ((2k+2)(2k+3))
        term *= -t2 / ((2 * k + 2) * (2 * k + 3))
        if abs(term) < 1e-20 * abs(total):
            return total
        total += term
        k += 1


def _x_minus_sin(x: float) -> float:
    """``x - sin(x)``, series-evaluated for small ``x`` (same rationale)."""
    if abs(x) > 0.5:
        return x - math.sin(x)
    x2 = x * x
    term = x * x2 / 6.0
    total = term
    k = 1
    while True:
        term *= -x2 / ((2 * k + 2) * (2 * k + 3))
        if abs(term) < 1e-20 * abs(total):
            return total
        total += term
        k += 1


def mse_bounds(theta_rad: float, a_norm_sq: float, method: str = "okspme") -> MseBounds:
    """Closed-form bounds on the steering-estimate MSE.

    ``theta_rad`` is half the presumed angular sector, in radians.  The shared
    term ``2 - 2 sin(t)/t`` is the mean squared initial-guess error; the
    method-specific terms bound the accumulated update error: the
    sequential-quadratic-programming estimator walks outside the sector arc
    (tangent geometry) while the Krylov-projection estimator stays inside it
    (chord/arc geometry), which makes its bounds strictly smaller.
    """
    _check_sector(theta_rad)
    if a_norm_sq <= 0:
        raise ParameterError("a_norm_sq must be > 0")
    t = theta_rad
    base = 2.0 * _one_minus_sinc(t)
    if method == "sqp":
        lower = base + t**2 / 4.0
        upper = base + (math.tan(2 * t) - 2 * t) ** 2 / 4.0 + math.tan(t) ** 2
    elif method == "okspme":
        lower = base + math.sin(t / 2.0) ** 2
        upper = base + _x_minus_sin(2 * t) ** 2 / 4.0 + t**2
    else:
        raise ParameterError(f"unknown bound method {method!r}")
    return MseBounds(lower=lower * a_norm_sq, upper=upper * a_norm_sq, method=method)


def epsilon_moments(theta_rad: float, a_norm: float) -> tuple[float, float, float]:
    """Moments of the initial-guess error norm over a centered sector.

    The guess direction sits at a uniform arc offset ``tau in [0, theta]``
    from the truth, so the error norm is the chord ``2 ||a|| sin(tau/2)``.
    Returns ``(mean, variance, mean_square)`` of that chord length.
    """
    _check_sector(theta_rad)
    if a_norm <= 0:
        raise ParameterError("a_norm must be > 0")
    t = theta_rad
    mean = 8.0 * a_norm * math.sin(t / 4.0) ** 2 / t
    mean_square = 2.0 * a_norm**2 * _one_minus_sinc(t)
    variance = mean_square - mean**2
    return mean, variance, mean_square


# Flop models: per-snapshot adds+multiplies as polynomials in the sensor
# count M, the subspace order m and the inner-iteration count n.
FLOP_ALGORITHMS = (
    "locsme", "rcb", "sqp", "locme", "lcwc",
    "okspme", "okspme-sg", "okspme-ccg", "okspme-mcg",
)


@dataclass(frozen=True)
class FlopModel:
    algorithm: str
    m_sensors: int
    order: int | None = None     # Krylov subspace order m
    inner: int | None = None     # inner iterations n

    def __post_init__(self):
        if self.algorithm not in FLOP_ALGORITHMS:
            raise ParameterError(f"unknown algorithm {self.algorithm!r}")
        if self.m_sensors < 2:
            raise ParameterError("m_sensors must be >= 2")


def flops(model: FlopModel) -> int:
    """Evaluate the per-snapshot flop count of ``model``.

    The sequential-quadratic-programming row is an asymptotic O(M^3.5) label,
    evaluated as ``round(M^3.5)``.
    """
    M = model.m_sensors
    m, n = model.order, model.inner

    def need_order():
        if m is None:
            raise ParameterError(f"{model.algorithm} needs the subspace order m")
        return m

    def need_inner():
        if n is None:
            raise ParameterError(f"{model.algorithm} needs the inner-iteration count n")
        return n

    if model.algorithm == "locsme":
        return 4 * M**3 + 3 * M**2 + 20 * M
    if model.algorithm == "rcb":
        return 2 * M**3 + 11 * M**2
    if model.algorithm == "sqp":
        return round(M**3.5)
    if model.algorithm == "locme":
        return 2 * M**3 + 4 * M**2 + 5 * M
    if model.algorithm == "lcwc":
        k = need_inner()
        return 2 * k * M**2 + 7 * k * M
    if model.algorithm == "okspme":
        k = need_order()
        return M**3 + (4 * k + 11) * M**2 + (3 * k**2 + 5 * k + 20) * M
    if model.algorithm == "okspme-sg":
        k = need_order()
        return (4 * k + 7) * M**2 + (3 * k**2 + 5 * k + 33) * M
    if model.algorithm == "okspme-ccg":
        k, j = need_order(), need_inner()
        return (4 * k + 8 * j + 8) * M**2 + (3 * k**2 + 5 * k + 33 * j + 29) * M
    # okspme-mcg
    k = need_order()
    return (4 * k + 14) * M**2 + (3 * k**2 + 5 * k + 86) * M
