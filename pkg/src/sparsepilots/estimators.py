"""Channel estimators: LS pilot division + linear interpolation, orthogonal
matching pursuit, iterative adaptive thresholding, and the oracle LS fit.

All estimators map the observed pilot frequency response to a full-length
channel estimate.  The sparse estimators return an :class:`EstimateReport`
with the recovered impulse response and its support; the interpolation
baseline works directly in the frequency domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidCount, RankDeficient, ZeroPilotSymbol
from .measurement import MeasurementModel, least_squares_on_support, min_norm_estimate
from .pilot_alloc import PilotPattern

__all__ = [
    "OmpConfig",
    "ImatConfig",
    "EstimateReport",
    "estimate_pilot_cfr",
    "interpolate_linear",
    "omp_estimate",
    "imat_estimate",
    "oracle_estimate",
]


@dataclass(frozen=True)
class OmpConfig:
    """Stopping rules for orthogonal matching pursuit."""

    max_taps: int
    residual_tol: float = 1e-6

    def __post_init__(self):
        if self.max_taps < 1:
            raise InvalidCount("max_taps must be >= 1")
        if self.residual_tol < 0:
            raise ValueError("residual_tol must be >= 0")


@dataclass(frozen=True)
class ImatConfig:
    """Parameters of the iterative adaptive-thresholding estimator.

    The iteration relaxes the back-projected residual with weight
    ``relaxation`` and hard-thresholds at ``threshold_scale * exp(-
    threshold_decay * k)`` after the k-th step.  With ``relative_threshold``
    the scale multiplies the peak magnitude of the initial estimate, which
    makes the schedule invariant to the channel gain; otherwise it is an
    absolute amplitude.

    A nonzero ``noise_floor_factor`` clamps the decaying threshold from
    below at that multiple of the median magnitude of the current update,
    keeping it out of the bulk of the residual.  The clamp helps at very
    low SNR but sits at tap scale when only a few taps dominate the
    cross-talk, so it is off by default.

    ``debias`` re-fits the values on the terminal support by least squares,
    dropping taps whose refit coefficient falls below ``prune_sigmas``
    standard errors of the residual-estimated noise.
    """

    relaxation: float = 1.5
    threshold_decay: float = 0.02
    threshold_scale: float = 2.0
    max_iters: int = 175
    relative_threshold: bool = True
    noise_floor_factor: float = 0.0
    debias: bool = True
    prune_sigmas: float = 4.0

    def __post_init__(self):
        if not 0 < self.relaxation < 2:
            raise ValueError("relaxation must lie in (0, 2)")
        if self.threshold_decay <= 0 or self.threshold_scale <= 0:
            raise ValueError("threshold decay and scale must be positive")
        if self.noise_floor_factor < 0:
            raise ValueError("noise_floor_factor must be >= 0")
        if self.prune_sigmas < 0:
            raise ValueError("prune_sigmas must be >= 0")
        if self.max_iters < 1:
            raise InvalidCount("max_iters must be >= 1")


@dataclass(frozen=True)
class EstimateReport:
    """A recovered impulse response, its support, and the iterations spent."""

    cir: np.ndarray
    support: tuple[int, ...]
    iterations_used: int

    def __post_init__(self):
        self.cir.setflags(write=False)


def _report(cir: np.ndarray, iterations: int) -> EstimateReport:
    support = tuple(int(i) for i in np.flatnonzero(cir))
    return EstimateReport(cir=cir, support=support, iterations_used=iterations)


def estimate_pilot_cfr(received: np.ndarray, sent_pilots: np.ndarray) -> np.ndarray:
    """LS estimate of the frequency response at pilots: elementwise Y/X."""
    received = np.asarray(received, dtype=complex)
    sent_pilots = np.asarray(sent_pilots, dtype=complex)
    if received.shape != sent_pilots.shape:
        raise DimensionMismatch("received and sent pilot vectors must have equal length")
    if np.any(sent_pilots == 0):
        raise ZeroPilotSymbol("pilot symbols must be nonzero")
    return received / sent_pilots


def interpolate_linear(pilot_cfr: np.ndarray, pattern: PilotPattern) -> np.ndarray:
    """Linearly interpolate the pilot frequency response to all subcarriers.

    Real and imaginary parts are interpolated independently between
    cyclically adjacent pilots, wrapping across the band edge.
    """
    values = np.asarray(pilot_cfr, dtype=complex)
    pilots = np.asarray(pattern.indices, dtype=float)
    if values.shape != pilots.shape:
        raise DimensionMismatch("pilot_cfr length must match the pattern size")
    n = pattern.n
    xp = np.concatenate(([pilots[-1] - n], pilots, [pilots[0] + n]))
    fp = np.concatenate(([values[-1]], values, [values[0]]))
    grid = np.arange(n)
    return np.interp(grid, xp, fp.real) + 1j * np.interp(grid, xp, fp.imag)


def omp_estimate(model: MeasurementModel, observed: np.ndarray, config: OmpConfig) -> EstimateReport:
    """Orthogonal matching pursuit over the partial DFT columns.

    Repeatedly selects the column most correlated with the residual,
    re-fits by least squares on the accumulated support, and stops when the
    support reaches ``max_taps`` or the relative residual drops below
    ``residual_tol``.
    """
    observed = np.asarray(observed, dtype=complex)
    if observed.shape != (model.n_pilots,):
        raise DimensionMismatch(
            f"observed vector has shape {observed.shape}, expected ({model.n_pilots},)"
        )
    if config.max_taps > model.n_pilots:
        raise InvalidCount(f"max_taps={config.max_taps} exceeds the pilot count {model.n_pilots}")
    norm_y = float(np.linalg.norm(observed))
    estimate = np.zeros(model.n, dtype=complex)
    if norm_y == 0.0:
        return _report(estimate, 0)
    residual = observed
    support: list[int] = []
    while len(support) < config.max_taps:
        correlations = model.matrix.conj().T @ residual
        support.append(int(np.argmax(np.abs(correlations))))
        estimate = least_squares_on_support(model, observed, support)
        residual = observed - model.matrix @ estimate
        if np.linalg.norm(residual) / norm_y < config.residual_tol:
            break
    return _report(estimate, len(support))


def imat_estimate(model: MeasurementModel, observed: np.ndarray, config: ImatConfig) -> EstimateReport:
    """Iterative sparse recovery with an exponentially decaying hard threshold.

    Starts from the minimum-norm estimate, then alternates a relaxed
    fixed-point step toward consistency with the observation and a hard
    threshold that decays as exp(-threshold_decay * k), letting smaller taps
    through as the iterate sharpens.
    """
    initial = min_norm_estimate(model, observed)
    scale = config.threshold_scale
    if config.relative_threshold:
        scale *= float(np.max(np.abs(initial))) if initial.size else 0.0
    estimate = initial
    iterations = 0
    for k in range(1, config.max_iters + 1):
        # (1/n) F^H (F x) applied matrix-free instead of materializing the
        # n x n distorting operator.
        back_projected = model.matrix.conj().T @ (model.matrix @ estimate) / model.n
        raw = estimate + config.relaxation * (initial - back_projected)
        magnitudes = np.abs(raw)
        scheduled = scale * np.exp(-config.threshold_decay * k)
        floor = config.noise_floor_factor * float(np.median(magnitudes))
        previous = estimate
        estimate = np.where(magnitudes > max(scheduled, floor), raw, 0.0)
        iterations = k
        if scheduled <= floor and np.linalg.norm(estimate - previous) <= 1e-6 * (
            np.linalg.norm(estimate) + 1e-30
        ):
            break  # schedule exhausted below the bulk and the iterate settled
    if config.debias:
        estimate = _debias(model, observed, estimate, config.prune_sigmas)
    return _report(estimate, iterations)


def _debias(
    model: MeasurementModel,
    observed: np.ndarray,
    estimate: np.ndarray,
    prune_sigmas: float,
) -> np.ndarray:
    """Refit values on the terminal support, dropping insignificant taps.

    A tap whose refit coefficient is below ``prune_sigmas`` times its own
    standard error (from the residual-estimated noise level) carries no
    evidence and is removed before the final fit.
    """
    support = np.flatnonzero(estimate)
    if support.size == 0:
        return estimate
    if support.size > model.n_pilots:
        # An over-full terminal support cannot be solved; refit on the
        # strongest entries the pilot count can support.
        order = np.argsort(np.abs(estimate[support]))
        support = support[order[-model.n_pilots :]]
    try:
        fitted = least_squares_on_support(model, observed, support)
    except RankDeficient:
        return estimate  # keep the thresholded iterate
    if prune_sigmas > 0:
        cols = model.matrix[:, support]
        residual = observed - cols @ fitted[support]
        dof = max(model.n_pilots - support.size, 1)
        noise_var = float(np.linalg.norm(residual) ** 2) / dof
        coef_std = np.sqrt(noise_var * np.diag(np.linalg.inv(cols.conj().T @ cols)).real)
        keep = support[np.abs(fitted[support]) >= prune_sigmas * coef_std]
        if keep.size == 0:
            return np.zeros_like(estimate)
        if keep.size < support.size:
            try:
                fitted = least_squares_on_support(model, observed, keep)
            except RankDeficient:
                pass
    return fitted


def oracle_estimate(model: MeasurementModel, observed: np.ndarray, true_support) -> EstimateReport:
    """Least squares on the true support (the structural/oracle estimator)."""
    cir = least_squares_on_support(model, observed, true_support)
    return _report(cir, 0)
