"""Error metrics: per-trial MSE, the Cramér-Rao bound for support-aware
least squares, exact-recovery classification, and bit/symbol error counts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel_model import SparseChannel
from .errors import DimensionMismatch, RankDeficient
from .estimators import EstimateReport
from .measurement import MeasurementModel

__all__ = [
    "TrialOutcome",
    "ErrorCounts",
    "crb",
    "cir_mse",
    "is_exact_recovery",
    "error_counters",
]

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class TrialOutcome:
    """Per-trial results feeding the Monte-Carlo aggregates."""

    mse: float
    exact: bool
    bit_errors: int
    symbol_errors: int
    bits_total: int
    symbols_total: int


class ErrorCounts(NamedTuple):
    symbol_errors: int
    bit_errors: int
    symbols_total: int
    bits_total: int


def crb(sigma_sq: float, model: MeasurementModel, support) -> float:
    """Cramér-Rao bound sigma^2 * trace((A^H A)^-1) on the support columns.

    A is the measurement matrix restricted to the true tap locations; the
    bound is the MSE floor of any unbiased estimator that knows the support.
    """
    if sigma_sq < 0:
        raise ValueError("sigma_sq must be >= 0")
    support = np.asarray(list(support), dtype=int)
    if support.size == 0:
        return 0.0
    cols = model.matrix[:, support]
    gram = cols.conj().T @ cols
    if np.linalg.cond(gram) > _COND_LIMIT:
        raise RankDeficient(f"support {support.tolist()} gives linearly dependent columns")
    return float(sigma_sq * np.trace(np.linalg.inv(gram)).real)


def cir_mse(estimate: np.ndarray, truth: np.ndarray) -> float:
    """Mean squared error (1/n) sum |estimate - truth|^2 over all entries."""
    estimate = np.asarray(estimate)
    truth = np.asarray(truth)
    if estimate.shape != truth.shape:
        raise DimensionMismatch("estimate and truth must have equal length")
    return float(np.mean(np.abs(estimate - truth) ** 2))


def is_exact_recovery(estimate: EstimateReport, truth: SparseChannel, tol: float = 1e-6) -> bool:
    """True when the supports match and gains agree within tol * ||h||_inf."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if set(estimate.support) != set(int(d) for d in truth.delays):
        return False
    truth_cir = truth.to_cir()
    peak = float(np.max(np.abs(truth_cir)))
    return float(np.max(np.abs(estimate.cir - truth_cir))) <= tol * peak


def error_counters(decided_symbols, sent_symbols, bits_per_symbol: int) -> ErrorCounts:
    """Count symbol errors and the Hamming distance of the bit labels.

    Symbols are integer bit labels in [0, 2**bits_per_symbol); the bit-error
    count is the number of differing bits between decided and sent labels.
    """
    decided = np.asarray(decided_symbols, dtype=int)
    sent = np.asarray(sent_symbols, dtype=int)
    if decided.shape != sent.shape:
        raise DimensionMismatch("decided and sent symbol sequences must have equal length")
    diff = np.bitwise_xor(decided, sent)
    symbol_errors = int(np.count_nonzero(diff))
    bit_errors = sum(int(v).bit_count() for v in diff[diff != 0])
    return ErrorCounts(
        symbol_errors=symbol_errors,
        bit_errors=bit_errors,
        symbols_total=int(decided.size),
        bits_total=int(decided.size) * bits_per_symbol,
    )
