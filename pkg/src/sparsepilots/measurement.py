"""Partial DFT measurement matrices and the linear algebra behind estimation.

Selecting the pilot rows of the N-point DFT matrix yields a wide matrix
whose action on a sparse impulse response produces the observed pilot
frequency response.  Its rows are mutually orthogonal with squared norm N,
so the pseudo-inverse collapses to a scaled adjoint and the induced
"distorting" operator (scaled Gram of the columns) is an orthogonal
projection onto the row space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyPattern, IndexOutOfRange, RankDeficient
from .pilot_alloc import PilotPattern

__all__ = [
    "MeasurementModel",
    "build_partial_dft",
    "distorting_matrix",
    "min_norm_estimate",
    "least_squares_on_support",
]

# Conditioning guard for support-restricted normal equations.
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class MeasurementModel:
    """An n_pilots x n partial DFT matrix tied to the pattern that built it.

    Entry (r, c) is exp(-2j*pi*P_r*c/n) for the r-th pilot index P_r; every
    entry has unit modulus.
    """

    n: int
    pattern: PilotPattern
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def n_pilots(self) -> int:
        return self.pattern.n_pilots


def build_partial_dft(n: int, pattern: PilotPattern) -> MeasurementModel:
    """Build the DFT submatrix whose rows correspond to the pilot indices."""
    indices = np.asarray(pattern.indices)
    if indices.size == 0:
        raise EmptyPattern("cannot build a measurement matrix from an empty pattern")
    if indices.min() < 0 or indices.max() >= n:
        raise IndexOutOfRange(f"pilot indices must lie in [0, {n})")
    matrix = np.exp(-2j * np.pi / n * np.outer(indices, np.arange(n)))
    return MeasurementModel(n=n, pattern=pattern, matrix=matrix)


def distorting_matrix(model: MeasurementModel) -> np.ndarray:
    """The n x n operator (1/n) F^H F mapping a CIR to its back projection.

    Diagonal entries equal n_pilots/n; the matrix is idempotent because the
    pilot rows are orthogonal with squared norm n.
    """
    return model.matrix.conj().T @ model.matrix / model.n


def min_norm_estimate(model: MeasurementModel, observed: np.ndarray) -> np.ndarray:
    """Minimum-norm solution (1/n) F^H y of the underdetermined system."""
    observed = np.asarray(observed)
    if observed.shape != (model.n_pilots,):
        raise DimensionMismatch(
            f"observed vector has shape {observed.shape}, expected ({model.n_pilots},)"
        )
    return model.matrix.conj().T @ observed / model.n


def least_squares_on_support(model: MeasurementModel, observed: np.ndarray, support) -> np.ndarray:
    """Least-squares fit of the observation on a restricted column support.

    Returns a length-n vector that is zero off the support.  Solved via the
    normal equations, adequate while the support stays much smaller than the
    pilot count; raises RankDeficient when the restricted Gram matrix has a
    condition estimate above 1e12.
    """
    observed = np.asarray(observed, dtype=complex)
    if observed.shape != (model.n_pilots,):
        raise DimensionMismatch(
            f"observed vector has shape {observed.shape}, expected ({model.n_pilots},)"
        )
    support = np.sort(np.asarray(list(support), dtype=int))
    out = np.zeros(model.n, dtype=complex)
    if support.size == 0:
        return out
    if support.min() < 0 or support.max() >= model.n:
        raise IndexOutOfRange(f"support indices must lie in [0, {model.n})")
    cols = model.matrix[:, support]
    gram = cols.conj().T @ cols
    if not np.isfinite(gram).all() or np.linalg.cond(gram) > _COND_LIMIT:
        raise RankDeficient(f"support {support.tolist()} gives a near-singular normal matrix")
    out[support] = np.linalg.solve(gram, cols.conj().T @ observed)
    return out
