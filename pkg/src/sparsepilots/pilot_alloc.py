"""Pilot subcarrier allocation for sparse OFDM channel estimation.

The quality of a pilot pattern is measured by the coherence of the partial
DFT matrix it induces: the maximum absolute cross-correlation between the
matrix columns.  Because DFT rows are complex exponentials, that inner
product depends only on the cyclic difference of the two column indices, so
everything here reduces to the multiset of cyclic differences of the pilot
indices.  Patterns whose nonzero differences all repeat equally often
(cyclic difference sets) attain the lower bound

    mu_tilde^2 >= n_p * (n - n_p) / (n - 1),

and are therefore optimal.  For (n, n_p) pairs without a known difference
set, :func:`greedy_allocate` searches stage by stage for a pattern whose
difference repetition counts are as flat as possible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    EmptyPattern,
    IndexOutOfRange,
    InvalidCount,
    NotDivisible,
    ParseError,
)

__all__ = [
    "PilotPattern",
    "DifferenceProfile",
    "CoherenceReport",
    "DifferenceSetCheck",
    "coherence",
    "difference_profile",
    "verify_difference_set",
    "greedy_allocate",
    "random_allocate",
    "equidistant_allocate",
    "cyclic_shift",
    "catalog_difference_set",
    "load_pattern",
    "save_pattern",
]


@dataclass(frozen=True)
class PilotPattern:
    """A set of pilot subcarrier indices out of ``n`` subcarriers.

    Indices are stored sorted and 0-based; the constructor accepts any
    order and validates range and distinctness.
    """

    n: int
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.indices))
        if not idx:
            raise EmptyPattern("a pilot pattern needs at least one index")
        if len(set(idx)) != len(idx):
            raise ValueError(f"duplicate pilot indices in {idx}")
        if idx[0] < 0 or idx[-1] >= self.n:
            raise IndexOutOfRange(f"pilot indices must lie in [0, {self.n})")
        object.__setattr__(self, "indices", idx)

    @property
    def n_pilots(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class DifferenceProfile:
    """Repetition counts of the cyclic differences of a pilot pattern.

    ``counts[d]`` is the number of ordered index pairs (k, l), k != l, whose
    difference equals d modulo n.  Entry 0 is always zero and is excluded
    from the variance; the remaining entries sum to n_p * (n_p - 1).
    """

    n: int
    counts: np.ndarray

    def __post_init__(self):
        self.counts.setflags(write=False)

    def variance(self) -> float:
        """Population variance of the counts over lags 1 .. n-1."""
        return float(self.counts[1:].var())


@dataclass(frozen=True)
class CoherenceReport:
    """Coherence of the partial DFT matrix induced by a pilot pattern.

    ``mu`` is the normalized coherence in [0, 1]; ``mu_tilde`` is
    n_p * mu, the un-normalized column correlation whose square is bounded
    below by ``bound_mu_tilde_sq`` = n_p(n - n_p)/(n - 1).
    """

    mu: float
    mu_tilde: float
    bound_mu_tilde_sq: float
    achieves_bound: bool
    argmax_lag: int


class DifferenceSetCheck(NamedTuple):
    is_difference_set: bool
    common_repetition: int | None


def coherence(pattern: PilotPattern) -> CoherenceReport:
    """Score a pilot pattern by the coherence of its partial DFT matrix.

    Evaluates max over lags r = 1 .. n-1 of |sum_i exp(-2j*pi*P_i*r/n)| by
    direct summation.  For a full pattern (n_p = n) every lag sums to zero
    and mu = 0.
    """
    n = pattern.n
    if n < 2:
        raise InvalidCount("coherence needs at least 2 subcarriers")
    idx = np.asarray(pattern.indices)
    n_p = idx.size
    lags = np.arange(1, n)
    sums = np.exp(-2j * np.pi / n * np.outer(idx, lags)).sum(axis=0)
    mags = np.abs(sums)
    best = int(np.argmax(mags))
    mu_tilde = float(mags[best])
    bound = n_p * (n - n_p) / (n - 1)
    achieves = abs(mu_tilde**2 - bound) <= 1e-9 * bound + 1e-12
    return CoherenceReport(
        mu=mu_tilde / n_p,
        mu_tilde=mu_tilde,
        bound_mu_tilde_sq=bound,
        achieves_bound=achieves,
        argmax_lag=int(lags[best]),
    )


def difference_profile(pattern: PilotPattern) -> DifferenceProfile:
    """Count how often each nonzero cyclic difference occurs in the pattern."""
    idx = np.asarray(pattern.indices)
    diffs = (idx[:, None] - idx[None, :]) % pattern.n
    counts = np.bincount(diffs.ravel(), minlength=pattern.n)
    counts[0] -= idx.size  # remove the k == l diagonal
    return DifferenceProfile(n=pattern.n, counts=counts)


def verify_difference_set(pattern: PilotPattern) -> DifferenceSetCheck:
    """Check whether every nonzero cyclic difference repeats equally often."""
    counts = difference_profile(pattern).counts[1:]
    if counts.size and (counts == counts[0]).all():
        return DifferenceSetCheck(True, int(counts[0]))
    return DifferenceSetCheck(False, None)


def greedy_allocate(n: int, n_p: int) -> PilotPattern:
    """Grow a pilot pattern one index at a time, flattening the differences.

    Starts from {0} (the absolute position is immaterial, only differences
    matter).  At each stage every unused index is tried, and the candidate
    whose difference repetition counts have the smallest population
    variance over all n-1 lags wins; ties go to the smallest index.  The
    result is deterministic.
    """
    if not 1 <= n_p <= n:
        raise InvalidCount(f"need 1 <= n_p <= n, got n_p={n_p}, n={n}")
    chosen = [0]
    used = np.zeros(n, dtype=bool)
    used[0] = True
    counts = np.zeros(n, dtype=np.int64)
    for _ in range(n_p - 1):
        base = np.asarray(chosen)
        # Minimizing the variance of the counts is equivalent to minimizing
        # the sum of squared counts (the mean is fixed at each stage), which
        # keeps candidate comparison in exact integer arithmetic.
        best_score = None
        best_index = -1
        for s in range(n):
            if used[s]:
                continue
            cand = counts.copy()
            np.add.at(cand, (s - base) % n, 1)
            np.add.at(cand, (base - s) % n, 1)
            score = int(np.dot(cand, cand))
            if best_score is None or score < best_score:
                best_score = score
                best_index = s
        used[best_index] = True
        np.add.at(counts, (best_index - base) % n, 1)
        np.add.at(counts, (base - best_index) % n, 1)
        chosen.append(best_index)
    return PilotPattern(n, tuple(chosen))


def random_allocate(n: int, n_p: int, seed) -> PilotPattern:
    """Sample n_p distinct pilot indices uniformly; deterministic per seed."""
    if not 1 <= n_p <= n:
        raise InvalidCount(f"need 1 <= n_p <= n, got n_p={n_p}, n={n}")
    rng = np.random.default_rng(seed)
    indices = rng.choice(n, size=n_p, replace=False)
    return PilotPattern(n, tuple(int(i) for i in indices))


def equidistant_allocate(n: int, n_p: int) -> PilotPattern:
    """Evenly spaced pilots {0, n/n_p, 2n/n_p, ...}; n_p must divide n."""
    if not 1 <= n_p <= n:
        raise InvalidCount(f"need 1 <= n_p <= n, got n_p={n_p}, n={n}")
    if n % n_p != 0:
        raise NotDivisible(f"{n_p} pilots do not divide {n} subcarriers evenly")
    step = n // n_p
    return PilotPattern(n, tuple(range(0, n, step)))


def cyclic_shift(pattern: PilotPattern, shift: int) -> PilotPattern:
    """Shift every index by ``shift`` modulo n; coherence is unchanged."""
    return PilotPattern(pattern.n, tuple((i + shift) % pattern.n for i in pattern.indices))


# Known cyclic difference sets beyond the quadratic-residue family, keyed by
# (n, n_p).  Each entry is verified on the way out of catalog_difference_set.
_CATALOG: dict[tuple[int, int], tuple[int, ...]] = {
    (13, 4): (0, 1, 3, 9),
    (15, 7): (0, 1, 2, 4, 5, 8, 10),
    (21, 5): (3, 6, 7, 12, 14),
    (31, 6): (1, 5, 11, 24, 25, 27),
    (57, 8): (0, 1, 3, 13, 32, 36, 43, 52),
    (73, 9): (1, 2, 4, 8, 16, 32, 37, 55, 64),
    (91, 10): (0, 1, 3, 9, 27, 49, 56, 61, 77, 81),
}


def _is_prime(m: int) -> bool:
    if m < 2:
        return False
    d = 2
    while d * d <= m:
        if m % d == 0:
            return False
        d += 1
    return True


def catalog_difference_set(n: int, n_p: int) -> PilotPattern | None:
    """A verified cyclic difference set for (n, n_p), or None if unknown.

    Covers the quadratic-residue construction (n prime, n = 3 mod 4,
    n_p = (n-1)/2), a small table of classical sets, trivial patterns, and
    complements of any of those.  Difference sets exist only for specific
    (n, n_p) pairs, so None is a normal outcome.
    """
    indices = _find_difference_set(n, n_p)
    if indices is None:
        return None
    pattern = PilotPattern(n, indices)
    check = verify_difference_set(pattern)
    if not check.is_difference_set:
        raise RuntimeError(f"catalog entry for ({n}, {n_p}) failed verification")
    return pattern


def _find_difference_set(n: int, n_p: int, try_complement: bool = True) -> tuple[int, ...] | None:
    if n < 1 or not 1 <= n_p <= n:
        return None
    if n_p == n:
        return tuple(range(n))
    if n_p == 1:
        return (0,)
    if (n, n_p) in _CATALOG:
        return _CATALOG[n, n_p]
    if 2 * n_p + 1 == n and n % 4 == 3 and _is_prime(n):
        return tuple(sorted({x * x % n for x in range(1, n)}))
    if try_complement:
        base = _find_difference_set(n, n - n_p, try_complement=False)
        if base is not None:
            return tuple(sorted(set(range(n)) - set(base)))
    return None


def save_pattern(pattern: PilotPattern, path) -> None:
    """Write a pattern as JSON: {"n": int, "indices": [int, ...]}."""
    with open(path, "w") as fh:
        json.dump({"n": pattern.n, "indices": list(pattern.indices)}, fh)
        fh.write("\n")


def load_pattern(path) -> PilotPattern:
    """Read a pattern from the JSON format written by :func:`save_pattern`."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
        return PilotPattern(int(raw["n"]), tuple(int(i) for i in raw["indices"]))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ParseError(f"malformed pattern file {path}: {exc}") from exc
