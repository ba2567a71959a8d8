"""End-to-end Monte-Carlo OFDM link and the three experiment drivers.

A frame draws random data symbols around the pilots, applies the sparse
channel multiplicatively in the frequency domain, adds AWGN, estimates the
channel with one of four estimators, equalizes, and hard-decides.  The
experiment drivers aggregate BER/SER/MSE over frames, compare pilot
allocation schemes against the Cramér-Rao bound, and measure noiseless
exact-recovery rates.

Every random draw comes from a generator seeded deterministically from
(seed, role, indices), so trials are independent, reruns are bit-identical,
and frames may be evaluated concurrently (set SPARSEPILOTS_THREADS) without
changing any result.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel_model import (
    FadingProfile,
    SparseChannel,
    add_noise,
    dvbh_profile,
    evolve_gains,
    random_sparse_channel,
)
from .errors import ConfigError, InvalidCount, NoDifferenceSet
from .estimators import (
    EstimateReport,
    ImatConfig,
    OmpConfig,
    estimate_pilot_cfr,
    imat_estimate,
    interpolate_linear,
    omp_estimate,
    oracle_estimate,
)
from .measurement import MeasurementModel, build_partial_dft
from .metrics import TrialOutcome, cir_mse, crb, error_counters, is_exact_recovery
from .pilot_alloc import (
    PilotPattern,
    catalog_difference_set,
    cyclic_shift,
    equidistant_allocate,
    greedy_allocate,
    load_pattern,
    random_allocate,
)

__all__ = [
    "Constellation",
    "CONSTELLATIONS",
    "LinkConfig",
    "FrameSignals",
    "ESTIMATORS",
    "resolve_pattern",
    "make_frame",
    "run_frame",
    "experiment_ber_ser",
    "experiment_mse_crb",
    "experiment_recovery",
    "BER_SER_HEADER",
    "MSE_CRB_HEADER",
    "RECOVERY_HEADER",
    "write_csv",
    "load_link_config",
]

PILOT_SYMBOL = 1.0 + 0.0j

ESTIMATORS = ("interp", "omp", "imat", "oracle")

PATTERN_SOURCES = ("catalog", "difference-set", "greedy", "random", "equidistant", "file")

BER_SER_HEADER = ("snr_db", "estimator", "ber", "ser", "mse")
MSE_CRB_HEADER = ("snr_db", "allocation", "estimator", "mse_db", "crb_db")
RECOVERY_HEADER = ("taps", "allocation", "recovery_rate", "trials")

# Substream roles keeping every random draw independent and reproducible.
_ROLE_CHANNEL = 1
_ROLE_FRAME = 2
_ROLE_PATTERN = 3


@dataclass(frozen=True)
class Constellation:
    """Gray-labeled constellation: ``points[label]`` is the symbol for that label."""

    name: str
    points: np.ndarray
    bits_per_symbol: int

    def __post_init__(self):
        self.points.setflags(write=False)

    @property
    def size(self) -> int:
        return self.points.size

    def modulate(self, labels: np.ndarray) -> np.ndarray:
        return self.points[labels]

    def demodulate(self, values: np.ndarray) -> np.ndarray:
        """Nearest constellation point, returned as bit labels."""
        distances = np.abs(np.asarray(values)[:, None] - self.points[None, :])
        return np.argmin(distances, axis=1)


def _gray_constellations() -> dict[str, Constellation]:
    # QPSK: one Gray bit per axis.
    qpsk = np.empty(4, dtype=complex)
    for label in range(4):
        qpsk[label] = ((1 - 2 * (label >> 1)) + 1j * (1 - 2 * (label & 1))) / np.sqrt(2.0)
    # 16-QAM: two Gray bits per axis, levels -3,-1,+1,+3 scaled to unit energy.
    gray2 = (0, 1, 3, 2)  # bit codes in level order
    level_of_code = {code: (-3 + 2 * pos) for pos, code in enumerate(gray2)}
    qam16 = np.empty(16, dtype=complex)
    for label in range(16):
        re = level_of_code[label >> 2]
        im = level_of_code[label & 3]
        qam16[label] = (re + 1j * im) / np.sqrt(10.0)
    return {
        "qpsk": Constellation("qpsk", qpsk, 2),
        "qam16": Constellation("qam16", qam16, 4),
    }


CONSTELLATIONS = _gray_constellations()


@dataclass(frozen=True)
class LinkConfig:
    """Parameters of the simulated OFDM link (defaults: DVB-H-like)."""

    n: int = 256
    n_p: int = 16
    cp_len: int = 32
    symbol_duration_us: float = 224.0
    constellation: str = "qam16"
    pattern_source: str = "greedy"
    pattern_file: str | None = None
    shift_per_frame: bool = False
    snr_grid_db: tuple[float, ...] = (10.0, 15.0, 20.0, 25.0, 30.0)
    frames: int = 200
    seed: int = 0

    @property
    def sample_period_us(self) -> float:
        return self.symbol_duration_us / self.n

    def validate(self) -> None:
        """Raise ConfigError listing every violated invariant."""
        problems = []
        if self.n < 2:
            problems.append(f"n must be >= 2, got {self.n}")
        if not 1 <= self.n_p < self.n:
            problems.append(f"need 1 <= n_p < n, got n_p={self.n_p}, n={self.n}")
        if not 0 <= self.cp_len < self.n:
            problems.append(f"need 0 <= cp_len < n, got cp_len={self.cp_len}")
        if self.symbol_duration_us <= 0:
            problems.append("symbol_duration_us must be positive")
        if self.constellation not in CONSTELLATIONS:
            problems.append(f"unknown constellation {self.constellation!r}")
        if self.pattern_source not in PATTERN_SOURCES:
            problems.append(f"unknown pattern_source {self.pattern_source!r}")
        if self.pattern_source == "file" and not self.pattern_file:
            problems.append("pattern_source 'file' requires pattern_file")
        if not self.snr_grid_db:
            problems.append("snr_grid_db must be nonempty")
        if self.frames < 1:
            problems.append(f"frames must be >= 1, got {self.frames}")
        if problems:
            raise ConfigError("invalid link config: " + "; ".join(problems))


@dataclass(frozen=True)
class FrameSignals:
    """One OFDM frame: sent symbols, channel response, noisy reception."""

    sent: np.ndarray
    cfr: np.ndarray
    received: np.ndarray
    frame_index: int
    sigma_sq: float
    data_labels: np.ndarray


def resolve_pattern(config: LinkConfig) -> PilotPattern:
    """Produce the base pilot pattern named by ``config.pattern_source``."""
    n, n_p = config.n, config.n_p
    source = config.pattern_source
    if source in ("catalog", "difference-set"):
        pattern = catalog_difference_set(n, n_p)
        if pattern is None:
            raise NoDifferenceSet(f"no cyclic difference set for this pair ({n}, {n_p})")
        return pattern
    if source == "greedy":
        return greedy_allocate(n, n_p)
    if source == "random":
        return random_allocate(n, n_p, config.seed)
    if source == "equidistant":
        return equidistant_allocate(n, n_p)
    if source == "file":
        pattern = load_pattern(config.pattern_file)
        if pattern.n != n:
            raise ConfigError(f"pattern file is for n={pattern.n}, config has n={n}")
        return pattern
    raise ConfigError(f"unknown pattern_source {source!r}")


def _data_indices(n: int, pattern: PilotPattern) -> np.ndarray:
    return np.setdiff1d(np.arange(n), np.asarray(pattern.indices))


def make_frame(
    config: LinkConfig,
    pattern: PilotPattern,
    channel: SparseChannel,
    snr_db: float,
    rng: np.random.Generator,
    frame_index: int = 0,
) -> FrameSignals:
    """Draw data symbols, apply the channel in frequency domain, add AWGN.

    The SNR reference power is the mean received power over the data
    subcarriers.
    """
    const = CONSTELLATIONS[config.constellation]
    data_idx = _data_indices(config.n, pattern)
    labels = rng.integers(0, const.size, size=data_idx.size)
    sent = np.full(config.n, PILOT_SYMBOL, dtype=complex)
    sent[data_idx] = const.modulate(labels)
    cfr = np.fft.fft(channel.to_cir())
    clean = sent * cfr
    power = float(np.mean(np.abs(clean[data_idx]) ** 2))
    received, sigma_sq = add_noise(clean, snr_db, rng, power=power)
    return FrameSignals(
        sent=sent,
        cfr=cfr,
        received=received,
        frame_index=frame_index,
        sigma_sq=sigma_sq,
        data_labels=labels,
    )


def _estimate_cir(
    estimator: str,
    model: MeasurementModel,
    pilot_cfr: np.ndarray,
    channel: SparseChannel,
    omp_config: OmpConfig,
    imat_config: ImatConfig,
) -> tuple[np.ndarray, EstimateReport | None]:
    if estimator == "interp":
        cfr_hat = interpolate_linear(pilot_cfr, model.pattern)
        return np.fft.ifft(cfr_hat), None
    if estimator == "omp":
        report = omp_estimate(model, pilot_cfr, omp_config)
    elif estimator == "imat":
        report = imat_estimate(model, pilot_cfr, imat_config)
    elif estimator == "oracle":
        report = oracle_estimate(model, pilot_cfr, channel.delays)
    else:
        raise ConfigError(f"unknown estimator {estimator!r}")
    return report.cir, report


def run_frame(
    config: LinkConfig,
    model: MeasurementModel,
    channel: SparseChannel,
    estimator: str,
    snr_db: float,
    rng: np.random.Generator,
    frame_index: int = 0,
    omp_config: OmpConfig | None = None,
    imat_config: ImatConfig | None = None,
) -> TrialOutcome:
    """Simulate one frame end to end and score it against the ground truth.

    By default OMP runs blind, like a real receiver: capped at half the
    pilot count and stopped when the residual reaches the known noise
    level (discrepancy principle).  Pass an explicit ``omp_config`` to pin
    the sparsity instead.
    """
    if imat_config is None:
        imat_config = ImatConfig()
    const = CONSTELLATIONS[config.constellation]
    pattern = model.pattern
    signals = make_frame(config, pattern, channel, snr_db, rng, frame_index)
    pilot_idx = np.asarray(pattern.indices)
    pilot_cfr = estimate_pilot_cfr(signals.received[pilot_idx], signals.sent[pilot_idx])
    if omp_config is None:
        noise_norm = np.sqrt(model.n_pilots * signals.sigma_sq)
        tol = max(float(noise_norm / max(np.linalg.norm(pilot_cfr), 1e-30)), 1e-12)
        omp_config = OmpConfig(max_taps=max(model.n_pilots // 2, 1), residual_tol=tol)
    cir_hat, report = _estimate_cir(estimator, model, pilot_cfr, channel, omp_config, imat_config)
    cfr_hat = np.fft.fft(cir_hat)
    data_idx = _data_indices(config.n, pattern)
    gains = cfr_hat[data_idx]
    gains = np.where(np.abs(gains) < 1e-12, 1e-12, gains)
    decided = const.demodulate(signals.received[data_idx] / gains)
    counts = error_counters(decided, signals.data_labels, const.bits_per_symbol)
    exact = report is not None and is_exact_recovery(report, channel)
    return TrialOutcome(
        mse=cir_mse(cir_hat, channel.to_cir()),
        exact=exact,
        bit_errors=counts.bit_errors,
        symbol_errors=counts.symbol_errors,
        bits_total=counts.bits_total,
        symbols_total=counts.symbols_total,
    )


def _pool_size() -> int:
    return max(1, int(os.environ.get("SPARSEPILOTS_THREADS", "1")))


def _map_indexed(fn, count: int) -> list:
    """Apply fn to 0..count-1, optionally on a thread pool, preserving order."""
    workers = _pool_size()
    if workers == 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


class _ModelCache:
    """Measurement models for cyclic shifts of a base pattern."""

    def __init__(self, base: PilotPattern):
        self.base = base
        self._models: dict[int, MeasurementModel] = {}

    def for_shift(self, shift: int) -> MeasurementModel:
        shift %= self.base.n
        if shift not in self._models:
            self._models[shift] = build_partial_dft(self.base.n, cyclic_shift(self.base, shift))
        return self._models[shift]


def experiment_ber_ser(
    config: LinkConfig,
    profile: FadingProfile | None = None,
    omp_config: OmpConfig | None = None,
    imat_config: ImatConfig | None = None,
) -> list[tuple]:
    """BER/SER/MSE of all four estimators over a fading-channel trajectory.

    The channel evolves frame to frame at the profile's normalized Doppler;
    every estimator sees the same frames (same data, channel, and noise) at
    each SNR, so the comparison is paired.  Returns rows matching
    BER_SER_HEADER.
    """
    config.validate()
    if profile is None:
        profile = dvbh_profile(config.sample_period_us)
    base = resolve_pattern(config)
    models = _ModelCache(base)
    channel_rng = np.random.default_rng([config.seed, _ROLE_CHANNEL])
    channels: list[SparseChannel] = []
    state: SparseChannel | None = None
    for _ in range(config.frames):
        state = evolve_gains(state, profile, channel_rng, n=config.n)
        channels.append(state)

    rows = []
    for snr_index, snr_db in enumerate(config.snr_grid_db):
        for estimator in ESTIMATORS:

            def one_frame(f: int) -> TrialOutcome:
                rng = np.random.default_rng([config.seed, _ROLE_FRAME, snr_index, f])
                model = models.for_shift(f if config.shift_per_frame else 0)
                return run_frame(
                    config, model, channels[f], estimator, snr_db, rng,
                    frame_index=f, omp_config=omp_config, imat_config=imat_config,
                )

            outcomes = _map_indexed(one_frame, config.frames)
            bits = sum(o.bits_total for o in outcomes)
            symbols = sum(o.symbols_total for o in outcomes)
            rows.append((
                snr_db,
                estimator,
                sum(o.bit_errors for o in outcomes) / bits,
                sum(o.symbol_errors for o in outcomes) / symbols,
                float(np.mean([o.mse for o in outcomes])),
            ))
    return rows


def _allocation_model(
    allocation: str,
    cache: _ModelCache | None,
    n: int,
    n_p: int,
    seed: int,
    trial: int,
) -> MeasurementModel:
    if allocation == "random":
        pattern = random_allocate(n, n_p, np.random.default_rng([seed, _ROLE_PATTERN, trial]))
        return build_partial_dft(n, pattern)
    if allocation in ("catalog", "difference-set"):
        return cache.for_shift(trial)  # cyclic shifts across blocks
    return cache.for_shift(0)


def _base_pattern_for(allocation: str, n: int, n_p: int, seed: int) -> PilotPattern | None:
    if allocation in ("catalog", "difference-set"):
        pattern = catalog_difference_set(n, n_p)
        if pattern is None:
            raise NoDifferenceSet(f"no cyclic difference set for this pair ({n}, {n_p})")
        return pattern
    if allocation == "greedy":
        return greedy_allocate(n, n_p)
    if allocation == "equidistant":
        return equidistant_allocate(n, n_p)
    if allocation == "random":
        return None  # drawn fresh per trial
    raise ConfigError(f"unknown allocation {allocation!r}")


def _db(value: float) -> float:
    return 10.0 * math.log10(value) if value > 0 else float("-inf")


def experiment_mse_crb(
    n: int,
    n_p: int,
    allocation: str,
    estimator: str,
    s: int,
    snr_grid_db,
    trials: int,
    seed: int,
    omp_config: OmpConfig | None = None,
    imat_config: ImatConfig | None = None,
) -> list[tuple]:
    """Channel-estimation MSE against the Cramér-Rao bound, in dB.

    Each trial draws a fresh s-sparse channel; difference-set pilots are
    cyclically shifted per trial, random pilots are redrawn per trial.  The
    channel and noise substreams depend only on (seed, trial), so runs that
    differ in allocation or estimator are paired.  Returns rows matching
    MSE_CRB_HEADER.
    """
    if trials < 1:
        raise InvalidCount("trials must be >= 1")
    base = _base_pattern_for(allocation, n, n_p, seed)
    cache = _ModelCache(base) if base is not None else None
    if omp_config is None:
        omp_config = OmpConfig(max_taps=s)
    if imat_config is None:
        imat_config = ImatConfig()

    rows = []
    for snr_index, snr_db in enumerate(snr_grid_db):

        def one_trial(t: int) -> tuple[float, float]:
            rng = np.random.default_rng([seed, _ROLE_CHANNEL, snr_index, t])
            channel = random_sparse_channel(n, s, rng)
            model = _allocation_model(allocation, cache, n, n_p, seed, t)
            clean = model.matrix @ channel.to_cir()
            observed, sigma_sq = add_noise(clean, snr_db, rng)
            cir_hat, _ = _estimate_cir(estimator, model, observed, channel, omp_config, imat_config)
            return (
                cir_mse(cir_hat, channel.to_cir()),
                crb(sigma_sq, model, channel.delays) / n,
            )

        results = _map_indexed(one_trial, trials)
        rows.append((
            snr_db,
            allocation,
            estimator,
            _db(float(np.mean([m for m, _ in results]))),
            _db(float(np.mean([c for _, c in results]))),
        ))
    return rows


def experiment_recovery(
    n: int,
    n_p: int,
    tap_grid,
    trials: int,
    seed: int,
) -> list[tuple]:
    """Noiseless exact-recovery rate of OMP for greedy vs random pilots.

    Greedy pilots are fixed; random pilots are redrawn each trial.  Both
    allocations see identical channels per (tap count, trial), so the
    comparison is paired.  Returns rows matching RECOVERY_HEADER.
    """
    if trials < 1:
        raise InvalidCount("trials must be >= 1")
    tap_grid = list(tap_grid)
    if any(s < 1 or s > n_p for s in tap_grid):
        raise InvalidCount(f"tap counts must lie in [1, {n_p}]")
    greedy_model = build_partial_dft(n, greedy_allocate(n, n_p))

    rows = []
    for s in tap_grid:
        for allocation in ("greedy", "random"):

            def one_trial(t: int) -> bool:
                channel = random_sparse_channel(
                    n, s, np.random.default_rng([seed, _ROLE_CHANNEL, s, t])
                )
                if allocation == "random":
                    pattern = random_allocate(
                        n, n_p, np.random.default_rng([seed, _ROLE_PATTERN, s, t])
                    )
                    model = build_partial_dft(n, pattern)
                else:
                    model = greedy_model
                observed = model.matrix @ channel.to_cir()
                report = omp_estimate(model, observed, OmpConfig(max_taps=s))
                return is_exact_recovery(report, channel)

            hits = sum(_map_indexed(one_trial, trials))
            rows.append((s, allocation, hits / trials, trials))
    return rows


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def write_csv(path, header, rows) -> None:
    """Write a result table with a fixed header; output is deterministic."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])


_CONFIG_KEYS = {
    "n", "n_p", "cp_len", "symbol_duration_us", "constellation",
    "pattern_source", "pattern_file", "shift_per_frame", "snr_grid_db",
    "frames", "seed",
}


def load_link_config(path, overrides: dict | None = None) -> tuple[LinkConfig, FadingProfile | None]:
    """Read a LinkConfig (and optional embedded fading profile) from JSON.

    ``overrides`` wins over file values.  Unknown keys are an error so that
    typos do not silently fall back to defaults.
    """
    import json

    from .channel_model import FadingProfile as _Profile

    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    profile = None
    if "profile" in raw:
        prof = raw.pop("profile")
        try:
            profile = _Profile(
                delays_us=tuple(float(d) for d in prof["delays_us"]),
                powers_db=tuple(float(p) for p in prof["powers_db"]),
                doppler_normalized=float(prof["doppler_normalized"]),
                sample_period_us=float(prof["sample_period_us"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed profile block in {path}: {exc}") from exc
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {sorted(unknown)}")
    merged = dict(raw)
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})
    if "snr_grid_db" in merged:
        merged["snr_grid_db"] = tuple(float(v) for v in merged["snr_grid_db"])
    config = LinkConfig(**merged)
    config.validate()
    return config, profile
