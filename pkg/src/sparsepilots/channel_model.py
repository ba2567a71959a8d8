"""Ground-truth sparse channels: fading profiles, Rayleigh gain evolution,
random sparse impulse responses, and AWGN injection."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import j0

from .errors import DelayCollision, IndexOutOfRange, InvalidCount, ParseError

__all__ = [
    "FadingProfile",
    "SparseChannel",
    "dvbh_profile",
    "profile_to_taps",
    "evolve_gains",
    "random_sparse_channel",
    "add_noise",
    "load_profile",
    "save_profile",
]


@dataclass(frozen=True)
class FadingProfile:
    """Average delay/power profile of a multipath channel.

    ``doppler_normalized`` is the Doppler frequency times the OFDM symbol
    duration; it sets the frame-to-frame tap correlation.
    """

    delays_us: tuple[float, ...]
    powers_db: tuple[float, ...]
    doppler_normalized: float
    sample_period_us: float

    def __post_init__(self):
        if len(self.delays_us) != len(self.powers_db):
            raise ValueError("delay and power sequences must have equal length")
        if self.doppler_normalized < 0:
            raise ValueError("normalized Doppler must be >= 0")
        if self.sample_period_us <= 0:
            raise ValueError("sample period must be positive")


def dvbh_profile(sample_period_us: float = 224.0 / 256, doppler_normalized: float = 0.01) -> FadingProfile:
    """Four-tap DVB-H-like profile: delays 1.7/3.5/5.2/11.3 us, powers -2/0/-5/-7 dB."""
    return FadingProfile(
        delays_us=(1.7, 3.5, 5.2, 11.3),
        powers_db=(-2.0, 0.0, -5.0, -7.0),
        doppler_normalized=doppler_normalized,
        sample_period_us=sample_period_us,
    )


@dataclass(frozen=True)
class SparseChannel:
    """A sparse channel impulse response: distinct tap delays and complex gains."""

    n: int
    delays: np.ndarray
    gains: np.ndarray

    def __post_init__(self):
        delays = np.asarray(self.delays, dtype=int)
        gains = np.asarray(self.gains, dtype=complex)
        if delays.size == 0:
            raise InvalidCount("a channel needs at least one tap")
        if delays.size != gains.size:
            raise ValueError("delays and gains must have equal length")
        if np.unique(delays).size != delays.size:
            raise DelayCollision(f"duplicate tap delays in {delays.tolist()}")
        if delays.min() < 0 or delays.max() >= self.n:
            raise IndexOutOfRange(f"tap delays must lie in [0, {self.n})")
        order = np.argsort(delays)
        object.__setattr__(self, "delays", delays[order])
        object.__setattr__(self, "gains", gains[order])
        self.delays.setflags(write=False)
        self.gains.setflags(write=False)

    @property
    def n_taps(self) -> int:
        return self.delays.size

    def to_cir(self) -> np.ndarray:
        """Dense length-n impulse response vector."""
        cir = np.zeros(self.n, dtype=complex)
        cir[self.delays] = self.gains
        return cir


def profile_to_taps(profile: FadingProfile, n: int) -> list[tuple[int, float]]:
    """Round profile delays to sample indices and convert powers to linear.

    Delays round half-up to the nearest sample; two delays landing on the
    same sample is an error so that the ground-truth sparsity stays
    unambiguous.
    """
    indices = [int(math.floor(d / profile.sample_period_us + 0.5)) for d in profile.delays_us]
    if len(set(indices)) != len(indices):
        raise DelayCollision(f"profile delays collide on sample indices {indices}")
    if min(indices) < 0 or max(indices) >= n:
        raise IndexOutOfRange(f"profile delays map outside [0, {n}): {indices}")
    powers = [10.0 ** (p / 10.0) for p in profile.powers_db]
    return list(zip(indices, powers))


def evolve_gains(
    previous: SparseChannel | None,
    profile: FadingProfile,
    rng: np.random.Generator,
    n: int | None = None,
) -> SparseChannel:
    """Advance the Rayleigh tap gains of a profiled channel by one frame.

    The first call (``previous`` is None, ``n`` required) draws each gain as
    a zero-mean circular complex Gaussian with variance equal to the tap's
    linear power.  Subsequent calls apply the first-order autoregression

        g' = rho * g + sqrt(1 - rho^2) * w,    rho = J0(2*pi*fd*T),

    with w a fresh draw of the same variance, so the per-tap variance is
    stationary at every frame.
    """
    if previous is None:
        if n is None:
            raise ValueError("n is required when drawing the first frame")
        taps = profile_to_taps(profile, n)
        delays = np.array([d for d, _ in taps])
        scale = np.sqrt(np.array([p for _, p in taps]) / 2.0)
        gains = scale * (rng.standard_normal(len(taps)) + 1j * rng.standard_normal(len(taps)))
        return SparseChannel(n=n, delays=delays, gains=gains)
    taps = profile_to_taps(profile, previous.n)
    scale = np.sqrt(np.array([p for _, p in taps]) / 2.0)
    rho = float(j0(2.0 * np.pi * profile.doppler_normalized))
    fresh = scale * (rng.standard_normal(len(taps)) + 1j * rng.standard_normal(len(taps)))
    gains = rho * previous.gains + np.sqrt(1.0 - rho * rho) * fresh
    return SparseChannel(n=previous.n, delays=previous.delays, gains=gains)


def random_sparse_channel(n: int, s: int, rng: np.random.Generator) -> SparseChannel:
    """An s-sparse channel with uniform delays and unit-variance Gaussian gains."""
    if not 1 <= s <= n:
        raise InvalidCount(f"need 1 <= s <= n, got s={s}, n={n}")
    delays = rng.choice(n, size=s, replace=False)
    gains = (rng.standard_normal(s) + 1j * rng.standard_normal(s)) / np.sqrt(2.0)
    return SparseChannel(n=n, delays=delays, gains=gains)


def add_noise(
    clean: np.ndarray,
    snr_db: float,
    rng: np.random.Generator,
    power: float | None = None,
) -> tuple[np.ndarray, float]:
    """Add circular complex AWGN at the given SNR; returns (noisy, sigma_sq).

    The noise variance is the signal power divided by the linear SNR; pass
    ``power`` to use a reference other than mean(|clean|^2).  An infinite
    ``snr_db`` is the noiseless mode (sigma_sq = 0).
    """
    clean = np.asarray(clean, dtype=complex)
    if clean.size == 0:
        raise ValueError("clean signal must be nonempty")
    if math.isinf(snr_db) and snr_db > 0:
        return clean.copy(), 0.0
    if power is None:
        power = float(np.mean(np.abs(clean) ** 2))
    sigma_sq = power / 10.0 ** (snr_db / 10.0)
    noise = np.sqrt(sigma_sq / 2.0) * (
        rng.standard_normal(clean.shape) + 1j * rng.standard_normal(clean.shape)
    )
    return clean + noise, float(sigma_sq)


def save_profile(profile: FadingProfile, path) -> None:
    """Write a profile as JSON with delays_us/powers_db/doppler/sample period."""
    with open(path, "w") as fh:
        json.dump(
            {
                "delays_us": list(profile.delays_us),
                "powers_db": list(profile.powers_db),
                "doppler_normalized": profile.doppler_normalized,
                "sample_period_us": profile.sample_period_us,
            },
            fh,
        )
        fh.write("\n")


def load_profile(path) -> FadingProfile:
    """Read a profile from the JSON format written by :func:`save_profile`."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
        return FadingProfile(
            delays_us=tuple(float(d) for d in raw["delays_us"]),
            powers_db=tuple(float(p) for p in raw["powers_db"]),
            doppler_normalized=float(raw["doppler_normalized"]),
            sample_period_us=float(raw["sample_period_us"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed profile file {path}: {exc}") from exc
