"""Deterministic pilot allocation for sparse OFDM channel estimation.

Pilot patterns are chosen to minimize the coherence of the partial DFT
measurement matrix they induce: cyclic difference sets where they exist, a
greedy variance-flattening search otherwise.  The package also provides the
sparse recovery estimators (OMP, iterative adaptive thresholding, oracle LS,
linear interpolation baseline) and a Monte-Carlo OFDM link simulator with
MSE/CRB/BER/SER/recovery metrics.
"""

from .channel_model import (
    FadingProfile,
    SparseChannel,
    add_noise,
    dvbh_profile,
    evolve_gains,
    load_profile,
    profile_to_taps,
    random_sparse_channel,
    save_profile,
)
from .errors import (
    ConfigError,
    DelayCollision,
    DimensionMismatch,
    EmptyPattern,
    IndexOutOfRange,
    InvalidCount,
    NoDifferenceSet,
    NotDivisible,
    ParseError,
    RankDeficient,
    SparsePilotsError,
    ZeroPilotSymbol,
)
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
from .measurement import (
    MeasurementModel,
    build_partial_dft,
    distorting_matrix,
    least_squares_on_support,
    min_norm_estimate,
)
from .metrics import (
    ErrorCounts,
    TrialOutcome,
    cir_mse,
    crb,
    error_counters,
    is_exact_recovery,
)
from .ofdm_link import (
    BER_SER_HEADER,
    CONSTELLATIONS,
    ESTIMATORS,
    MSE_CRB_HEADER,
    RECOVERY_HEADER,
    Constellation,
    FrameSignals,
    LinkConfig,
    experiment_ber_ser,
    experiment_mse_crb,
    experiment_recovery,
    load_link_config,
    make_frame,
    resolve_pattern,
    run_frame,
    write_csv,
)
from .pilot_alloc import (
    CoherenceReport,
    DifferenceProfile,
    DifferenceSetCheck,
    PilotPattern,
    catalog_difference_set,
    coherence,
    cyclic_shift,
    difference_profile,
    equidistant_allocate,
    greedy_allocate,
    load_pattern,
    random_allocate,
    save_pattern,
    verify_difference_set,
)

__version__ = "0.1.0"
