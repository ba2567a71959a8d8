"""Command-line front end: pattern generation, scoring, and experiments.

Exit codes: 0 on success, 1 on runtime/config errors, 2 when the request is
domain-infeasible (no difference set for the pair, pilot count not dividing
the subcarrier count).
"""

from __future__ import annotations

import argparse
import sys

from .errors import NoDifferenceSet, NotDivisible, SparsePilotsError
from .ofdm_link import (
    BER_SER_HEADER,
    MSE_CRB_HEADER,
    RECOVERY_HEADER,
    LinkConfig,
    experiment_ber_ser,
    experiment_mse_crb,
    experiment_recovery,
    load_link_config,
    write_csv,
)
from .pilot_alloc import (
    PilotPattern,
    catalog_difference_set,
    coherence,
    equidistant_allocate,
    greedy_allocate,
    load_pattern,
    random_allocate,
    save_pattern,
    verify_difference_set,
)

ALLOCATION_METHODS = ("greedy", "difference-set", "random", "equidistant")


def _parse_grid(text: str) -> tuple[float, ...]:
    """Parse '10,20,30' into a float tuple."""
    return tuple(float(v) for v in text.split(","))


def _parse_tap_grid(text: str) -> list[int]:
    """Parse '1:8' (inclusive range) or '1,3,5' into an int list."""
    if ":" in text:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",")]


def _allocate_pattern(method: str, n: int, n_p: int, seed: int) -> PilotPattern:
    if method == "greedy":
        return greedy_allocate(n, n_p)
    if method == "difference-set":
        pattern = catalog_difference_set(n, n_p)
        if pattern is None:
            raise NoDifferenceSet(f"no cyclic difference set for this pair ({n}, {n_p})")
        return pattern
    if method == "random":
        return random_allocate(n, n_p, seed)
    return equidistant_allocate(n, n_p)


def cmd_allocate(args) -> int:
    pattern = _allocate_pattern(args.method, args.n, args.np, args.seed)
    if args.output:
        save_pattern(pattern, args.output)
    else:
        print({"n": pattern.n, "indices": list(pattern.indices)})
    return 0


def cmd_coherence(args) -> int:
    report = coherence(load_pattern(args.pattern))
    gap = report.mu_tilde**2 - report.bound_mu_tilde_sq
    print(f"mu              {report.mu:.6f}")
    print(f"mu_tilde        {report.mu_tilde:.6f}")
    print(f"bound_mu_tilde2 {report.bound_mu_tilde_sq:.6f}")
    print(f"bound_gap       {gap:.6f}")
    print(f"achieves_bound  {report.achieves_bound}")
    print(f"argmax_lag      {report.argmax_lag}")
    return 0


def cmd_verify_ds(args) -> int:
    check = verify_difference_set(load_pattern(args.pattern))
    print(f"is_difference_set {check.is_difference_set}")
    print(f"repetition        {check.common_repetition}")
    return 0


def _config_overrides(args) -> dict:
    return {
        "frames": args.frames,
        "seed": args.seed,
        "snr_grid_db": _parse_grid(args.snr_grid) if args.snr_grid else None,
        "pattern_source": args.pattern_source,
        "constellation": args.constellation,
    }


def cmd_simulate(args) -> int:
    config, profile = load_link_config(args.config, _config_overrides(args))
    rows = experiment_ber_ser(config, profile=profile)
    write_csv(args.output, BER_SER_HEADER, rows)
    return 0


def cmd_mse(args) -> int:
    rows = experiment_mse_crb(
        n=args.n,
        n_p=args.np,
        allocation=args.source,
        estimator=args.estimator,
        s=args.taps,
        snr_grid_db=_parse_grid(args.snr_grid),
        trials=args.trials,
        seed=args.seed,
    )
    write_csv(args.output, MSE_CRB_HEADER, rows)
    return 0


def cmd_recovery(args) -> int:
    rows = experiment_recovery(
        n=args.n,
        n_p=args.np,
        tap_grid=_parse_tap_grid(args.taps),
        trials=args.trials,
        seed=args.seed,
    )
    write_csv(args.output, RECOVERY_HEADER, rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsepilots",
        description="Deterministic OFDM pilot allocation and sparse channel estimation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("allocate", help="generate a pilot pattern file")
    p.add_argument("--n", type=int, required=True, help="total subcarriers")
    p.add_argument("--np", type=int, required=True, help="number of pilots")
    p.add_argument("--method", choices=ALLOCATION_METHODS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="pattern JSON path (default: print to stdout)")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("coherence", help="score a pattern file")
    p.add_argument("--pattern", required=True, help="pattern JSON path")
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("verify-ds", help="check a pattern file for the difference-set property")
    p.add_argument("--pattern", required=True, help="pattern JSON path")
    p.set_defaults(func=cmd_verify_ds)

    p = sub.add_parser("simulate", help="BER/SER experiment from a config file")
    p.add_argument("--config", required=True, help="link config JSON path")
    p.add_argument("--output", required=True, help="CSV output path")
    p.add_argument("--frames", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--snr-grid", help="comma-separated SNR grid in dB")
    p.add_argument("--pattern-source", choices=("catalog", "difference-set", "greedy", "random", "equidistant", "file"))
    p.add_argument("--constellation", choices=("qpsk", "qam16"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mse", help="MSE vs Cramér-Rao bound experiment")
    p.add_argument("--n", type=int, default=73)
    p.add_argument("--np", type=int, default=9)
    p.add_argument("--source", default="difference-set",
                   choices=("catalog", "difference-set", "greedy", "random", "equidistant"))
    p.add_argument("--estimator", default="omp", choices=("interp", "omp", "imat", "oracle"))
    p.add_argument("--taps", type=int, default=3)
    p.add_argument("--snr-grid", default="10,15,20,25,30")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_mse)

    p = sub.add_parser("recovery", help="noiseless exact-recovery experiment")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--np", type=int, default=16)
    p.add_argument("--taps", default="1:8", help="tap grid, e.g. 1:8 or 1,3,5")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_recovery)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NoDifferenceSet, NotDivisible) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SparsePilotsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
