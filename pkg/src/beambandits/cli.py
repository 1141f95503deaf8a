"""Command-line interface: sweeps, bound evaluation, instance tools, selftest.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 selftest failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bounds, channel, harness
from .core import BanditError, seeded_stream
from .ub3 import UB3, build_schedule, phase_shares


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = harness.load_config(args.config)
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    out = args.out or config.output
    if out is None:
        raise harness.ConfigError("no output path: pass --out or set 'output' in the config")
    batches = harness.run_sweep(config, workers=args.workers, keep_trials=args.trace)
    harness.write_results(batches, out)
    if args.trace:
        harness.write_trace(batches, str(out) + ".trace")
    ran = sum(not b.skipped for b in batches)
    skipped = sum(b.skipped for b in batches)
    print(f"wrote {out}: {ran} cells run, {skipped} skipped")
    return 0


def _cmd_bound(args: argparse.Namespace) -> int:
    if args.kind == "upper":
        value = bounds.ub3_error_upper_bound(
            args.t1, args.arms, args.gap,
            reward_range=args.reward_range,
            integer_phases=args.integer_phases,
        )
        print(f"{value:.6g}")
    else:
        profile = [float(x) for x in args.profile.split(",")]
        family = bounds.build_lower_bound_family(len(profile), args.peak, profile)
        value = bounds.lower_bound_value(family, args.t1, variant=args.variant)
        print(f"{value:.6g}")
    return 0


def _cmd_instance(args: argparse.Namespace) -> int:
    if args.action == "build":
        params = channel.ChannelParams(
            num_beams=args.arms,
            distance_m=args.distance,
            path_loss_exponent=args.alpha,
            spatial_angle=args.v,
        )
        rng = seeded_stream(args.seed, 0)
        instance = channel.build_unimodal_los_instance(params, rng, args.noise_model)
        channel.save_instance(instance, args.out)
        peak = instance.optimal_arm()
        print(f"wrote {args.out}: K={instance.arm_count}, optimal beam {peak}, "
              f"peak RSS {channel.watts_to_dbm(instance.mean(peak)):.2f} dBm")
    else:
        instance = channel.load_instance(args.path)
        print(f"arms = {instance.arm_count}")
        print(f"noise_model = {instance.noise_model}")
        print(f"optimal = {instance.optimal_arm()}")
        lo, hi = instance.bound_interval
        print(f"bound_interval = [{lo:.6g}, {hi:.6g}] W")
        if instance.spatial_angle is not None:
            print(f"spatial_angle = {instance.spatial_angle:.6g}")
        print("beam  mean_watts      mean_dbm")
        for k in range(1, instance.arm_count + 1):
            mu = instance.mean(k)
            print(f"{k:4d}  {mu:.6e}  {channel.watts_to_dbm(mu):8.2f}")
    return 0


def _selftest_checks() -> list[tuple[str, object]]:
    from .baselines import LineSearchElimination, SequentialHalving

    def schedule_identity() -> None:
        for L in range(1, 13):
            assert abs(float(sum(phase_shares(L))) - 1.0) < 1e-12

    def budget_exactness() -> None:
        for K, T1 in ((4, 8), (16, 100), (16, 900), (64, 500), (128, 1000)):
            sched = build_schedule(T1, K)
            assert sum(sched.budgets) == T1

    def zero_noise_oracle() -> None:
        for K in (4, 7, 12, 16):
            for peak in range(1, K + 1):
                means = [1.0 - 0.5 * abs(k - peak) / K for k in range(1, K + 1)]
                env = channel.exact_instance(means)
                for policy in (UB3(), SequentialHalving(), LineSearchElimination()):
                    budget = policy.min_budget(K)
                    run = policy.solve(env, budget, seeded_stream(0, 0))
                    assert run.output_arm == peak, (policy.name, K, peak, run.output_arm)

    def codebook_orthonormal() -> None:
        B = channel.dft_codebook(16)
        gram = B.conj().T @ B
        assert np.max(np.abs(gram - np.eye(16))) < 1e-10

    def directivity_peak() -> None:
        for K in (4, 16, 64):
            assert abs(channel.directivity(0.0, K) - K * K) < 1e-9 * K * K

    def deterministic_runs() -> None:
        env = channel.bernoulli_instance([0.3, 0.5, 0.7, 0.6, 0.4])
        a = UB3().solve(env, 60, seeded_stream(7, 3), record_trace=True)
        b = UB3().solve(env, 60, seeded_stream(7, 3), record_trace=True)
        assert a.output_arm == b.output_arm and a.trace == b.trace

    def stream_independence() -> None:
        x = seeded_stream(42, 0).random(8)
        y = seeded_stream(42, 0).random(8)
        z = seeded_stream(42, 1).random(8)
        assert np.array_equal(x, y) and not np.array_equal(x, z)

    return [
        ("schedule identity", schedule_identity),
        ("budget exactness", budget_exactness),
        ("zero-noise oracle", zero_noise_oracle),
        ("codebook orthonormality", codebook_orthonormal),
        ("directivity peak", directivity_peak),
        ("deterministic runs", deterministic_runs),
        ("stream independence", stream_independence),
    ]


def _cmd_selftest(_: argparse.Namespace) -> int:
    failures = 0
    for name, check in _selftest_checks():
        try:
            check()
        except Exception as exc:  # noqa: BLE001 - report and keep going
            failures += 1
            print(f"FAIL {name}: {exc}")
        else:
            print(f"ok   {name}")
    if failures:
        print(f"{failures} selftest check(s) failed")
        return 3
    print("all selftest checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beambandits",
        description="Fixed-budget best-beam identification: sweeps, bounds, instances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a Monte-Carlo sweep from a config file")
    p_sweep.add_argument("config", type=Path)
    p_sweep.add_argument("--out", type=Path, default=None, help="CSV output path")
    p_sweep.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p_sweep.add_argument("--seed", type=int, default=None, help="override master_seed")
    p_sweep.add_argument("--trace", action="store_true", help="dump per-trial outcomes")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_bound = sub.add_parser("bound", help="evaluate theoretical error-probability bounds")
    bound_sub = p_bound.add_subparsers(dest="kind", required=True)
    p_upper = bound_sub.add_parser("upper", help="elimination-policy upper bound")
    p_upper.add_argument("--t1", type=int, required=True)
    p_upper.add_argument("--arms", type=int, required=True)
    p_upper.add_argument("--gap", type=float, required=True, help="minimum adjacent-mean gap")
    p_upper.add_argument("--reward-range", type=float, default=1.0)
    p_upper.add_argument("--integer-phases", action="store_true")
    p_upper.set_defaults(func=_cmd_bound)
    p_lower = bound_sub.add_parser("lower", help="flipped-family lower bound")
    p_lower.add_argument("--t1", type=int, required=True)
    p_lower.add_argument("--profile", type=str, required=True,
                         help="comma-separated Bernoulli means in [1/4, 1/2]")
    p_lower.add_argument("--peak", type=int, required=True, help="1-based peak arm")
    p_lower.add_argument("--variant", choices=bounds.LOWER_BOUND_VARIANTS,
                         default="neighborhood")
    p_lower.set_defaults(func=_cmd_bound)

    p_inst = sub.add_parser("instance", help="build or inspect channel instances")
    inst_sub = p_inst.add_subparsers(dest="action", required=True)
    p_build = inst_sub.add_parser("build", help="construct and save a LOS instance")
    p_build.add_argument("--arms", type=int, required=True)
    p_build.add_argument("--distance", type=float, required=True)
    p_build.add_argument("--alpha", type=float, default=1.74)
    p_build.add_argument("--v", type=float, default=None, help="fixed spatial angle")
    p_build.add_argument("--seed", type=int, default=0)
    p_build.add_argument("--noise-model", choices=("complex-gaussian", "gaussian"),
                         default="complex-gaussian")
    p_build.add_argument("--out", type=Path, required=True)
    p_build.set_defaults(func=_cmd_instance)
    p_show = inst_sub.add_parser("show", help="print a saved instance")
    p_show.add_argument("path", type=Path)
    p_show.set_defaults(func=_cmd_instance)

    p_self = sub.add_parser("selftest", help="run the built-in invariant checks")
    p_self.set_defaults(func=_cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except harness.IOWriteFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BanditError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
