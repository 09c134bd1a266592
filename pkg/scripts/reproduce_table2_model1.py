#!/usr/bin/env python3
"""Desk-scale reproduction of the published scenario-1 benchmark row.

Runs the nine standard methods (four single-kernel SVRs, four bagged SVRs,
and the random-kernel ensemble) on scenario 1 with n=1000 under repeated
holdout, then prints mean RMSEs next to the published values.

Roughly five minutes single-threaded; pass --threads to parallelize
repetitions (results are identical either way).
"""

import argparse
import time

from random_machines.harness import (
    ExperimentConfig,
    SimSource,
    paper_methods,
    run_repeated_holdout,
)

PUBLISHED = {
    "SVR.Lin": 0.3877, "SVR.Pol": 0.1110, "SVR.Gau": 0.1091, "SVR.Lap": 0.1132,
    "BSVR.Lin": 0.3876, "BSVR.Pol": 0.1108, "BSVR.Gau": 0.1088, "BSVR.Lap": 0.1120,
    "RRM": 0.1069,
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--repetitions", type=int, default=30)
    ap.add_argument("--seed", type=int, default=20260810)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default=None, help="optional path for the long-format results CSV")
    args = ap.parse_args()

    config = ExperimentConfig(
        # noise sd 0.1: see the README's reproduction notes on scenario 1
        source=SimSource(1, args.n, noise_sd_override=0.1),
        methods=tuple(paper_methods()),
        repetitions=args.repetitions,
        master_seed=args.seed,
        threads=args.threads,
    )
    t0 = time.time()
    table = run_repeated_holdout(config)
    print(f"{args.repetitions} repetitions in {time.time() - t0:.0f}s\n")
    print(f"{'method':<10} {'mean rmse':>10} {'published':>10} {'rel diff':>9}")
    for name in PUBLISHED:
        mean = table.mean("rmse", name)
        rel = (mean - PUBLISHED[name]) / PUBLISHED[name]
        note = "" if abs(rel) <= 0.15 else "  (outside 15%)"
        print(f"{name:<10} {mean:>10.4f} {PUBLISHED[name]:>10.4f} {rel:>+9.1%}{note}")
    print("\nnote: the polynomial kernel here has no additive constant, so its")
    print("columns are expected to sit far from the published values.")
    if args.out:
        table.to_csv(args.out)
        print(f"results written to {args.out}")


if __name__ == "__main__":
    main()
