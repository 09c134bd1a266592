#!/usr/bin/env python3
"""Sweep the correlation parameter beta on scenario-1 data and export the
per-beta mean RMSE and agreement (raw and standardized) for plotting."""

import argparse

import numpy as np

from random_machines.harness import (
    ExperimentConfig,
    MethodSpec,
    SimSource,
    beta_sweep,
    summarize_beta_sweep,
)
from random_machines.kernels import default_kernels
from random_machines.harness import summary_to_csv, summary_to_text


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=300)
    ap.add_argument("--repetitions", type=int, default=10)
    ap.add_argument("--members", type=int, default=100)
    ap.add_argument("--points", type=int, default=21)
    ap.add_argument("--beta-max", type=float, default=5.0)
    ap.add_argument("--seed", type=int, default=986960)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="beta_sweep_model1.csv")
    args = ap.parse_args()

    config = ExperimentConfig(
        source=SimSource(1, args.n, noise_sd_override=0.1),
        methods=(
            MethodSpec("rrm", "RRM", kernels=tuple(default_kernels(1.0)),
                       n_members=args.members, beta=2.0),
        ),
        repetitions=args.repetitions,
        master_seed=args.seed,
        threads=args.threads,
    )
    grid = np.linspace(0.0, args.beta_max, args.points)
    rows = summarize_beta_sweep(beta_sweep(config, grid))
    print(summary_to_text(rows))
    summary_to_csv(rows, args.out)
    print(f"written to {args.out}")


if __name__ == "__main__":
    main()
