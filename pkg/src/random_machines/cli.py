"""Command-line front end: data generation, experiments, model fit/predict.

Subcommands: run, datagen, fit, predict, sweep-beta, sweep-gamma, surface.
Experiment configs are TOML files; the accepted layout is documented in the
repository README.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import datagen
from .data import apply_schema, atomic_write_text, load_csv, write_csv
from .harness import (
    CsvSource,
    ExperimentConfig,
    MethodSpec,
    SimSource,
    beta_sweep,
    gamma_sweep,
    paper_methods,
    run_repeated_holdout,
    summarize_beta_sweep,
    summarize_gamma_sweep,
    summarize_results,
    summary_to_csv,
    summary_to_text,
    win_proportions,
)
from .kernels import FAMILY_ABBREV, KernelFamily, KernelSpec, default_kernels
from .metrics import rmse
from .rrm import RrmConfig, load_model, predict_rrm, save_model, train_rrm
from .svr import SvrParams

_KERNEL_ALIASES = {
    "linear": KernelFamily.LINEAR, "lin": KernelFamily.LINEAR,
    "polynomial": KernelFamily.POLYNOMIAL, "pol": KernelFamily.POLYNOMIAL, "poly": KernelFamily.POLYNOMIAL,
    "gaussian": KernelFamily.GAUSSIAN, "gau": KernelFamily.GAUSSIAN, "rbf": KernelFamily.GAUSSIAN,
    "laplacian": KernelFamily.LAPLACIAN, "lap": KernelFamily.LAPLACIAN,
}


def _parse_family(text: str) -> KernelFamily:
    try:
        return _KERNEL_ALIASES[text.strip().lower()]
    except KeyError:
        raise ValueError(
            f"unknown kernel {text!r}; expected one of linear, polynomial, gaussian, laplacian"
        ) from None


def _default_threads() -> int:
    env = os.environ.get("RRM_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# config parsing

_METHOD_KEYS = {
    "svr": {"kind", "name", "kernel", "gamma", "degree", "C", "epsilon", "tol", "max_iter"},
    "bsvr": {"kind", "name", "kernel", "gamma", "degree", "C", "epsilon", "tol", "max_iter", "B"},
    "rrm": {"kind", "name", "kernels", "gamma", "degree", "C", "epsilon", "tol", "max_iter", "B", "beta"},
}


def _svr_params(entry: dict, defaults: dict) -> SvrParams:
    def get(key, fallback):
        return entry.get(key, defaults.get(key, fallback))

    return SvrParams(
        C=float(get("C", 1.0)),
        epsilon=float(get("epsilon", 0.1)),
        tol=float(get("tol", 1e-3)),
        max_iter=(int(get("max_iter", 0)) or None),
    )


def _parse_method(entry: dict, defaults: dict, index: int) -> MethodSpec:
    kind = entry.get("kind")
    if kind not in _METHOD_KEYS:
        raise ValueError(
            f"[[methods]] entry {index}: unknown method kind {kind!r} "
            "(expected 'svr', 'bsvr' or 'rrm')"
        )
    unknown = set(entry) - _METHOD_KEYS[kind]
    if unknown:
        raise ValueError(f"[[methods]] entry {index}: unknown keys {sorted(unknown)} for kind {kind!r}")

    gamma = float(entry.get("gamma", defaults.get("gamma", 1.0)))
    degree = int(entry.get("degree", defaults.get("degree", 2)))
    params = _svr_params(entry, defaults)
    n_members = int(entry.get("B", defaults.get("B", 100)))
    beta = float(entry.get("beta", defaults.get("beta", 2.0)))

    if kind == "rrm":
        fams = entry.get("kernels", ["linear", "polynomial", "gaussian", "laplacian"])
        kernels = tuple(
            KernelSpec(_parse_family(f), gamma, degree if _parse_family(f) is KernelFamily.POLYNOMIAL else None)
            for f in fams
        )
        return MethodSpec(
            kind="rrm",
            name=entry.get("name", "RRM"),
            kernels=kernels,
            n_members=n_members,
            beta=beta,
            params=params,
        )

    family = _parse_family(entry.get("kernel", "gaussian"))
    kernel = KernelSpec(family, gamma, degree if family is KernelFamily.POLYNOMIAL else None)
    default_name = f"{kind.upper()}.{FAMILY_ABBREV[family]}"
    if kind == "svr":
        return MethodSpec(kind, entry.get("name", default_name), kernel=kernel, params=params)
    return MethodSpec(kind, entry.get("name", default_name), kernel=kernel, n_members=n_members, params=params)


def _parse_source(raw: dict):
    ds = raw.get("dataset")
    if not isinstance(ds, dict):
        raise ValueError("config needs a [dataset] section")
    kind = ds.get("kind", "simulation" if "model" in ds else "csv")
    if kind == "simulation":
        if "model" not in ds or "n" not in ds:
            raise ValueError("[dataset]: simulation sources need 'model' and 'n'")
        return SimSource(
            model_id=int(ds["model"]),
            n=int(ds["n"]),
            seed=(int(ds["seed"]) if "seed" in ds else None),
            noise_arg=ds.get("noise_arg", "variance"),
            include_noise=bool(ds.get("noise", True)),
            noise_sd_override=(float(ds["noise_sd"]) if "noise_sd" in ds else None),
            standardize=bool(ds.get("standardize", False)),
        )
    if kind == "csv":
        if "path" not in ds:
            raise ValueError("[dataset]: csv sources need 'path'")
        return CsvSource(
            path=str(ds["path"]),
            target=str(ds.get("target", "y")),
            categorical=tuple(ds.get("categorical", [])),
            standardize=bool(ds.get("standardize", True)),
            label=ds.get("label"),
        )
    raise ValueError(f"[dataset]: unknown kind {kind!r}")


def load_experiment_config(
    path: str,
    seed_override: int | None = None,
    threads: int = 1,
    pilot_split_override: str | None = None,
) -> tuple[ExperimentConfig, str, dict]:
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)

    source = _parse_source(raw)
    exp = raw.get("experiment", {})
    defaults = raw.get("defaults", {})

    methods_cfg = exp.get("methods", raw.get("methods", "paper9"))
    if isinstance(methods_cfg, str):
        if methods_cfg != "paper9":
            raise ValueError(f"unknown methods preset {methods_cfg!r} (expected 'paper9')")
        methods = tuple(
            paper_methods(
                gamma=float(defaults.get("gamma", 1.0)),
                degree=int(defaults.get("degree", 2)),
                n_members=int(defaults.get("B", 100)),
                beta=float(defaults.get("beta", 2.0)),
                params=_svr_params({}, defaults),
            )
        )
    else:
        methods = tuple(_parse_method(m, defaults, i) for i, m in enumerate(methods_cfg))

    seed = seed_override if seed_override is not None else int(exp.get("seed", 0))
    config = ExperimentConfig(
        source=source,
        methods=methods,
        repetitions=int(exp.get("repetitions", 30)),
        split=float(exp.get("split", 0.7)),
        master_seed=seed,
        pilot_split=pilot_split_override or exp.get("pilot_split", "test"),
        threads=threads,
    )
    out_dir = raw.get("output", {}).get("dir", "rrm_results")
    return config, out_dir, raw.get("sweep", {})


# ---------------------------------------------------------------------------
# output helpers

def _write_results_bundle(table, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    table.to_csv(os.path.join(out_dir, "results.csv"))
    rows = summarize_results(table)
    summary_to_csv(rows, os.path.join(out_dir, "summary.csv"))
    atomic_write_text(os.path.join(out_dir, "summary.txt"), summary_to_text(rows))
    if len(table.methods()) >= 2:
        methods, matrix = win_proportions(table)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method"] + methods)
        for name, row in zip(methods, matrix):
            w.writerow([name] + [("" if not np.isfinite(v) else repr(float(v))) for v in row])
        atomic_write_text(os.path.join(out_dir, "wins.csv"), buf.getvalue())


# ---------------------------------------------------------------------------
# subcommands

def cmd_datagen(args) -> int:
    spec = datagen.SimSpec(args.model, args.n, args.seed)
    ds = datagen.generate(
        spec,
        noise_arg=args.noise_arg,
        include_noise=not args.no_noise,
        noise_sd_override=args.noise_sd,
    )
    write_csv(ds, args.out)
    print(f"wrote {ds.n} rows x {ds.p} features to {args.out}")
    return 0


def cmd_run(args) -> int:
    config, out_dir, _ = load_experiment_config(
        args.config, args.seed, args.threads, args.pilot_split
    )
    if args.out:
        out_dir = args.out
    table = run_repeated_holdout(config)
    _write_results_bundle(table, out_dir)
    print(f"{len(table.records)} records -> {out_dir}")
    return 0


def cmd_sweep_beta(args) -> int:
    config, out_dir, sweep = load_experiment_config(
        args.config, args.seed, args.threads, args.pilot_split
    )
    if args.out:
        out_dir = args.out
    lo = float(sweep.get("beta_min", 0.0))
    hi = float(sweep.get("beta_max", 5.0))
    points = int(args.points or sweep.get("beta_points", 21))
    grid = np.linspace(lo, hi, points)
    table = beta_sweep(config, grid)
    os.makedirs(out_dir, exist_ok=True)
    table.to_csv(os.path.join(out_dir, "beta_sweep_results.csv"))
    rows = summarize_beta_sweep(table)
    summary_to_csv(rows, os.path.join(out_dir, "beta_sweep_summary.csv"))
    atomic_write_text(os.path.join(out_dir, "beta_sweep_summary.txt"), summary_to_text(rows))
    print(f"{points} beta values -> {out_dir}")
    return 0


def cmd_sweep_gamma(args) -> int:
    config, out_dir, sweep = load_experiment_config(
        args.config, args.seed, args.threads, args.pilot_split
    )
    if args.out:
        out_dir = args.out
    grid = np.asarray(sweep.get("gammas", 2.0 ** np.arange(-3, 4)), dtype=np.float64)
    table = gamma_sweep(config, grid)
    os.makedirs(out_dir, exist_ok=True)
    table.to_csv(os.path.join(out_dir, "gamma_sweep_results.csv"))
    rows = summarize_gamma_sweep(table)
    summary_to_csv(rows, os.path.join(out_dir, "gamma_sweep_summary.csv"))
    atomic_write_text(os.path.join(out_dir, "gamma_sweep_summary.txt"), summary_to_text(rows))
    print(f"{grid.size} gamma values -> {out_dir}")
    return 0


def cmd_fit(args) -> int:
    categorical = tuple(c for c in (args.categorical or "").split(",") if c)
    ds = load_csv(args.data, args.target, categorical, scale=not args.no_scale)
    rng = np.random.default_rng(args.seed)

    if not (0.0 < args.pilot_fraction < 1.0):
        raise ValueError("--pilot-fraction must lie in (0, 1)")
    k = max(1, int(round(args.pilot_fraction * ds.n)))
    if ds.n - k < 2:
        raise ValueError(f"dataset too small ({ds.n} rows) for a pilot holdout")
    perm = rng.permutation(ds.n)
    pilot_train = ds.subset(perm[k:])
    holdout = ds.subset(perm[:k])

    families = [_parse_family(f) for f in args.kernels.split(",")]
    kernels = tuple(
        KernelSpec(f, args.gamma, args.degree if f is KernelFamily.POLYNOMIAL else None)
        for f in families
    )
    config = RrmConfig(
        kernels=kernels,
        n_members=args.B,
        beta=args.beta,
        svr_params=SvrParams(C=args.C, epsilon=args.epsilon, tol=args.tol),
    )
    model = train_rrm(ds, holdout, config, rng, pilot_train=pilot_train)
    preprocess = {"target": ds.target_name, "schema": ds.schema}
    save_model(model, args.out, preprocess)
    print(f"fitted {model.n_members} members on {ds.n} rows -> {args.out}")
    return 0


def cmd_predict(args) -> int:
    model, preprocess = load_model(args.model)
    if preprocess:
        X, y = apply_schema(preprocess["schema"], preprocess["target"], args.data)
    else:
        ds = load_csv(args.data, args.target, scale=False)
        X, y = ds.features, ds.target
    preds = predict_rrm(model, X)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row", "prediction"] + (["target"] if y is not None else []))
    for i, p in enumerate(preds):
        row = [str(i), repr(float(p))]
        if y is not None:
            row.append(repr(float(y[i])))
        w.writerow(row)
    atomic_write_text(args.out, buf.getvalue())
    msg = f"wrote {len(preds)} predictions to {args.out}"
    if y is not None and len(y) == len(preds):
        msg += f" (rmse {rmse(y, preds):.6g})"
    print(msg)
    return 0


def cmd_surface(args) -> int:
    model, _ = load_model(args.model)
    p = datagen.MODEL_DIMS.get(args.model_id)
    if p is None:
        raise ValueError(f"--model-id must be in 1..8, got {args.model_id}")
    if model.n_features != p:
        raise ValueError(
            f"model expects {model.n_features} features but scenario {args.model_id} has {p}"
        )
    fixed: dict[int, float] = {}
    for item in args.fix or []:
        key, _, val = item.partition("=")
        if not key.startswith("x") or not val:
            raise ValueError(f"--fix expects entries like x3=0.5, got {item!r}")
        fixed[int(key[1:]) - 1] = float(val)
    free = [j for j in range(p) if j not in fixed]
    if len(free) != 2:
        raise ValueError(
            f"scenario {args.model_id} has {p} features; fix all but exactly two "
            f"with --fix (currently {len(free)} free)"
        )
    res = args.resolution
    grid = np.linspace(0.0, 1.0, res)
    pts = np.empty((res * res, p))
    for j, v in fixed.items():
        pts[:, j] = v
    g1, g2 = np.meshgrid(grid, grid, indexing="ij")
    pts[:, free[0]] = g1.ravel()
    pts[:, free[1]] = g2.ravel()
    true_y = datagen._surface(args.model_id, pts)
    pred_y = predict_rrm(model, pts)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{free[0] + 1}", f"x{free[1] + 1}", "true_y", "predicted_y"])
    for a, b, t, q in zip(pts[:, free[0]], pts[:, free[1]], true_y, pred_y):
        w.writerow([repr(float(a)), repr(float(b)), repr(float(t)), repr(float(q))])
    atomic_write_text(args.out, buf.getvalue())
    print(f"wrote {res * res} grid rows to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rrm",
        description="Bagged support-vector regression with randomized kernel choice",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=None, help="override the experiment seed")
        p.add_argument("--out", default=None, help="override the output directory")
        p.add_argument("--threads", type=int, default=_default_threads(),
                       help="worker threads for repetitions (env RRM_THREADS)")
        p.add_argument("--pilot-split", choices=["test", "inner"], default=None,
                       help="where ensemble pilots are validated")

    p = sub.add_parser("run", help="run a repeated-holdout experiment from a TOML config")
    p.add_argument("config")
    add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("datagen", help="write a synthetic dataset as CSV")
    p.add_argument("--model", type=int, required=True, choices=range(1, 9))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--noise-arg", choices=["variance", "sd"], default="variance",
                   help="read the noise parameter as a variance (default) or an sd")
    p.add_argument("--no-noise", action="store_true", help="emit the noiseless surface")
    p.add_argument("--noise-sd", type=float, default=None,
                   help="override the noise standard deviation outright")
    p.set_defaults(func=cmd_datagen)

    p = sub.add_parser("fit", help="fit a random-machines ensemble on a CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--target", default="y")
    p.add_argument("--categorical", default="", help="comma-separated categorical columns")
    p.add_argument("--kernels", default="linear,polynomial,gaussian,laplacian")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--B", type=int, default=100)
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--pilot-fraction", type=float, default=0.2,
                   help="fraction of rows carved off for pilot validation")
    p.add_argument("--no-scale", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--target", default="y", help="target column (only used without a stored schema)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("sweep-beta", help="re-run the config's rrm method over a beta grid")
    p.add_argument("config")
    p.add_argument("--points", type=int, default=None)
    add_common(p)
    p.set_defaults(func=cmd_sweep_beta)

    p = sub.add_parser("sweep-gamma", help="re-run every configured method over a gamma grid")
    p.add_argument("config")
    add_common(p)
    p.set_defaults(func=cmd_sweep_gamma)

    p = sub.add_parser("surface", help="export true vs predicted values on a 2-D grid")
    p.add_argument("--model", required=True, help="path to a saved model")
    p.add_argument("--model-id", type=int, required=True, help="scenario id for the true surface")
    p.add_argument("--resolution", type=int, default=50)
    p.add_argument("--fix", action="append", default=None, metavar="xJ=V",
                   help="fix feature xJ at value V (repeatable); leaves two free dims")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_surface)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
