"""Repeated-holdout benchmark engine: method comparisons and parameter sweeps.

Every repetition shuffles the dataset with a repetition-derived seed, splits
it 70/30 (configurable), fits every configured method on the same training
part, and scores RMSE on the same test part, so per-repetition comparisons
are paired. Ensemble methods additionally record the mean pairwise
correlation of their member predictions (agreement), and each repetition
gets min-max error scores across the methods that survived it.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import datagen
from .bagging import member_predictions, train_bagged_svr
from .data import (
    Dataset,
    apply_standardizer,
    atomic_write_text,
    fit_standardizer,
    load_csv,
)
from .kernels import KernelSpec, default_kernels
from .metrics import agreement, error_score, rmse
from .rrm import RrmConfig, predict_rrm, train_rrm
from .svr import ConvergenceError, SvrParams, predict_svr, train_svr


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class SimSource:
    model_id: int
    n: int
    seed: int | None = None  # None -> derived from the experiment master seed
    noise_arg: str = "variance"
    include_noise: bool = True
    noise_sd_override: float | None = None
    standardize: bool = False

    @property
    def name(self) -> str:
        return f"model{self.model_id}_n{self.n}"

    def materialize(self, fallback_seed: int) -> Dataset:
        seed = self.seed if self.seed is not None else fallback_seed
        return datagen.generate(
            datagen.SimSpec(self.model_id, self.n, seed),
            noise_arg=self.noise_arg,
            include_noise=self.include_noise,
            noise_sd_override=self.noise_sd_override,
            name=self.name,
        )


@dataclass(frozen=True)
class CsvSource:
    path: str
    target: str = "y"
    categorical: tuple[str, ...] = ()
    standardize: bool = True
    label: str | None = None

    @property
    def name(self) -> str:
        return self.label or self.path

    def materialize(self, fallback_seed: int) -> Dataset:
        del fallback_seed
        # raw parse here; scaling is re-fitted on each repetition's training rows
        return load_csv(self.path, self.target, self.categorical, scale=False, name=self.name)


@dataclass(frozen=True)
class MethodSpec:
    kind: str  # "svr" | "bsvr" | "rrm"
    name: str
    kernel: KernelSpec | None = None
    kernels: tuple[KernelSpec, ...] = ()
    n_members: int = 100
    beta: float = 2.0
    params: SvrParams = SvrParams()

    def __post_init__(self) -> None:
        if self.kind not in ("svr", "bsvr", "rrm"):
            raise ValueError(f"unknown method kind {self.kind!r}")
        if self.kind in ("svr", "bsvr") and self.kernel is None:
            raise ValueError(f"method {self.name!r}: kind {self.kind!r} needs a kernel")
        if self.kind == "rrm" and not self.kernels:
            object.__setattr__(self, "kernels", tuple(default_kernels()))

    def describe(self) -> str:
        bits = [f"kind={self.kind}", f"C={self.params.C}", f"epsilon={self.params.epsilon}"]
        if self.kind == "rrm":
            fams = ",".join(k.family.value for k in self.kernels)
            gammas = ",".join(repr(k.gamma) for k in self.kernels)
            bits += [f"kernels={fams}", f"gamma={gammas}", f"B={self.n_members}", f"beta={self.beta}"]
        else:
            bits += [f"kernel={self.kernel.family.value}", f"gamma={self.kernel.gamma}"]
            if self.kernel.degree is not None:
                bits.append(f"degree={self.kernel.degree}")
            if self.kind == "bsvr":
                bits.append(f"B={self.n_members}")
        return " ".join(bits)

    def with_gamma(self, gamma: float) -> "MethodSpec":
        if self.kind == "rrm":
            return replace(self, kernels=tuple(k.with_gamma(gamma) for k in self.kernels))
        return replace(self, kernel=self.kernel.with_gamma(gamma))


def paper_methods(
    gamma: float = 1.0,
    degree: int = 2,
    n_members: int = 100,
    beta: float = 2.0,
    params: SvrParams = SvrParams(),
) -> list[MethodSpec]:
    """The nine standard methods: four single SVRs, four bagged SVRs, and the
    random-kernel ensemble, all sharing one hyperparameter set."""
    kernels = default_kernels(gamma, degree)
    methods = [
        MethodSpec("svr", f"SVR.{k.abbrev}", kernel=k, params=params) for k in kernels
    ]
    methods += [
        MethodSpec("bsvr", f"BSVR.{k.abbrev}", kernel=k, n_members=n_members, params=params)
        for k in kernels
    ]
    methods.append(
        MethodSpec("rrm", "RRM", kernels=tuple(kernels), n_members=n_members, beta=beta, params=params)
    )
    return methods


@dataclass(frozen=True)
class ExperimentConfig:
    source: SimSource | CsvSource
    methods: tuple[MethodSpec, ...]
    repetitions: int = 30
    split: float = 0.7
    master_seed: int = 0
    pilot_split: str = "test"  # "test" | "inner"
    threads: int = 1

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be positive, got {self.repetitions!r}")
        if not (0.0 < self.split < 1.0):
            raise ValueError(f"split must lie in (0, 1), got {self.split!r}")
        if self.pilot_split not in ("test", "inner"):
            raise ValueError(f"pilot_split must be 'test' or 'inner', got {self.pilot_split!r}")
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise ValueError(f"method names must be unique, got {names}")


# ---------------------------------------------------------------------------
# results store

@dataclass(frozen=True)
class ResultRecord:
    dataset: str
    method: str
    repetition: int
    metric: str
    value: float
    params: str


@dataclass
class ResultsTable:
    records: list[ResultRecord] = field(default_factory=list)

    def append(self, rec: ResultRecord) -> None:
        self.records.append(rec)

    def extend(self, other: "ResultsTable") -> None:
        self.records.extend(other.records)

    def methods(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.records:
            seen.setdefault(r.method, None)
        return list(seen)

    def values(
        self,
        metric: str,
        method: str | None = None,
        dataset: str | None = None,
        params: str | None = None,
    ) -> np.ndarray:
        out = [
            r.value
            for r in self.records
            if r.metric == metric
            and (method is None or r.method == method)
            and (dataset is None or r.dataset == dataset)
            and (params is None or r.params == params)
        ]
        return np.asarray(out, dtype=np.float64)

    def mean(self, metric: str, method: str | None = None, dataset: str | None = None) -> float:
        v = self.values(metric, method, dataset)
        v = v[np.isfinite(v)]
        return float(v.mean()) if v.size else float("nan")

    def to_csv(self, path: str) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dataset", "method", "repetition", "metric", "value", "params"])
        for r in self.records:
            w.writerow([r.dataset, r.method, r.repetition, r.metric, repr(r.value), r.params])
        atomic_write_text(path, buf.getvalue())

    @classmethod
    def from_csv(cls, path: str) -> "ResultsTable":
        table = cls()
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                table.append(
                    ResultRecord(
                        dataset=row["dataset"],
                        method=row["method"],
                        repetition=int(row["repetition"]),
                        metric=row["metric"],
                        value=float(row["value"]),
                        params=row["params"],
                    )
                )
        return table


# ---------------------------------------------------------------------------
# fitting one method on one split

def _split_indices(n: int, split: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    perm = rng.permutation(n)
    n_train = int(np.floor(split * n))
    n_train = min(max(n_train, 2), n - 1)  # at least 1 test row, 2 training rows
    return perm[:n_train], perm[n_train:]


def _prepared_split(
    data: Dataset, standardize: bool, train_idx: np.ndarray, test_idx: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    Xtr, ytr = data.features[train_idx], data.target[train_idx]
    Xte, yte = data.features[test_idx], data.target[test_idx]
    if standardize:
        cont = np.array([c.kind == "continuous" for c in data.columns])
        means, sds, keep = fit_standardizer(Xtr, cont)
        Xtr = apply_standardizer(Xtr, means, sds, keep)
        Xte = apply_standardizer(Xte, means, sds, keep)
    return Xtr, ytr, Xte, yte


def _fit_and_score(
    method: MethodSpec,
    Xtr: np.ndarray,
    ytr: np.ndarray,
    Xte: np.ndarray,
    yte: np.ndarray,
    pilot_split: str,
    rng: np.random.Generator,
) -> tuple[float, float | None, dict]:
    """Returns (rmse, agreement-or-None, diagnostics)."""
    diagnostics: dict = {}
    if method.kind == "svr":
        model = train_svr(Xtr, ytr, method.kernel, method.params)
        return rmse(yte, predict_svr(model, Xte)), None, diagnostics

    train_ds = _as_plain_dataset(Xtr, ytr)
    if method.kind == "bsvr":
        model = train_bagged_svr(train_ds, method.kernel, method.n_members, method.params, rng)
        preds = member_predictions(model.members, Xte)
        return rmse(yte, preds.mean(axis=0)), agreement(preds), diagnostics

    # rrm
    pilot_train = None
    holdout = _as_plain_dataset(Xte, yte)
    if pilot_split == "inner":
        k = max(1, int(round(0.2 * len(ytr))))
        if len(ytr) - k < 2:
            raise ValueError("training set too small to carve an inner pilot split")
        perm = rng.permutation(len(ytr))
        pilot_train = _as_plain_dataset(Xtr[perm[k:]], ytr[perm[k:]])
        holdout = _as_plain_dataset(Xtr[perm[:k]], ytr[perm[:k]])
    config = RrmConfig(
        kernels=method.kernels,
        n_members=method.n_members,
        beta=method.beta,
        svr_params=method.params,
    )
    model = train_rrm(train_ds, holdout, config, rng, pilot_train=pilot_train)
    preds = member_predictions(model.members, Xte)
    diagnostics["member_weights"] = model.member_weights
    diagnostics["kernel_probs"] = model.kernel_probs
    return rmse(yte, model.member_weights @ preds), agreement(preds), diagnostics


def _as_plain_dataset(X: np.ndarray, y: np.ndarray) -> Dataset:
    from .data import ColumnMeta

    return Dataset(
        features=X,
        target=y,
        columns=[ColumnMeta(f"x{i + 1}", "continuous") for i in range(X.shape[1])],
    )


def _run_repetition(
    data: Dataset, config: ExperimentConfig, rep: int, ss: np.random.SeedSequence
) -> list[ResultRecord]:
    streams = ss.spawn(1 + len(config.methods))
    split_rng = np.random.default_rng(streams[0])
    train_idx, test_idx = _split_indices(data.n, config.split, split_rng)
    Xtr, ytr, Xte, yte = _prepared_split(data, config.source.standardize, train_idx, test_idx)

    records: list[ResultRecord] = []
    scores: list[tuple[MethodSpec, float]] = []
    for method, stream in zip(config.methods, streams[1:]):
        rng = np.random.default_rng(stream)
        try:
            err, agr, _ = _fit_and_score(method, Xtr, ytr, Xte, yte, config.pilot_split, rng)
        except (ConvergenceError, RuntimeError) as exc:
            records.append(
                ResultRecord(data.name, method.name, rep, "rmse", float("nan"), method.describe())
            )
            records.append(
                ResultRecord(data.name, method.name, rep, "failure", 1.0, str(exc))
            )
            continue
        records.append(ResultRecord(data.name, method.name, rep, "rmse", err, method.describe()))
        if agr is not None:
            records.append(
                ResultRecord(data.name, method.name, rep, "agreement", agr, method.describe())
            )
        scores.append((method, err))

    if len(scores) >= 2:
        es = error_score(np.array([s for _, s in scores]))
        for (method, _), val in zip(scores, es.values):
            records.append(
                ResultRecord(data.name, method.name, rep, "error_score", float(val), method.describe())
            )
    return records


def run_repeated_holdout(config: ExperimentConfig) -> ResultsTable:
    """Execute the full experiment; deterministic in ``config.master_seed``."""
    root = np.random.SeedSequence(config.master_seed)
    data_ss, *rep_ss = root.spawn(config.repetitions + 1)
    data = config.source.materialize(int(data_ss.generate_state(1)[0]))
    if data.n < 3:
        raise ValueError(f"dataset {data.name!r} needs at least 3 rows for a holdout split")

    table = ResultsTable()
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            futures = [
                pool.submit(_run_repetition, data, config, rep, rep_ss[rep])
                for rep in range(config.repetitions)
            ]
            for fut in futures:
                table.records.extend(fut.result())
    else:
        for rep in range(config.repetitions):
            table.records.extend(_run_repetition(data, config, rep, rep_ss[rep]))
    return table


# ---------------------------------------------------------------------------
# cross-method and sweep summaries

def win_proportions(table: ResultsTable) -> tuple[list[str], np.ndarray]:
    """Entry (a, b): fraction of shared (dataset, repetition) pairs where
    method a had strictly lower RMSE than b; ties count half."""
    methods = table.methods()
    by_key: dict[tuple[str, int], dict[str, float]] = {}
    for r in table.records:
        if r.metric != "rmse" or not np.isfinite(r.value):
            continue
        by_key.setdefault((r.dataset, r.repetition), {})[r.method] = r.value
    k = len(methods)
    wins = np.zeros((k, k))
    counts = np.zeros((k, k))
    for vals in by_key.values():
        present = [m for m in methods if m in vals]
        for i, a in enumerate(present):
            for b in present[i + 1:]:
                ia, ib = methods.index(a), methods.index(b)
                counts[ia, ib] += 1
                counts[ib, ia] += 1
                if vals[a] < vals[b]:
                    wins[ia, ib] += 1
                elif vals[b] < vals[a]:
                    wins[ib, ia] += 1
                else:
                    wins[ia, ib] += 0.5
                    wins[ib, ia] += 0.5
    if counts.sum() == 0:
        raise ValueError("no overlapping finite rmse records to compare")
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(counts > 0, wins / np.maximum(counts, 1), np.nan)
    np.fill_diagonal(out, np.nan)
    return methods, out


def beta_sweep(
    config: ExperimentConfig, grid: np.ndarray | None = None, points: int = 21
) -> ResultsTable:
    """Re-run the configured RRM method(s) once per beta value on the grid.

    Every run reuses ``config.master_seed``, so all grid points see identical
    splits and the curves are paired.
    """
    if grid is None:
        grid = np.linspace(0.0, 5.0, points)
    rrm_methods = [m for m in config.methods if m.kind == "rrm"]
    if not rrm_methods:
        raise ValueError("beta_sweep requires an rrm method in the config")
    table = ResultsTable()
    for beta in np.asarray(grid, dtype=np.float64).tolist():
        methods = tuple(replace(m, beta=beta) for m in rrm_methods)
        sub = run_repeated_holdout(replace(config, methods=methods))
        for r in sub.records:
            table.append(replace(r, params=f"beta={beta!r} {r.params}"))
    return table


def gamma_sweep(config: ExperimentConfig, grid: np.ndarray | None = None) -> ResultsTable:
    """Re-run every configured method once per gamma, substituting gamma into
    each kernel spec."""
    if grid is None:
        grid = 2.0 ** np.arange(-3, 4, dtype=np.float64)
    table = ResultsTable()
    for gamma in np.asarray(grid, dtype=np.float64).tolist():
        methods = tuple(m.with_gamma(gamma) for m in config.methods)
        sub = run_repeated_holdout(replace(config, methods=methods))
        for r in sub.records:
            table.append(replace(r, params=f"gamma_sweep={gamma!r} {r.params}"))
    return table


def _sweep_values(table: ResultsTable, tag: str) -> list[float]:
    vals: dict[float, None] = {}
    for r in table.records:
        if r.params.startswith(f"{tag}="):
            vals.setdefault(float(r.params.split(" ", 1)[0].split("=", 1)[1]), None)
    return list(vals)


def _zscore(v: np.ndarray) -> np.ndarray:
    sd = v.std(ddof=1) if v.size > 1 else 0.0
    if sd == 0.0:
        return np.zeros_like(v)
    return (v - v.mean()) / sd


def summarize_beta_sweep(table: ResultsTable) -> list[dict]:
    """Per-beta mean RMSE and agreement, raw and z-scored across the grid."""
    betas = _sweep_values(table, "beta")
    rows = []
    for beta in betas:
        prefix = f"beta={beta!r} "
        r = [x.value for x in table.records
             if x.metric == "rmse" and x.params.startswith(prefix) and np.isfinite(x.value)]
        a = [x.value for x in table.records
             if x.metric == "agreement" and x.params.startswith(prefix) and np.isfinite(x.value)]
        rows.append({
            "beta": beta,
            "mean_rmse": float(np.mean(r)) if r else float("nan"),
            "mean_agreement": float(np.mean(a)) if a else float("nan"),
        })
    rmse_z = _zscore(np.array([row["mean_rmse"] for row in rows]))
    agr_z = _zscore(np.array([row["mean_agreement"] for row in rows]))
    for row, rz, az in zip(rows, rmse_z, agr_z):
        row["rmse_standardized"] = float(rz)
        row["agreement_standardized"] = float(az)
    return rows


def summarize_gamma_sweep(table: ResultsTable) -> list[dict]:
    """Per-(gamma, method) mean RMSE and mean error score."""
    gammas = _sweep_values(table, "gamma_sweep")
    rows = []
    for gamma in gammas:
        prefix = f"gamma_sweep={gamma!r} "
        methods: dict[str, None] = {}
        for x in table.records:
            if x.params.startswith(prefix):
                methods.setdefault(x.method, None)
        for method in methods:
            r = [x.value for x in table.records
                 if x.metric == "rmse" and x.method == method
                 and x.params.startswith(prefix) and np.isfinite(x.value)]
            e = [x.value for x in table.records
                 if x.metric == "error_score" and x.method == method
                 and x.params.startswith(prefix) and np.isfinite(x.value)]
            rows.append({
                "gamma": gamma,
                "method": method,
                "mean_rmse": float(np.mean(r)) if r else float("nan"),
                "mean_error_score": float(np.mean(e)) if e else float("nan"),
            })
    return rows


def summarize_results(table: ResultsTable) -> list[dict]:
    """Per-(dataset, method) means of every recorded metric."""
    keys: dict[tuple[str, str], None] = {}
    for r in table.records:
        keys.setdefault((r.dataset, r.method), None)
    rows = []
    for dataset, method in keys:
        row: dict = {"dataset": dataset, "method": method}
        for metric in ("rmse", "error_score", "agreement"):
            v = table.values(metric, method=method, dataset=dataset)
            v = v[np.isfinite(v)]
            row[f"mean_{metric}"] = float(v.mean()) if v.size else float("nan")
            row[f"n_{metric}"] = int(v.size)
        rows.append(row)
    return rows


def summary_to_csv(rows: list[dict], path: str) -> None:
    if not rows:
        atomic_write_text(path, "\n")
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = list(rows[0])
    w.writerow(cols)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in (row[c] for c in cols)])
    atomic_write_text(path, buf.getvalue())


def summary_to_text(rows: list[dict]) -> str:
    """Aligned plain-text rendering of a summary table."""
    if not rows:
        return "(no results)\n"
    cols = list(rows[0])
    cells = [[_fmt_cell(row[c]) for c in cols] for row in rows]
    widths = [max(len(c), max(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _fmt_cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)
