"""Dataset container, CSV ingestion, and feature preprocessing.

Continuous features are standardized to zero mean and unit (sample) standard
deviation; categorical features become one indicator column per level, with
every level kept. The per-source-column schema recorded on the dataset lets a
saved model re-apply the identical transform to new data.
"""

from __future__ import annotations

import csv
import os
import tempfile
import warnings
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ColumnMeta:
    name: str
    kind: str  # "continuous" | "categorical" (an indicator column)


@dataclass(frozen=True)
class Scaling:
    columns: tuple[str, ...]
    means: np.ndarray
    sds: np.ndarray


@dataclass
class Dataset:
    features: np.ndarray
    target: np.ndarray
    columns: list[ColumnMeta]
    scaling: Scaling | None = None
    # per-source-column transform description, in original file order
    schema: list[dict] = field(default_factory=list)
    target_name: str = "y"
    name: str = "data"

    def __post_init__(self) -> None:
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.target = np.ascontiguousarray(self.target, dtype=np.float64)
        if self.features.ndim != 2 or self.target.ndim != 1:
            raise ValueError("features must be 2-D and target 1-D")
        if self.features.shape[0] != self.target.shape[0]:
            raise ValueError("features and target row counts differ")
        if self.features.shape[1] != len(self.columns):
            raise ValueError("column metadata does not match feature width")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def subset(self, idx: np.ndarray) -> "Dataset":
        return Dataset(
            features=self.features[idx],
            target=self.target[idx],
            columns=self.columns,
            scaling=self.scaling,
            schema=self.schema,
            target_name=self.target_name,
            name=self.name,
        )


def _format_float(x: float) -> str:
    return repr(float(x))


def atomic_write_text(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp_", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(dataset: Dataset, path: str) -> None:
    """Write features plus target, floats in shortest round-trip form."""
    rows = [[c.name for c in dataset.columns] + [dataset.target_name]]
    for i in range(dataset.n):
        rows.append(
            [_format_float(v) for v in dataset.features[i]] + [_format_float(dataset.target[i])]
        )
    atomic_write_text(path, "\n".join(",".join(r) for r in rows) + "\n")


def _parse_rows(path: str) -> tuple[list[str], list[list[str]]]:
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row") from None
        rows = [r for r in reader if r and any(cell.strip() for cell in r)]
    return [h.strip() for h in header], rows


def load_csv(
    path: str,
    target_column: str = "y",
    categorical_columns: tuple[str, ...] = (),
    scale: bool = True,
    name: str | None = None,
) -> Dataset:
    """Parse a CSV into a modelling-ready dataset.

    Rows with unparseable or missing values are dropped (with a reported
    count). With ``scale=True`` continuous columns are standardized and
    constant columns dropped with a warning.
    """
    header, raw_rows = _parse_rows(path)
    if target_column not in header:
        raise ValueError(f"{path}: target column {target_column!r} not in header {header}")
    categorical = set(categorical_columns)
    unknown = categorical - set(header)
    if unknown:
        raise ValueError(f"{path}: categorical columns not in header: {sorted(unknown)}")
    tgt_idx = header.index(target_column)
    feat_cols = [(i, h) for i, h in enumerate(header) if i != tgt_idx]

    kept_rows = []
    dropped = 0
    for row in raw_rows:
        if len(row) != len(header):
            dropped += 1
            continue
        ok = True
        parsed: list[object] = []
        for i, h in feat_cols:
            cell = row[i].strip()
            if h in categorical:
                if cell == "":
                    ok = False
                    break
                parsed.append(cell)
            else:
                try:
                    v = float(cell)
                except ValueError:
                    ok = False
                    break
                if not np.isfinite(v):
                    ok = False
                    break
                parsed.append(v)
        if ok:
            try:
                t = float(row[tgt_idx].strip())
            except ValueError:
                ok = False
            else:
                ok = np.isfinite(t)
        if not ok:
            dropped += 1
            continue
        kept_rows.append((parsed, t))
    if dropped:
        warnings.warn(f"{path}: dropped {dropped} rows with missing/unparseable values", stacklevel=2)
    if not kept_rows:
        raise ValueError(f"{path}: no usable rows")

    n = len(kept_rows)
    target = np.array([t for _, t in kept_rows])

    schema: list[dict] = []
    blocks: list[np.ndarray] = []
    columns: list[ColumnMeta] = []
    for pos, (i, h) in enumerate(feat_cols):
        if h in categorical:
            values = [r[pos] for r, _ in kept_rows]
            levels = sorted(set(values))
            onehot = np.zeros((n, len(levels)))
            index = {lv: k for k, lv in enumerate(levels)}
            for r, v in enumerate(values):
                onehot[r, index[v]] = 1.0
            blocks.append(onehot)
            columns.extend(ColumnMeta(f"{h}={lv}", "categorical") for lv in levels)
            schema.append({"name": h, "kind": "categorical", "levels": levels})
        else:
            col = np.array([r[pos] for r, _ in kept_rows], dtype=np.float64)
            entry: dict = {"name": h, "kind": "continuous"}
            if scale:
                mean = float(col.mean())
                sd = float(col.std(ddof=1)) if n > 1 else 0.0
                if sd == 0.0:
                    warnings.warn(f"{path}: dropping constant column {h!r}", stacklevel=2)
                    entry["dropped"] = True
                    schema.append(entry)
                    continue
                col = (col - mean) / sd
                entry["mean"] = mean
                entry["sd"] = sd
            blocks.append(col[:, None])
            columns.append(ColumnMeta(h, "continuous"))
            schema.append(entry)

    if not blocks:
        raise ValueError(f"{path}: no usable feature columns")
    features = np.hstack(blocks)

    scaling = None
    if scale:
        scaled = [(e["name"], e["mean"], e["sd"]) for e in schema if "mean" in e]
        if scaled:
            names, means, sds = zip(*scaled)
            scaling = Scaling(tuple(names), np.array(means), np.array(sds))

    return Dataset(
        features=features,
        target=target,
        columns=columns,
        scaling=scaling,
        schema=schema,
        target_name=target_column,
        name=name or os.path.splitext(os.path.basename(path))[0],
    )


def apply_schema(
    schema: list[dict], target_column: str, path: str
) -> tuple[np.ndarray, np.ndarray | None]:
    """Transform a new CSV with a previously fitted schema.

    Returns the feature matrix and, when the target column is present, the
    target vector. Unseen categorical levels map to all-zero indicators.
    """
    header, raw_rows = _parse_rows(path)
    missing = [e["name"] for e in schema if e["name"] not in header]
    if missing:
        raise ValueError(f"{path}: missing required columns: {missing}")
    has_target = target_column in header
    tgt_idx = header.index(target_column) if has_target else -1

    col_idx = {h: i for i, h in enumerate(header)}
    feats: list[list[float]] = []
    targets: list[float] = []
    dropped = 0
    for row in raw_rows:
        if len(row) != len(header):
            dropped += 1
            continue
        out: list[float] = []
        ok = True
        for entry in schema:
            cell = row[col_idx[entry["name"]]].strip()
            if entry["kind"] == "categorical":
                if cell == "":
                    ok = False
                    break
                for lv in entry["levels"]:
                    out.append(1.0 if cell == lv else 0.0)
            else:
                try:
                    v = float(cell)
                except ValueError:
                    ok = False
                    break
                if not np.isfinite(v):
                    ok = False
                    break
                if entry.get("dropped"):
                    continue
                if "mean" in entry:
                    v = (v - entry["mean"]) / entry["sd"]
                out.append(v)
        if ok and has_target:
            try:
                t = float(row[tgt_idx].strip())
            except ValueError:
                ok = False
            else:
                ok = np.isfinite(t)
                if ok:
                    targets.append(t)
        if not ok:
            dropped += 1
            continue
        feats.append(out)
    if dropped:
        warnings.warn(f"{path}: dropped {dropped} rows with missing/unparseable values", stacklevel=2)
    if not feats:
        raise ValueError(f"{path}: no usable rows")
    X = np.asarray(feats, dtype=np.float64)
    return X, (np.asarray(targets, dtype=np.float64) if has_target else None)


def fit_standardizer(X: np.ndarray, continuous_mask: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Column means/sds fitted on training rows; constant columns flagged for dropping.

    Returns (means, sds, keep_mask). Only columns under ``continuous_mask``
    are standardized; indicator columns pass through untouched.
    """
    n, p = X.shape
    means = np.zeros(p)
    sds = np.ones(p)
    keep = np.ones(p, dtype=bool)
    for j in range(p):
        if not continuous_mask[j]:
            continue
        col = X[:, j]
        m = col.mean()
        s = col.std(ddof=1) if n > 1 else 0.0
        if s == 0.0:
            keep[j] = False
        else:
            means[j] = m
            sds[j] = s
    return means, sds, keep


def apply_standardizer(
    X: np.ndarray, means: np.ndarray, sds: np.ndarray, keep: np.ndarray
) -> np.ndarray:
    return ((X - means) / sds)[:, keep]
