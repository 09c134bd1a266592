"""Synthetic regression scenarios used throughout the benchmark harness.

Eight generators: models 1-7 draw features uniformly on [0, 1]^p (most terms
act on the recentred value 2(x - 0.5)), model 8 draws standard normals.
Each model adds centered Gaussian noise except model 7, which is noiseless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import ColumnMeta, Dataset

MODEL_DIMS = {1: 2, 2: 8, 3: 4, 4: 4, 5: 8, 6: 6, 7: 4, 8: 6}

# Second argument of the noise term as printed per model (None = noiseless).
# Whether it is read as a variance or a standard deviation is the caller's
# choice via ``noise_arg``; variance is the default.
MODEL_NOISE_ARG = {1: 0.25, 2: 0.5, 3: 0.5, 4: 0.5, 5: 0.5, 6: 0.5, 7: None, 8: 1.0}


@dataclass(frozen=True)
class SimSpec:
    model_id: int
    n: int
    seed: int

    def __post_init__(self) -> None:
        if self.model_id not in MODEL_DIMS:
            raise ValueError(f"model_id must be in 1..8, got {self.model_id!r}")
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n!r}")


def tilde(x):
    """Recentre a [0, 1] value onto [-1, 1]."""
    return 2.0 * (np.asarray(x, dtype=np.float64) - 0.5)


def _surface(model_id: int, X: np.ndarray) -> np.ndarray:
    if model_id == 8:
        x1, x2, x3, x4, x5, x6 = X.T
        ax1 = np.abs(x1)
        safe = np.where(ax1 == 0.0, np.finfo(np.float64).eps, ax1)
        return (
            x1
            + 0.707 * x2**2
            + 2.0 * (x3 > 0)
            + 0.873 * np.log(safe) * np.abs(x3)
            + 0.894 * x2 * x4
            + 2.0 * (x5 > 0)
            + 0.464 * np.exp(x6)
        )
    t = tilde(X)
    if model_id == 1:
        return t[:, 0] ** 2 + np.exp(-t[:, 1] ** 2)
    if model_id == 2:
        t1, t2, t3, t4, t5, t6, t7, t8 = t.T
        return t1 * t2 + t3**2 - t4 * t7 + t5 * t8 - t6**2
    if model_id == 3:
        # last term keeps the raw (untransformed) fourth feature
        return -np.sin(t[:, 0]) + t[:, 1] ** 2 + t[:, 2] - np.exp(-X[:, 3] ** 2)
    if model_id == 4:
        t1, t2, t3, t4 = t.T
        s3 = np.sin(2 * np.pi * t3)
        s4 = np.sin(2 * np.pi * t4)
        c4 = np.cos(2 * np.pi * t4)
        return t1 + (2 * t2 - 1) ** 2 + 2 * s3 / (2 - s3) + s4 + 2 * c4 + 3 * s4**2 + 4 * c4**2
    if model_id == 5:
        t1, t2, t3, t4, t5, t6, t7, t8 = t.T
        return (
            (t1 > 0) * 1.0
            + t2**3
            + (t3 + t4 - t6 - t5 > 1 + t7) * 1.0
            + np.exp(-(t8**2))
        )
    if model_id == 6:
        t1, t2, t3, t4, t5, t6 = t.T
        return t1**2 + t2**2 * t3 * np.exp(-np.abs(t4)) + t6 - t5
    if model_id == 7:
        t1, t2, t3, t4 = t.T
        return t1 + 3 * t2**2 - 2 * np.exp(-t3) + t4
    raise ValueError(f"unknown model_id {model_id!r}")


def true_surface(model_id: int, x: np.ndarray) -> float:
    """Noiseless response at a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    p = MODEL_DIMS.get(model_id)
    if p is None:
        raise ValueError(f"model_id must be in 1..8, got {model_id!r}")
    if x.ndim != 1 or x.shape[0] != p:
        raise ValueError(f"model {model_id} expects a length-{p} vector, got shape {x.shape}")
    return float(_surface(model_id, x[None, :])[0])


def noise_sd(model_id: int, noise_arg: str = "variance") -> float:
    """Standard deviation of the additive noise under the chosen reading."""
    v = MODEL_NOISE_ARG[model_id]
    if v is None:
        return 0.0
    if noise_arg == "variance":
        return float(np.sqrt(v))
    if noise_arg == "sd":
        return float(v)
    raise ValueError(f"noise_arg must be 'variance' or 'sd', got {noise_arg!r}")


def generate(
    spec: SimSpec,
    noise_arg: str = "variance",
    include_noise: bool = True,
    noise_sd_override: float | None = None,
    name: str | None = None,
) -> Dataset:
    """Draw a dataset for the given scenario; deterministic in ``spec.seed``.

    ``noise_sd_override`` replaces the model's own noise level outright; it
    exists because the printed noise arguments are not always reconcilable
    with published benchmark results (see the repo README).
    """
    p = MODEL_DIMS[spec.model_id]
    rng = np.random.default_rng(spec.seed)
    if spec.model_id == 8:
        X = rng.standard_normal((spec.n, p))
    else:
        X = rng.uniform(size=(spec.n, p))
    y = _surface(spec.model_id, X)
    if not include_noise:
        sd = 0.0
    elif noise_sd_override is not None:
        sd = float(noise_sd_override)
    else:
        sd = noise_sd(spec.model_id, noise_arg)
    if sd > 0.0:
        y = y + sd * rng.standard_normal(spec.n)
    columns = [ColumnMeta(f"x{i + 1}", "continuous") for i in range(p)]
    return Dataset(
        features=X,
        target=np.asarray(y, dtype=np.float64),
        columns=columns,
        name=name or f"model{spec.model_id}_n{spec.n}",
    )
