"""Bootstrap resampling with out-of-bag tracking, and the bagged-SVR baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .kernels import KernelSpec
from .svr import SvrModel, SvrParams, predict_svr, train_svr

_MAX_REDRAWS = 100


@dataclass(frozen=True)
class BootstrapDraw:
    """One resample: ``in_bag`` keeps multiplicity, ``oob`` is the sorted complement."""

    in_bag: np.ndarray
    oob: np.ndarray

    def __post_init__(self) -> None:
        self.in_bag.setflags(write=False)
        self.oob.setflags(write=False)


def bootstrap_sample(n: int, rng: np.random.Generator) -> BootstrapDraw:
    """Draw n uniform indices with replacement; out-of-bag rows are the complement."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n!r}")
    in_bag = rng.integers(0, n, size=n)
    mask = np.ones(n, dtype=bool)
    mask[in_bag] = False
    return BootstrapDraw(in_bag=in_bag, oob=np.flatnonzero(mask))


def _draw_for_training(n: int, rng: np.random.Generator) -> BootstrapDraw:
    """Bootstrap draw with at least two distinct rows, redrawing when needed."""
    for _ in range(_MAX_REDRAWS):
        draw = bootstrap_sample(n, rng)
        if np.unique(draw.in_bag).size >= 2:
            return draw
    raise RuntimeError(f"could not draw a bootstrap sample with >=2 distinct rows from n={n}")


@dataclass(frozen=True)
class BaggedSvrModel:
    members: tuple[SvrModel, ...]
    kernel: KernelSpec
    draws: tuple[BootstrapDraw, ...]

    @property
    def n_members(self) -> int:
        return len(self.members)


def train_bagged_svr(
    data: Dataset,
    kernel: KernelSpec,
    n_members: int,
    params: SvrParams = SvrParams(),
    rng: np.random.Generator | None = None,
) -> BaggedSvrModel:
    """Train ``n_members`` SVRs on independent bootstrap samples of ``data``.

    Each member draws from a child generator spawned off ``rng``, so serial
    and parallel schedules would see identical resamples.
    """
    if n_members < 1:
        raise ValueError(f"n_members must be positive, got {n_members!r}")
    if data.n < 2:
        raise ValueError(f"need at least 2 rows, got {data.n}")
    rng = np.random.default_rng() if rng is None else rng
    X, y = data.features, data.target

    members = []
    draws = []
    for b, child in enumerate(rng.spawn(n_members)):
        draw = _draw_for_training(data.n, child)
        idx = draw.in_bag
        try:
            model = train_svr(X[idx], y[idx], kernel, params)
        except Exception as err:
            raise RuntimeError(f"training of bagging member {b} failed: {err}") from err
        members.append(model)
        draws.append(draw)
    return BaggedSvrModel(members=tuple(members), kernel=kernel, draws=tuple(draws))


def member_predictions(members: tuple[SvrModel, ...], X: np.ndarray) -> np.ndarray:
    """Stack per-member predictions into a (members, observations) matrix."""
    return np.vstack([predict_svr(m, X) for m in members])


def predict_bagged(model: BaggedSvrModel, X: np.ndarray) -> np.ndarray:
    """Unweighted mean of the member predictions."""
    return member_predictions(model.members, X).mean(axis=0)
