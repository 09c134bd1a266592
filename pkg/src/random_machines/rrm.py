"""Regression random machines: bagged SVR with randomized kernel choice.

Pilot models (one per candidate kernel) are scored on a holdout set; their
standardized errors set the probability of each kernel being drawn for a
bootstrap member, and each member's out-of-bag error sets its weight in the
final convex combination. Both mappings use the same temperature-style
parameter beta: at beta = 0 kernels are drawn uniformly and members weigh
equally, while large beta concentrates on the single best kernel/member.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .bagging import BootstrapDraw, _draw_for_training, member_predictions
from .data import Dataset
from .kernels import KernelFamily, KernelSpec
from .metrics import rmse
from .svr import SvrModel, SvrParams, predict_svr, train_svr

MODEL_FORMAT = "random-machines/rrm-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class RrmConfig:
    kernels: tuple[KernelSpec, ...]
    n_members: int = 100
    beta: float = 2.0
    svr_params: SvrParams = SvrParams()

    def __post_init__(self) -> None:
        kernels = tuple(self.kernels)
        object.__setattr__(self, "kernels", kernels)
        if len(kernels) < 1:
            raise ValueError("need at least one kernel")
        if len(set(kernels)) != len(kernels):
            raise ValueError("kernels must be pairwise distinct")
        if self.n_members < 1:
            raise ValueError(f"n_members must be positive, got {self.n_members!r}")
        if not (np.isfinite(self.beta) and self.beta >= 0):
            raise ValueError(f"beta must be non-negative, got {self.beta!r}")


@dataclass(frozen=True)
class RrmModel:
    members: tuple[SvrModel, ...]
    member_weights: np.ndarray
    kernel_probs: np.ndarray
    pilot_errors: np.ndarray
    member_oob_errors: np.ndarray
    assigned_kernels: np.ndarray
    kernels: tuple[KernelSpec, ...]
    beta: float
    svr_params: SvrParams
    draws: tuple[BootstrapDraw, ...] = ()

    def __post_init__(self) -> None:
        for arr in (
            self.member_weights,
            self.kernel_probs,
            self.pilot_errors,
            self.member_oob_errors,
            self.assigned_kernels,
        ):
            arr.setflags(write=False)

    @property
    def n_members(self) -> int:
        return len(self.members)

    @property
    def n_features(self) -> int:
        return self.members[0].n_features


def stable_softmax(scores: np.ndarray) -> np.ndarray:
    """Softmax with max-subtraction; safe for very large magnitudes."""
    scores = np.asarray(scores, dtype=np.float64)
    shifted = scores - scores.max()
    e = np.exp(shifted)
    return e / e.sum()


def _standardize_errors(v: np.ndarray) -> np.ndarray:
    """Divide by the sample sd; a single value passes through unscaled and an
    all-equal vector maps to zeros (softmax is shift-invariant either way).

    The zero-sd test is relative: identical inputs can leave sub-ulp residue
    through the mean."""
    v = np.asarray(v, dtype=np.float64)
    if v.size < 2:
        return v.copy()
    sd = v.std(ddof=1)
    if sd <= 1e-12 * max(1.0, float(np.abs(v).max())):
        return np.zeros_like(v)
    return v / sd


def kernel_probabilities(delta: np.ndarray, beta: float) -> np.ndarray:
    """Sampling probability of each kernel from its standardized pilot error."""
    delta = np.asarray(delta, dtype=np.float64)
    if not np.all(np.isfinite(delta)):
        raise ValueError("delta must be finite")
    if not (np.isfinite(beta) and beta >= 0):
        raise ValueError(f"beta must be non-negative, got {beta!r}")
    return stable_softmax(-beta * delta)


def member_weights(oob_errors: np.ndarray, beta: float) -> np.ndarray:
    """Member weight from its out-of-bag error, standardized like the pilot errors."""
    oob_errors = np.asarray(oob_errors, dtype=np.float64)
    if not np.all(np.isfinite(oob_errors)):
        raise ValueError("oob_errors must be finite")
    if not (np.isfinite(beta) and beta >= 0):
        raise ValueError(f"beta must be non-negative, got {beta!r}")
    return stable_softmax(-beta * _standardize_errors(oob_errors))


def pilot_errors(
    train: Dataset,
    holdout: Dataset,
    kernels: tuple[KernelSpec, ...],
    params: SvrParams = SvrParams(),
) -> np.ndarray:
    """Standardized holdout RMSE of one pilot SVR per candidate kernel."""
    if holdout.n < 1:
        raise ValueError("holdout set is empty")
    if train.p != holdout.p:
        raise ValueError(f"train has {train.p} features, holdout has {holdout.p}")
    if len(kernels) < 1:
        raise ValueError("need at least one kernel")
    raw = np.empty(len(kernels))
    for r, kernel in enumerate(kernels):
        try:
            pilot = train_svr(train.features, train.target, kernel, params)
        except Exception as err:
            raise RuntimeError(f"pilot model for kernel {kernel} failed: {err}") from err
        raw[r] = rmse(holdout.target, predict_svr(pilot, holdout.features))
    return _standardize_errors(raw)


def train_rrm(
    train: Dataset,
    holdout: Dataset,
    config: RrmConfig,
    rng: np.random.Generator,
    pilot_train: Dataset | None = None,
) -> RrmModel:
    """Fit the full ensemble; all randomness flows from ``rng``.

    Pilots train on ``pilot_train`` when given (e.g. an inner split carved off
    the training set) and on ``train`` otherwise; bootstrap members always
    resample ``train``. Kernel indices for all members are drawn serially
    before any member trains, and each member's bootstrap uses a generator
    spawned per member, so execution order cannot change the model.
    """
    if train.n < 2:
        raise ValueError(f"need at least 2 training rows, got {train.n}")
    if holdout.n < 1:
        raise ValueError("holdout set is empty")

    delta = pilot_errors(pilot_train or train, holdout, config.kernels, config.svr_params)
    probs = kernel_probabilities(delta, config.beta)
    assigned = rng.choice(len(config.kernels), size=config.n_members, p=probs)
    child_rngs = rng.spawn(config.n_members)

    X, y = train.features, train.target
    members: list[SvrModel] = []
    draws: list[BootstrapDraw] = []
    oob = np.full(config.n_members, np.nan)
    for b in range(config.n_members):
        kernel = config.kernels[int(assigned[b])]
        draw = _draw_for_training(train.n, child_rngs[b])
        idx = draw.in_bag
        try:
            model = train_svr(X[idx], y[idx], kernel, config.svr_params)
        except Exception as err:
            raise RuntimeError(f"training of ensemble member {b} failed: {err}") from err
        members.append(model)
        draws.append(draw)
        if draw.oob.size > 0:
            oob[b] = rmse(y[draw.oob], predict_svr(model, X[draw.oob]))

    # members with no out-of-bag rows get the mean error so their weight is neutral
    missing = np.isnan(oob)
    if missing.all():
        oob[:] = 0.0
    elif missing.any():
        oob[missing] = oob[~missing].mean()

    return RrmModel(
        members=tuple(members),
        member_weights=member_weights(oob, config.beta),
        kernel_probs=probs,
        pilot_errors=delta,
        member_oob_errors=oob,
        assigned_kernels=assigned.astype(np.int64),
        kernels=config.kernels,
        beta=config.beta,
        svr_params=config.svr_params,
        draws=tuple(draws),
    )


def predict_rrm(model: RrmModel, X: np.ndarray) -> np.ndarray:
    """Weighted member predictions: a convex combination, weights summing to 1."""
    return model.member_weights @ member_predictions(model.members, X)


# ---------------------------------------------------------------------------
# model persistence (versioned JSON; floats survive round trips exactly)

def _kernel_to_json(k: KernelSpec) -> dict:
    out = {"family": k.family.value, "gamma": k.gamma}
    if k.degree is not None:
        out["degree"] = k.degree
    return out


def _kernel_from_json(d: dict) -> KernelSpec:
    return KernelSpec(KernelFamily(d["family"]), d["gamma"], d.get("degree"))


def model_to_dict(model: RrmModel, preprocess: dict | None = None) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "beta": model.beta,
        "svr_params": {
            "C": model.svr_params.C,
            "epsilon": model.svr_params.epsilon,
            "tol": model.svr_params.tol,
            "max_iter": model.svr_params.max_iter,
        },
        "kernels": [_kernel_to_json(k) for k in model.kernels],
        "kernel_probs": model.kernel_probs.tolist(),
        "pilot_errors": model.pilot_errors.tolist(),
        "member_weights": model.member_weights.tolist(),
        "member_oob_errors": model.member_oob_errors.tolist(),
        "assigned_kernels": model.assigned_kernels.tolist(),
        "n_features": model.n_features,
        "members": [
            {
                "bias": m.bias,
                "coeffs": m.coeffs.tolist(),
                "support_vectors": m.support_vectors.tolist(),
            }
            for m in model.members
        ],
        "preprocess": preprocess,
    }


def model_from_dict(doc: dict) -> tuple[RrmModel, dict | None]:
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a {MODEL_FORMAT} file")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    params = SvrParams(**doc["svr_params"])
    kernels = tuple(_kernel_from_json(k) for k in doc["kernels"])
    assigned = np.asarray(doc["assigned_kernels"], dtype=np.int64)
    p = int(doc["n_features"])
    members = []
    for j, m in enumerate(doc["members"]):
        coeffs = np.asarray(m["coeffs"], dtype=np.float64)
        sv = np.asarray(m["support_vectors"], dtype=np.float64).reshape(len(coeffs), p)
        members.append(
            SvrModel(
                support_vectors=sv,
                coeffs=coeffs,
                bias=float(m["bias"]),
                kernel=kernels[int(assigned[j])],
                params=params,
                support_indices=np.arange(len(coeffs)),
                n_train=len(coeffs),
            )
        )
    model = RrmModel(
        members=tuple(members),
        member_weights=np.asarray(doc["member_weights"], dtype=np.float64),
        kernel_probs=np.asarray(doc["kernel_probs"], dtype=np.float64),
        pilot_errors=np.asarray(doc["pilot_errors"], dtype=np.float64),
        member_oob_errors=np.asarray(doc["member_oob_errors"], dtype=np.float64),
        assigned_kernels=assigned,
        kernels=kernels,
        beta=float(doc["beta"]),
        svr_params=params,
    )
    return model, doc.get("preprocess")


def save_model(model: RrmModel, path: str, preprocess: dict | None = None) -> None:
    from .data import atomic_write_text

    atomic_write_text(path, json.dumps(model_to_dict(model, preprocess), indent=1) + "\n")


def load_model(path: str) -> tuple[RrmModel, dict | None]:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
