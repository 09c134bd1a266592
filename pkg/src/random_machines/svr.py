"""Epsilon-insensitive support vector regression trained by SMO on the dual.

The solver works on the 2n-variable dual (one alpha and one alpha' per
observation, both boxed in [0, C], tied by sum(alpha - alpha') = 0) and picks
working pairs with the maximal-violating-pair rule refined by a second-order
gain estimate for the partner index. The prediction function is
f(x) = sum_k coeffs_k * K(sv_k, x) + bias.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .kernels import KernelSpec, gram_matrix

_TAU = 1e-12
_PRUNE_TOL = 1e-12


class ConvergenceError(RuntimeError):
    """Solver hit the iteration cap before reaching the KKT tolerance."""

    def __init__(self, iterations: int, max_violation: float):
        self.iterations = iterations
        self.max_violation = max_violation
        super().__init__(
            f"SMO did not converge within {iterations} iterations "
            f"(max KKT violation {max_violation:.3e})"
        )


@dataclass(frozen=True)
class SvrParams:
    C: float = 1.0
    epsilon: float = 0.1
    tol: float = 1e-3
    max_iter: int | None = None  # None -> 10_000 * n

    def __post_init__(self) -> None:
        if not (np.isfinite(self.C) and self.C > 0):
            raise ValueError(f"C must be positive, got {self.C!r}")
        if not (np.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon!r}")
        if not (np.isfinite(self.tol) and self.tol > 0):
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError(f"max_iter must be positive, got {self.max_iter!r}")

    def iteration_cap(self, n: int) -> int:
        return self.max_iter if self.max_iter is not None else 10_000 * n


@dataclass(frozen=True)
class SvrModel:
    """Trained model: pruned dual coefficients plus their support rows.

    ``support_indices`` maps each retained coefficient back to its row in the
    training matrix, which lets diagnostics reconstruct the full dual vector.
    """

    support_vectors: np.ndarray
    coeffs: np.ndarray
    bias: float
    kernel: KernelSpec
    params: SvrParams
    support_indices: np.ndarray = field(repr=False)
    n_train: int = field(repr=False, default=0)
    n_iter: int = field(repr=False, default=0)

    def __post_init__(self) -> None:
        for arr in (self.support_vectors, self.coeffs, self.support_indices):
            arr.setflags(write=False)

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]


@dataclass(frozen=True)
class KktReport:
    complementary_slackness: float
    box_violation: float
    equality_residual: float

    def max_residual(self) -> float:
        return max(self.complementary_slackness, self.box_violation, self.equality_residual)


@numba.njit(cache=True)
def _smo(K, y, C, eps, tol, max_iter):  # pragma: no cover - exercised via train_svr
    n = y.shape[0]
    a = np.zeros(n)
    ap = np.zeros(n)
    eta = np.zeros(n)  # eta[t] = sum_j (a[j] - ap[j]) * K[j, t]
    Kd = np.empty(n)
    for t in range(n):
        Kd[t] = K[t, t]

    it = 0
    gap = np.inf
    while it < max_iter:
        # pass 1: maximal violating value over I_up, minimal over I_low
        i = -1
        i_side = 0
        m = -np.inf
        low = np.inf
        for t in range(n):
            e = eta[t]
            vu = y[t] - eps - e
            vl = y[t] + eps - e
            if a[t] < C and vu > m:
                m = vu
                i = t
                i_side = 0
            if ap[t] > 0.0 and vl > m:
                m = vl
                i = t
                i_side = 1
            if a[t] > 0.0 and vu < low:
                low = vu
            if ap[t] < C and vl < low:
                low = vl
        gap = m - low
        if gap <= tol or i < 0:
            break

        # pass 2: partner maximizing the second-order gain d^2 / quad
        Ki = K[i]
        Kdi = Kd[i]
        j = -1
        j_side = 0
        vj = 0.0
        best = 0.0
        for t in range(n):
            e = eta[t]
            q = Kdi + Kd[t] - 2.0 * Ki[t]
            if q < _TAU:
                q = _TAU
            if a[t] > 0.0:
                v = y[t] - eps - e
                d = m - v
                if d > 0.0:
                    g = d * d / q
                    if g > best:
                        best = g
                        j = t
                        j_side = 0
                        vj = v
            if ap[t] < C:
                v = y[t] + eps - e
                d = m - v
                if d > 0.0:
                    g = d * d / q
                    if g > best:
                        best = g
                        j = t
                        j_side = 1
                        vj = v
        if j < 0:
            break

        quad = Kdi + Kd[j] - 2.0 * Ki[j]
        if quad < _TAU:
            quad = _TAU
        step = (m - vj) / quad
        cap_i = (C - a[i]) if i_side == 0 else ap[i]
        cap_j = a[j] if j_side == 0 else (C - ap[j])
        if step > cap_i:
            step = cap_i
        if step > cap_j:
            step = cap_j

        if i_side == 0:
            a[i] += step
            if a[i] > C:
                a[i] = C
        else:
            ap[i] -= step
            if ap[i] < 0.0:
                ap[i] = 0.0
        if j_side == 0:
            a[j] -= step
            if a[j] < 0.0:
                a[j] = 0.0
        else:
            ap[j] += step
            if ap[j] > C:
                ap[j] = C

        if i != j:
            Kj = K[j]
            for t in range(n):
                eta[t] += step * (Ki[t] - Kj[t])
        it += 1

    # bias: average over free dual variables, else midpoint of the KKT interval
    nf = 0
    bsum = 0.0
    for t in range(n):
        e = eta[t]
        if 0.0 < a[t] < C:
            bsum += y[t] - eps - e
            nf += 1
        if 0.0 < ap[t] < C:
            bsum += y[t] + eps - e
            nf += 1
    if nf > 0:
        bias = bsum / nf
    else:
        hi = -np.inf
        lo = np.inf
        for t in range(n):
            e = eta[t]
            vu = y[t] - eps - e
            vl = y[t] + eps - e
            if a[t] < C and vu > hi:
                hi = vu
            if ap[t] > 0.0 and vl > hi:
                hi = vl
            if a[t] > 0.0 and vu < lo:
                lo = vu
            if ap[t] < C and vl < lo:
                lo = vl
        bias = 0.5 * (hi + lo)
    return a, ap, bias, it, gap


def _validate_training_data(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValueError(f"y must be a length-{X.shape[0]} vector, got shape {y.shape}")
    if X.shape[0] < 2:
        raise ValueError(f"need at least 2 training rows, got {X.shape[0]}")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    if not np.all(np.isfinite(y)):
        raise ValueError("y contains non-finite values")
    return X, y


def train_svr(
    X: np.ndarray,
    y: np.ndarray,
    kernel: KernelSpec,
    params: SvrParams = SvrParams(),
    rng: np.random.Generator | None = None,
) -> SvrModel:
    """Fit an epsilon-SVR by solving the kernelized dual to KKT tolerance.

    ``rng`` is accepted for interface uniformity with the ensemble trainers;
    the maximal-violating-pair solver is deterministic and does not consume
    randomness.
    """
    del rng
    X, y = _validate_training_data(X, y)
    n = X.shape[0]
    K = gram_matrix(kernel, X)
    a, ap, bias, n_iter, gap = _smo(
        K, y, float(params.C), float(params.epsilon), float(params.tol),
        params.iteration_cap(n),
    )
    if gap > params.tol:
        raise ConvergenceError(n_iter, float(gap))
    beta = a - ap
    keep = np.abs(beta) >= _PRUNE_TOL
    idx = np.flatnonzero(keep)
    return SvrModel(
        support_vectors=X[idx].copy(),
        coeffs=beta[idx].copy(),
        bias=float(bias),
        kernel=kernel,
        params=params,
        support_indices=idx,
        n_train=n,
        n_iter=int(n_iter),
    )


def predict_svr(model: SvrModel, X: np.ndarray) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    if X.shape[1] != model.n_features:
        raise ValueError(
            f"X has {X.shape[1]} features, model expects {model.n_features}"
        )
    if model.coeffs.size == 0:
        return np.full(X.shape[0], model.bias)
    K = gram_matrix(model.kernel, X, model.support_vectors)
    return K @ model.coeffs + model.bias


def kkt_report(model: SvrModel, X: np.ndarray, y: np.ndarray) -> KktReport:
    """Residuals of the dual optimality conditions on the model's training set."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = X.shape[0]
    C = model.params.C
    eps = model.params.epsilon
    beta = np.zeros(n)
    beta[model.support_indices] = model.coeffs
    r = y - predict_svr(model, X)  # y_i - f(x_i)

    at_upper = np.isclose(beta, C, rtol=0.0, atol=1e-12)
    at_lower = np.isclose(beta, -C, rtol=0.0, atol=1e-12)
    zero = beta == 0.0
    free_pos = (beta > 0) & ~at_upper
    free_neg = (beta < 0) & ~at_lower

    viol = np.zeros(n)
    viol[zero] = np.maximum(0.0, np.abs(r[zero]) - eps)
    viol[free_pos] = np.abs(r[free_pos] - eps)
    viol[free_neg] = np.abs(r[free_neg] + eps)
    viol[at_upper] = np.maximum(0.0, eps - r[at_upper])
    viol[at_lower] = np.maximum(0.0, r[at_lower] + eps)

    box = float(max(0.0, np.max(np.abs(beta), initial=0.0) - C))
    return KktReport(
        complementary_slackness=float(viol.max(initial=0.0)),
        box_violation=box,
        equality_residual=float(abs(beta.sum())),
    )


def dual_objective(model: SvrModel, X: np.ndarray, y: np.ndarray) -> float:
    """Value of the maximized dual at the model's coefficients.

    W(beta) = -1/2 beta^T K beta + beta^T y - eps * sum|alpha_i + alpha'_i|;
    after training alpha and alpha' never overlap, so the last sum is |beta|.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    beta = np.zeros(X.shape[0])
    beta[model.support_indices] = model.coeffs
    K = gram_matrix(model.kernel, X)
    eps = model.params.epsilon
    return float(-0.5 * beta @ (K @ beta) + beta @ y - eps * np.abs(beta).sum())
