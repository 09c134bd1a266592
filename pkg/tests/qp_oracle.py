"""Independent QP oracle for the epsilon-SVR dual.

Solves the 2n-variable box-plus-equality dual by accelerated projected
gradient with an exact piecewise-linear projection, sharing no code with the
production SMO path. Meant for small instances (n <= ~30).
"""

from __future__ import annotations

import numpy as np


def project_feasible(v: np.ndarray, n: int, C: float) -> np.ndarray:
    """Euclidean projection onto {z in [0, C]^2n : sum(z[:n]) - sum(z[n:]) = 0}.

    With w = s * v (s = +1 on the alpha block, -1 on the alpha' block) the
    projection is s * clip(w - rho, lo, hi) where rho solves the monotone
    piecewise-linear equation g(rho) = sum(clip(w - rho, lo, hi)) = 0.
    """
    m = 2 * n
    s = np.concatenate([np.ones(n), -np.ones(n)])
    w = s * v
    lo = np.where(s > 0, 0.0, -C)
    hi = np.where(s > 0, C, 0.0)

    bps = np.concatenate([w - lo, w - hi])
    bps.sort()
    g = np.clip(w[None, :] - bps[:, None], lo[None, :], hi[None, :]).sum(axis=1)
    # g is non-increasing: +nC at the left end, -nC at the right end
    k = int(np.searchsorted(-g, 0.0, side="left"))
    if k == 0:
        rho = bps[0]
    elif k >= m * 2:
        rho = bps[-1]
    else:
        g0, g1 = g[k - 1], g[k]
        if g0 == g1:
            rho = bps[k - 1]
        else:
            rho = bps[k - 1] + (bps[k] - bps[k - 1]) * g0 / (g0 - g1)
    return s * np.clip(w - rho, lo, hi)


def dual_objective_value(K: np.ndarray, y: np.ndarray, epsilon: float, z: np.ndarray) -> float:
    """Maximized dual W(alpha, alpha') at the stacked point z."""
    n = y.shape[0]
    a, ap = z[:n], z[n:]
    beta = a - ap
    return float(-0.5 * beta @ (K @ beta) + y @ beta - epsilon * (a + ap).sum())


def solve_dual_qp(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    epsilon: float,
    max_iter: int = 500_000,
    stat_tol: float = 1e-11,
) -> tuple[np.ndarray, float]:
    """Accelerated projected-gradient ascent on the 2n-variable dual.

    Returns the stacked (alpha, alpha') point and its dual objective. Stops
    on a stationarity residual (distance moved by one projected-gradient
    step) below ``stat_tol`` or at the iteration cap.
    """
    n = y.shape[0]
    p = np.concatenate([epsilon - y, epsilon + y])

    def grad(z):
        Kb = K @ (z[:n] - z[n:])
        return np.concatenate([Kb, -Kb]) + p

    def fmin(z):  # minimized objective (negated dual)
        return -dual_objective_value(K, y, epsilon, z)

    lam_max = float(np.linalg.eigvalsh((K + K.T) / 2.0).max())
    L = max(2.0 * lam_max, 1e-9)

    z = project_feasible(np.zeros(2 * n), n, C)
    v = z.copy()
    t = 1.0
    f_prev = fmin(z)
    best_z = z.copy()
    best_f = f_prev
    for it in range(max_iter):
        z_new = project_feasible(v - grad(v) / L, n, C)
        f_new = fmin(z_new)
        if f_new > f_prev:  # function restart keeps the scheme monotone
            v = z.copy()
            t = 1.0
            z_new = project_feasible(v - grad(v) / L, n, C)
            f_new = fmin(z_new)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        v = z_new + ((t - 1.0) / t_new) * (z_new - z)
        moved = np.max(np.abs(z_new - z))
        z, t, f_prev = z_new, t_new, f_new
        if f_new < best_f:
            best_f = f_new
            best_z = z_new.copy()
        if moved < stat_tol and it % 10 == 0:
            resid = np.max(np.abs(z - project_feasible(z - grad(z) / L, n, C)))
            if resid < stat_tol:
                break
    return best_z, -best_f


def random_instance(rng: np.random.Generator, n_max: int = 12, p_max: int = 3):
    """A small random training problem for oracle comparisons."""
    n = int(rng.integers(3, n_max + 1))
    p = int(rng.integers(1, p_max + 1))
    X = rng.normal(size=(n, p))
    y = rng.normal(size=n) + X @ rng.normal(size=p)
    return X, y
