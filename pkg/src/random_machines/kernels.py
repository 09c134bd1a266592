"""Kernel functions (linear, polynomial, gaussian, laplacian) and Gram matrices."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class KernelFamily(str, enum.Enum):
    LINEAR = "linear"
    POLYNOMIAL = "polynomial"
    GAUSSIAN = "gaussian"
    LAPLACIAN = "laplacian"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


# Short labels used in method names (SVR.Lin, BSVR.Gau, ...).
FAMILY_ABBREV = {
    KernelFamily.LINEAR: "Lin",
    KernelFamily.POLYNOMIAL: "Pol",
    KernelFamily.GAUSSIAN: "Gau",
    KernelFamily.LAPLACIAN: "Lap",
}


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family plus its hyperparameters.

    ``degree`` is meaningful only for the polynomial family; for every other
    family it is normalized to None so that two specs compare equal exactly
    when the family and the *used* hyperparameters match.
    """

    family: KernelFamily
    gamma: float = 1.0
    degree: int | None = None

    def __post_init__(self) -> None:
        family = KernelFamily(self.family)
        object.__setattr__(self, "family", family)
        gamma = float(self.gamma)
        if not np.isfinite(gamma) or gamma <= 0:
            raise ValueError(f"gamma must be a positive real, got {self.gamma!r}")
        object.__setattr__(self, "gamma", gamma)
        if family is KernelFamily.POLYNOMIAL:
            degree = 2 if self.degree is None else int(self.degree)
            if degree < 1:
                raise ValueError(f"degree must be >= 1, got {self.degree!r}")
            object.__setattr__(self, "degree", degree)
        else:
            object.__setattr__(self, "degree", None)

    @property
    def abbrev(self) -> str:
        return FAMILY_ABBREV[self.family]

    def with_gamma(self, gamma: float) -> "KernelSpec":
        return KernelSpec(self.family, gamma, self.degree)


def default_kernels(gamma: float = 1.0, degree: int = 2) -> list[KernelSpec]:
    """The four standard kernels, in linear/polynomial/gaussian/laplacian order."""
    return [
        KernelSpec(KernelFamily.LINEAR, gamma),
        KernelSpec(KernelFamily.POLYNOMIAL, gamma, degree),
        KernelSpec(KernelFamily.GAUSSIAN, gamma),
        KernelSpec(KernelFamily.LAPLACIAN, gamma),
    ]


def eval_kernel(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> float:
    """Evaluate K(x, y) for a single pair of vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape or x.size < 1:
        raise ValueError(f"x and y must be equal-length vectors, got {x.shape} and {y.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("kernel inputs must be finite")
    if spec.family is KernelFamily.LINEAR:
        return float(spec.gamma * np.dot(x, y))
    if spec.family is KernelFamily.POLYNOMIAL:
        return float((spec.gamma * np.dot(x, y)) ** spec.degree)
    diff = x - y
    if spec.family is KernelFamily.GAUSSIAN:
        return float(np.exp(-spec.gamma * np.dot(diff, diff)))
    # laplacian, Euclidean norm
    return float(np.exp(-spec.gamma * np.sqrt(np.dot(diff, diff))))


def _sq_dists(A: np.ndarray, B: np.ndarray, symmetric: bool) -> np.ndarray:
    sq_a = np.einsum("ij,ij->i", A, A)
    sq_b = sq_a if symmetric else np.einsum("ij,ij->i", B, B)
    d2 = sq_a[:, None] + sq_b[None, :] - 2.0 * (A @ B.T)
    np.maximum(d2, 0.0, out=d2)
    if symmetric:
        # exact zeros on the diagonal so e.g. gaussian grams have unit diagonal
        np.fill_diagonal(d2, 0.0)
    return d2


def gram_matrix(spec: KernelSpec, A: np.ndarray, B: np.ndarray | None = None) -> np.ndarray:
    """Pairwise kernel matrix with entry (i, j) = K(A_i, B_j).

    Passing ``B=None`` computes the symmetric Gram matrix of A with itself.
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    symmetric = B is None or B is A
    B = A if symmetric else np.ascontiguousarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2:
        raise ValueError("A and B must be 2-D matrices")
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"column mismatch: A has {A.shape[1]} features, B has {B.shape[1]}")
    if spec.family is KernelFamily.LINEAR:
        return spec.gamma * (A @ B.T)
    if spec.family is KernelFamily.POLYNOMIAL:
        return (spec.gamma * (A @ B.T)) ** spec.degree
    d2 = _sq_dists(A, B, symmetric)
    if spec.family is KernelFamily.GAUSSIAN:
        return np.exp(-spec.gamma * d2)
    return np.exp(-spec.gamma * np.sqrt(d2))
