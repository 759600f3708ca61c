"""Kernel evaluation, Gram matrices, centering and bandwidth selection.

Supported kernel families:

* ``gaussian``:   k(x, y) = exp(-||x - y||^2 / (2 sigma^2))
* ``linear``:     k(x, y) = x . y
* ``polynomial``: k(x, y) = (x . y + 1)^degree
* ``brownian``:   k(x, y) = (||x||^{2H} + ||y||^{2H} - ||x - y||^{2H}) / 2

All four are symmetric positive semidefinite on real vectors (the Brownian
family for 0 < H < 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import DegenerateDataError, InputError

FAMILIES = ("gaussian", "linear", "polynomial", "brownian")


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family plus its hyperparameters.

    Only the parameter relevant to ``family`` is consulted: ``sigma`` for
    gaussian, ``degree`` for polynomial, ``hurst`` for brownian.
    """

    family: str
    sigma: float = 1.0
    degree: int = 2
    hurst: float = 0.5

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"unknown kernel family {self.family!r}")
        if self.family == "gaussian" and not self.sigma > 0:
            raise InputError(f"gaussian bandwidth must be positive, got {self.sigma}")
        if self.family == "polynomial" and (
            int(self.degree) != self.degree or self.degree < 1
        ):
            raise InputError(f"polynomial degree must be an integer >= 1, got {self.degree}")
        if self.family == "brownian" and not 0 < self.hurst < 1:
            raise InputError(f"brownian parameter must lie in (0, 1), got {self.hurst}")

    def with_sigma(self, sigma: float) -> "KernelSpec":
        return KernelSpec(self.family, sigma=sigma, degree=self.degree, hurst=self.hurst)

    def describe(self) -> str:
        if self.family == "gaussian":
            return f"gaussian(sigma={self.sigma:.6g})"
        if self.family == "polynomial":
            return f"polynomial(degree={self.degree})"
        if self.family == "brownian":
            return f"brownian(hurst={self.hurst:.6g})"
        return "linear"


def gaussian_kernel(sigma: float) -> KernelSpec:
    return KernelSpec("gaussian", sigma=sigma)


def linear_kernel() -> KernelSpec:
    return KernelSpec("linear")


def polynomial_kernel(degree: int) -> KernelSpec:
    return KernelSpec("polynomial", degree=degree)


def brownian_kernel(hurst: float = 0.5) -> KernelSpec:
    return KernelSpec("brownian", hurst=hurst)


@dataclass
class GramMatrix:
    """A pairwise kernel matrix with bookkeeping flags.

    ``centered`` marks H K H; ``diag_zeroed`` marks K - diag(K). The two are
    produced by distinct operations and never both set.
    """

    entries: np.ndarray
    centered: bool = False
    diag_zeroed: bool = False

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise InputError("Gram matrix must be square")
        if self.centered and self.diag_zeroed:
            raise InputError("centered and diag_zeroed are mutually exclusive")

    @property
    def m(self) -> int:
        return self.entries.shape[0]


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InputError(f"expected a 2-d sample matrix, got ndim={X.ndim}")
    return X


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Evaluate the kernel on a single pair of equal-length vectors."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.ndim != 1:
        raise InputError(f"vector shapes differ: {x.shape} vs {y.shape}")
    return float(cross_gram(spec, x[None, :], y[None, :])[0, 0])


def cross_gram(spec: KernelSpec, A, B) -> np.ndarray:
    """Kernel evaluations between every row of A and every row of B."""
    A = _as_matrix(A)
    B = _as_matrix(B)
    if A.shape[1] != B.shape[1]:
        raise InputError(
            f"column dimensions differ: {A.shape[1]} vs {B.shape[1]}"
        )
    if spec.family == "linear":
        return A @ B.T
    if spec.family == "polynomial":
        return (A @ B.T + 1.0) ** spec.degree
    if spec.family == "gaussian":
        sq = _cross_sqdist(A, B)
        return np.exp(-sq / (2.0 * spec.sigma**2))
    # brownian
    h2 = 2.0 * spec.hurst
    na = np.einsum("ij,ij->i", A, A) ** spec.hurst
    nb = np.einsum("ij,ij->i", B, B) ** spec.hurst
    cross = _cross_sqdist(A, B) ** spec.hurst
    return 0.5 * (na[:, None] + nb[None, :] - cross)


def _cross_sqdist(A, B) -> np.ndarray:
    sa = np.einsum("ij,ij->i", A, A)
    sb = np.einsum("ij,ij->i", B, B)
    sq = sa[:, None] + sb[None, :] - 2.0 * (A @ B.T)
    np.maximum(sq, 0.0, out=sq)
    return sq


def gram(spec: KernelSpec, X) -> GramMatrix:
    """Symmetric Gram matrix of a sample."""
    X = _as_matrix(X)
    if X.shape[0] < 1:
        raise InputError("need at least one row")
    K = cross_gram(spec, X, X)
    # exact symmetry regardless of BLAS summation order
    K = 0.5 * (K + K.T)
    return GramMatrix(K)


def center_gram(K: GramMatrix) -> GramMatrix:
    """Conjugate by the centering matrix H = I - (1/m) 11^T.

    Idempotent up to rounding; accepts already-centered input.
    """
    if K.diag_zeroed:
        raise InputError("cannot center a diagonal-zeroed Gram matrix")
    E = K.entries
    row = E.mean(axis=1, keepdims=True)
    col = E.mean(axis=0, keepdims=True)
    grand = E.mean()
    return GramMatrix(E - row - col + grand, centered=True)


def strip_diagonal(K: GramMatrix) -> GramMatrix:
    """Copy of K with its diagonal set to zero (K-tilde)."""
    if K.centered:
        raise InputError("diagonal-zeroing applies to raw Gram matrices")
    E = K.entries.copy()
    np.fill_diagonal(E, 0.0)
    return GramMatrix(E, diag_zeroed=True)


def median_heuristic(
    X,
    max_points: int = 1000,
    rng: np.random.Generator | None = None,
    squared: bool = False,
) -> float:
    """Bandwidth from the median interpoint Euclidean distance.

    Pairs (i < j) of a uniform subsample of min(m, max_points) rows are used,
    so cost is bounded at O(max_points^2). With ``squared=True`` the value is
    sqrt(median of squared distances) instead of the median distance.
    """
    X = _as_matrix(X)
    m = X.shape[0]
    if m < 2:
        raise InputError("median heuristic needs at least 2 rows")
    if max_points < 2:
        raise InputError("max_points must be at least 2")
    if m > max_points:
        if rng is None:
            rng = np.random.default_rng(0)
        idx = rng.choice(m, size=max_points, replace=False)
        X = X[idx]
    d = pdist(X)
    if squared:
        sigma = float(np.sqrt(np.median(d**2)))
    else:
        sigma = float(np.median(d))
    if sigma == 0.0:
        raise DegenerateDataError("all sampled rows identical, bandwidth would be 0")
    return sigma
