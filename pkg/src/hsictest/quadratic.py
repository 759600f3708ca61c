"""Exact quadratic-time dependence statistics.

``hsic_biased`` is the V-statistic (1/m^2) Tr(Kx H Ky H); ``hsic_unbiased``
is the U-statistic in its O(m^2) three-term form over diagonal-zeroed
matrices. ``dcor`` normalises the V-statistic by the Frobenius norms of the
centered Gram matrices. ``sub_corr`` / ``sub_hsic`` average squared
per-dimension dependence scores as simple multivariate baselines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, InputError
from .kernels import GramMatrix, KernelSpec, center_gram, gram, strip_diagonal


@dataclass
class PairedSample:
    """Two row-aligned observation matrices drawn from a joint distribution."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        self.X = _sample_matrix(self.X, "X")
        self.Y = _sample_matrix(self.Y, "Y")
        if self.X.shape[0] != self.Y.shape[0]:
            raise InputError(
                f"row counts differ: X has {self.X.shape[0]}, Y has {self.Y.shape[0]}"
            )
        if self.X.shape[0] < 1:
            raise InputError("sample is empty")

    @property
    def m(self) -> int:
        return self.X.shape[0]

    def rows(self, idx) -> "PairedSample":
        return PairedSample(self.X[idx], self.Y[idx])

    def with_y_rows(self, idx) -> "PairedSample":
        return PairedSample(self.X, self.Y[idx])


def _sample_matrix(A, name):
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2:
        raise InputError(f"{name} must be 1-d or 2-d, got ndim={A.ndim}")
    if not np.all(np.isfinite(A)):
        raise InputError(f"{name} contains non-finite entries")
    return A


def _check_pair(Kx: GramMatrix, Ky: GramMatrix):
    if Kx.centered or Ky.centered or Kx.diag_zeroed or Ky.diag_zeroed:
        raise InputError("statistics expect raw (uncentered) Gram matrices")
    if Kx.m != Ky.m:
        raise InputError(f"Gram sizes differ: {Kx.m} vs {Ky.m}")


def hsic_biased(Kx: GramMatrix, Ky: GramMatrix) -> float:
    """V-statistic (1/m^2) Tr(Kx H Ky H); nonnegative up to rounding."""
    _check_pair(Kx, Ky)
    m = Kx.m
    KxC = center_gram(Kx).entries
    KyC = center_gram(Ky).entries
    return float(np.vdot(KxC, KyC)) / (m * m)


def hsic_biased_centered(KxC: np.ndarray, KyC: np.ndarray) -> float:
    """V-statistic from already-centered Gram entries (fast path)."""
    m = KxC.shape[0]
    return float(np.vdot(KxC, KyC)) / (m * m)


def hsic_unbiased(Kx: GramMatrix, Ky: GramMatrix) -> float:
    """U-statistic estimator; unbiased, may be negative. Requires m >= 4."""
    _check_pair(Kx, Ky)
    m = Kx.m
    if m < 4:
        raise InputError(f"unbiased estimator needs m >= 4, got {m}")
    Kt = strip_diagonal(Kx).entries
    Lt = strip_diagonal(Ky).entries
    return _unbiased_from_tilde(Kt, Lt, m)


def _unbiased_from_tilde(Kt: np.ndarray, Lt: np.ndarray, m: int) -> float:
    trace_term = float(np.vdot(Kt, Lt))
    krow = Kt.sum(axis=1)
    lrow = Lt.sum(axis=1)
    sum_term = float(krow.sum()) * float(lrow.sum()) / ((m - 1) * (m - 2))
    cross_term = 2.0 / (m - 2) * float(krow @ lrow)
    return (trace_term + sum_term - cross_term) / (m * (m - 3))


def dcor(Kx: GramMatrix, Ky: GramMatrix) -> float:
    """Normalised V-statistic <HKxH, HKyH> / (||HKxH||_F ||HKyH||_F)."""
    _check_pair(Kx, Ky)
    KxC = center_gram(Kx).entries
    KyC = center_gram(Ky).entries
    nx = float(np.linalg.norm(KxC))
    ny = float(np.linalg.norm(KyC))
    if nx == 0.0 or ny == 0.0:
        raise DegenerateDataError("a centered Gram matrix is identically zero")
    return float(np.vdot(KxC, KyC)) / (nx * ny)


def sub_corr(sample: PairedSample) -> float:
    """Mean squared Pearson correlation of scalar Y against each X dimension."""
    if sample.Y.shape[1] != 1:
        raise InputError("sub_corr requires scalar Y")
    if sample.m < 4:
        raise InputError("sub_corr needs m >= 4")
    y = sample.Y[:, 0]
    yc = y - y.mean()
    sy = float(np.sqrt((yc**2).sum()))
    if sy == 0.0:
        raise DegenerateDataError("Y has zero variance")
    total = 0.0
    for j in range(sample.X.shape[1]):
        xc = sample.X[:, j] - sample.X[:, j].mean()
        sx = float(np.sqrt((xc**2).sum()))
        if sx == 0.0:
            raise DegenerateDataError(f"X column {j} has zero variance")
        total += (float(xc @ yc) / (sx * sy)) ** 2
    return total / sample.X.shape[1]


def sub_hsic(sample: PairedSample, spec_y: KernelSpec, spec_x: KernelSpec) -> float:
    """Mean squared biased HSIC of Y against each X dimension."""
    if sample.m < 4:
        raise InputError("sub_hsic needs m >= 4")
    Ky = gram(spec_y, sample.Y)
    total = 0.0
    for j in range(sample.X.shape[1]):
        Kj = gram(spec_x, sample.X[:, j : j + 1])
        total += hsic_biased(Kj, Ky) ** 2
    return total / sample.X.shape[1]
