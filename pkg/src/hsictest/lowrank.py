"""Low-rank primal feature maps and the linear-time feature-space HSIC test.

Nystrom features project the kernel onto the span of n inducing points:
Phi = K_mn (K_nn + ridge I)^{-1/2}, so Phi Phi^T approximates the full Gram
matrix. Random Fourier features approximate a Gaussian kernel with paired
cos/sin projections at frequencies drawn from its spectral measure.

With centered features the biased HSIC statistic is the squared Frobenius
norm of the n_x x n_y empirical cross-covariance, and the spectral null of
the quadratic-time test carries over with eigenvalues taken from the primal
covariance matrices instead of the centered Gram matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, InputError, NumericalError, UnsupportedKernelError
from .kernels import KernelSpec, cross_gram, gram
from .nulls import (
    DEFAULT_NUM_DRAWS,
    DEFAULT_TRUNCATION_TOL,
    EigenSpectrum,
    NullModel,
    _canonical_order,
    _clamped_descending_spectrum,
    add_one_pvalue,
    draw_row_permutation,
    spectral_null_sample,
)
from .outcome import StageTimer, TestOutcome
from .quadratic import PairedSample

EIGEN_FLOOR = 1e-10


@dataclass
class FeatureMatrix:
    """Explicit m x n feature representation of a kernel."""

    phi: np.ndarray
    centered: bool = False
    method: str = "nystrom"
    source_spec: KernelSpec | None = None

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        if self.phi.ndim != 2 or self.phi.shape[1] < 1:
            raise InputError("feature matrix must be 2-d with at least one column")

    @property
    def m(self) -> int:
        return self.phi.shape[0]

    @property
    def n(self) -> int:
        return self.phi.shape[1]


@dataclass
class InducingSet:
    """Nystrom landmarks: the points spanning the projection subspace."""

    points: np.ndarray
    strategy: str = "subsample"

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim == 1:
            self.points = self.points[:, None]
        if self.points.shape[0] < 1:
            raise InputError("need at least one inducing point")
        if self.strategy not in ("subsample", "external"):
            raise InputError(f"unknown inducing strategy {self.strategy!r}")


@dataclass
class FrequencySet:
    """D/2 spectral-measure draws defining a random Fourier feature map."""

    omegas: np.ndarray
    D: int

    def __post_init__(self):
        self.omegas = np.asarray(self.omegas, dtype=float)
        if self.D % 2 != 0 or self.D < 2:
            raise InputError("D must be a positive even integer")
        if self.omegas.shape[0] != self.D // 2:
            raise InputError("need exactly D/2 frequency rows")


def subsample_inducing(X, n: int, rng) -> InducingSet:
    """Uniform without-replacement draw of n data rows as landmarks."""
    X = np.asarray(X, dtype=float)
    m = X.shape[0]
    if n > m:
        raise InputError(f"cannot subsample {n} landmarks from {m} rows")
    idx = rng.choice(m, size=n, replace=False)
    return InducingSet(X[idx], strategy="subsample")


def nystrom_features(spec: KernelSpec, X, inducing: InducingSet,
                     ridge: float | None = None) -> FeatureMatrix:
    """Phi = K_mn (K_nn + ridge I)^{-1/2} with a pseudo-inverse square root.

    Eigenvalues of the regularised landmark Gram below a relative floor are
    dropped. Default ridge is 1e-8 * trace(K_nn)/n; pass 0 to disable.
    """
    K_mn = cross_gram(spec, X, inducing.points)
    K_nn = gram(spec, inducing.points).entries
    n = K_nn.shape[0]
    if ridge is None:
        ridge = 1e-8 * float(np.trace(K_nn)) / n
    if ridge < 0:
        raise InputError("ridge must be nonnegative")
    try:
        vals, vecs = np.linalg.eigh(K_nn + ridge * np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"landmark eigendecomposition failed: {exc}") from exc
    keep = vals > EIGEN_FLOOR * max(vals[-1], 0.0)
    if not np.any(keep):
        raise DegenerateDataError("landmark Gram matrix is numerically zero")
    vecs = vecs[:, keep]
    inv_sqrt = (vecs * (1.0 / np.sqrt(vals[keep]))) @ vecs.T
    return FeatureMatrix(K_mn @ inv_sqrt, method="nystrom", source_spec=spec)


def draw_frequencies(spec: KernelSpec, dim: int, D: int, rng) -> FrequencySet:
    """Spectral-measure sample for a shift-invariant kernel (Gaussian only)."""
    if spec.family != "gaussian":
        raise UnsupportedKernelError(
            f"random Fourier features need a shift-invariant kernel with a known "
            f"spectral measure; got {spec.family!r}"
        )
    if D % 2 != 0 or D < 2:
        raise InputError("D must be a positive even integer")
    omegas = rng.normal(0.0, 1.0 / spec.sigma, size=(D // 2, dim))
    return FrequencySet(omegas, D)


def rff_features(spec: KernelSpec, X, D: int, rng,
                 frequencies: FrequencySet | None = None) -> FeatureMatrix:
    """Paired cos/sin features, scaled so that z(x).z(y) estimates k(x, y)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if frequencies is None:
        frequencies = draw_frequencies(spec, X.shape[1], D, rng)
    elif frequencies.D != D:
        raise InputError("frequency set does not match D")
    proj = X @ frequencies.omegas.T
    phi = np.empty((X.shape[0], D))
    phi[:, 0::2] = np.cos(proj)
    phi[:, 1::2] = np.sin(proj)
    phi *= np.sqrt(2.0 / D)
    return FeatureMatrix(phi, method="rff", source_spec=spec)


def center_features(F: FeatureMatrix) -> FeatureMatrix:
    """Subtract each column mean (H Phi)."""
    phi = F.phi - F.phi.mean(axis=0, keepdims=True)
    return FeatureMatrix(phi, centered=True, method=F.method, source_spec=F.source_spec)


def feature_hsic(Fx: FeatureMatrix, Fy: FeatureMatrix) -> float:
    """|| (1/m) Phi_x^T Phi_y ||_F^2 on centered features."""
    if Fx.m != Fy.m:
        raise InputError(f"row counts differ: {Fx.m} vs {Fy.m}")
    if not Fx.centered:
        Fx = center_features(Fx)
    if not Fy.centered:
        Fy = center_features(Fy)
    C = Fx.phi.T @ Fy.phi / Fx.m
    return float(np.vdot(C, C))


def feature_spectrum(F: FeatureMatrix,
                     truncation_tol: float = DEFAULT_TRUNCATION_TOL) -> np.ndarray:
    """Descending eigenvalues of the primal covariance (1/m) Phi^T Phi."""
    if not F.centered:
        raise InputError("feature_spectrum expects centered features")
    if not 0.0 <= truncation_tol < 1.0:
        raise InputError("truncation_tol must lie in [0, 1)")
    C = F.phi.T @ F.phi
    C = 0.5 * (C + C.T)
    try:
        vals = np.linalg.eigvalsh(C)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"covariance eigendecomposition failed: {exc}") from exc
    return _clamped_descending_spectrum(vals, F.m, truncation_tol)


@dataclass(frozen=True)
class LowRankConfig:
    """Configuration of a Nystrom or RFF independence test."""

    method: str
    spec_x: KernelSpec
    spec_y: KernelSpec
    num_features: int = 200
    null: str = "spectral"
    num_draws: int = DEFAULT_NUM_DRAWS
    num_permutations: int = 200
    ridge: float | None = None
    truncation_tol: float = DEFAULT_TRUNCATION_TOL
    alpha: float = 0.05
    # generator-backed landmark draws; None means subsample the data rows
    landmark_sampler_x: object = None
    landmark_sampler_y: object = None

    def __post_init__(self):
        if self.method not in ("nystrom", "rff"):
            raise InputError(f"unknown low-rank method {self.method!r}")
        if self.null not in ("spectral", "permutation"):
            raise InputError(f"unknown null estimation {self.null!r}")
        if self.num_features < 1:
            raise InputError("need at least one feature")
        if self.method == "rff" and self.num_features % 2 != 0:
            raise InputError("the feature count D must be even for rff")
        if not 0.0 < self.alpha < 1.0:
            raise InputError("alpha must lie in (0, 1)")


def _build_features(sample, config: LowRankConfig, rng):
    """X-side and Y-side feature matrices with independent randomness."""
    n = config.num_features
    if config.method == "rff":
        Fx = rff_features(config.spec_x, sample.X, n, rng)
        Fy = rff_features(config.spec_y, sample.Y, n, rng)
        return Fx, Fy
    if config.landmark_sampler_x is not None:
        ind_x = InducingSet(config.landmark_sampler_x(n, rng), strategy="external")
    else:
        ind_x = subsample_inducing(sample.X, n, rng)
    if config.landmark_sampler_y is not None:
        ind_y = InducingSet(config.landmark_sampler_y(n, rng), strategy="external")
    else:
        ind_y = subsample_inducing(sample.Y, n, rng)
    Fx = nystrom_features(config.spec_x, sample.X, ind_x, config.ridge)
    Fy = nystrom_features(config.spec_y, sample.Y, ind_y, config.ridge)
    return Fx, Fy


def lowrank_test(sample: PairedSample, config: LowRankConfig, rng=None,
                 seed: int | None = None) -> TestOutcome:
    """Feature-space HSIC test with a spectral or permutation null."""
    if rng is None:
        rng = np.random.default_rng(seed)
    timer = StageTimer()
    m = sample.m
    with timer.stage("statistic"):
        Fx, Fy = _build_features(sample, config, rng)
        FxC, FyC = center_features(Fx), center_features(Fy)
        statistic = m * feature_hsic(FxC, FyC)
    with timer.stage("null"):
        if config.null == "spectral":
            lam = feature_spectrum(FxC, config.truncation_tol)
            eta = feature_spectrum(FyC, config.truncation_tol)
            null = spectral_null_sample(
                EigenSpectrum(lam, eta, config.truncation_tol), config.num_draws, rng
            )
            count = int((null.samples >= statistic).sum())
            p = add_one_pvalue(count, config.num_draws)
        else:
            order, inverse = _canonical_order(sample.Y)
            draws = np.empty(config.num_permutations)
            for k in range(config.num_permutations):
                perm = draw_row_permutation(rng, order, inverse)
                shuffled = sample.with_y_rows(perm)
                Gx, Gy = _build_features(shuffled, config, rng)
                draws[k] = m * feature_hsic(Gx, Gy)
            null = NullModel.empirical(draws)
            p = add_one_pvalue(int((draws >= statistic).sum()), config.num_permutations)
    return TestOutcome(
        method=config.method,
        statistic=statistic,
        p_value=p,
        reject=p <= config.alpha,
        alpha=config.alpha,
        m=m,
        params={
            "kernel_x": config.spec_x.describe(),
            "kernel_y": config.spec_y.describe(),
            "num_features": config.num_features,
            "null": config.null,
            "num_draws": config.num_draws if config.null == "spectral" else None,
            "num_permutations": (
                config.num_permutations if config.null == "permutation" else None
            ),
        },
        seed=seed,
        seconds=timer.finish(),
        null_model=null,
    )
