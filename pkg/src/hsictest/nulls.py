"""Null-distribution estimation for the quadratic-time statistics.

Two routes to a p-value:

* permutation resampling of the Y rows, and
* the spectral approach: under independence, m times the biased statistic
  converges to sum_ij lambda_i eta_j N_ij^2 with N_ij iid standard normal,
  where the weights are eigenvalues of the centered kernel operators. The
  empirical spectra of the centered Gram matrices (divided by m) plug into
  that limit, and the null is simulated by Monte Carlo.

Permutations are drawn in a canonical row order derived from the data, so a
joint reordering of the observed (X, Y) rows leaves every resampled
statistic, and therefore the p-value, unchanged under a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, InputError, NumericalError
from .kernels import GramMatrix, KernelSpec, center_gram, gram
from .outcome import StageTimer, TestOutcome
from .quadratic import PairedSample, hsic_biased_centered

DEFAULT_NUM_DRAWS = 10_000
DEFAULT_TRUNCATION_TOL = 1e-10

# Bounds on the chi-square mixture: at most MAX_PAIRS weight pairs per draw
# (largest products kept), and chunks of at most CHUNK_SCALARS normals.
MAX_PAIRS = 1_000_000
MAX_SIDE = 6_400
CHUNK_SCALARS = 4_000_000


@dataclass
class EigenSpectrum:
    """Descending nonnegative eigenvalue estimates for the two kernel operators."""

    lambdas: np.ndarray
    etas: np.ndarray
    truncation_tol: float = DEFAULT_TRUNCATION_TOL

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=float)
        self.etas = np.asarray(self.etas, dtype=float)
        for name, v in (("lambdas", self.lambdas), ("etas", self.etas)):
            if v.ndim != 1:
                raise InputError(f"{name} must be a 1-d sequence")
            if np.any(v < 0):
                raise InputError(f"{name} must be nonnegative")
            if np.any(np.diff(v) > 0):
                raise InputError(f"{name} must be sorted descending")


@dataclass
class NullModel:
    """One estimated null distribution: empirical samples, a Gaussian, or a spectrum."""

    kind: str
    samples: np.ndarray | None = None
    variance: float | None = None
    spectrum: EigenSpectrum | None = None

    def __post_init__(self):
        payloads = {
            "empirical": self.samples is not None,
            "gaussian": self.variance is not None,
            "spectrum": self.spectrum is not None,
        }
        if self.kind not in payloads:
            raise InputError(f"unknown null model kind {self.kind!r}")
        if not payloads[self.kind] or sum(payloads.values()) != 1:
            raise InputError(f"null model {self.kind!r} must carry exactly its own payload")
        if self.kind == "empirical":
            self.samples = np.asarray(self.samples, dtype=float)
            if self.samples.size == 0 or not np.all(np.isfinite(self.samples)):
                raise InputError("empirical null needs nonempty finite samples")
        if self.kind == "gaussian" and not self.variance > 0:
            raise InputError("gaussian null needs positive variance")

    @classmethod
    def empirical(cls, samples) -> "NullModel":
        return cls("empirical", samples=samples)

    @classmethod
    def gaussian(cls, variance) -> "NullModel":
        return cls("gaussian", variance=variance)

    @classmethod
    def from_spectrum(cls, spectrum) -> "NullModel":
        return cls("spectrum", spectrum=spectrum)


def _canonical_order(Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lexicographic row order of Y and its inverse permutation."""
    order = np.lexsort(Y.T[::-1])
    inverse = np.empty_like(order)
    inverse[order] = np.arange(order.size)
    return order, inverse


def draw_row_permutation(rng, order, inverse) -> np.ndarray:
    """Uniform random permutation expressed in the canonical row order."""
    pi = rng.permutation(order.size)
    return order[pi[inverse]]


def add_one_pvalue(count_ge: int, num_resamples: int) -> float:
    return (1.0 + count_ge) / (1.0 + num_resamples)


def permutation_pvalue(statistic, sample: PairedSample, num_permutations: int, rng):
    """Permutation test of any statistic over a paired sample.

    X rows stay fixed; Y rows are uniformly permuted for each shuffle. The
    returned p-value uses the add-one correction (so p >= 1/(N+1)) and the
    empirical null samples come back alongside it.
    """
    if num_permutations < 1:
        raise InputError("num_permutations must be >= 1")
    observed = float(statistic(sample))
    order, inverse = _canonical_order(sample.Y)
    null = np.empty(num_permutations)
    for k in range(num_permutations):
        perm = draw_row_permutation(rng, order, inverse)
        null[k] = statistic(sample.with_y_rows(perm))
    p = add_one_pvalue(int((null >= observed).sum()), num_permutations)
    return p, NullModel.empirical(null)


def gram_spectrum(
    K_centered: GramMatrix,
    m: int | None = None,
    truncation_tol: float = DEFAULT_TRUNCATION_TOL,
) -> np.ndarray:
    """Descending eigenvalues of K_centered / m, clamped at 0 and truncated.

    Values at or below truncation_tol times the largest are dropped; an
    (effectively) zero matrix yields an empty spectrum.
    """
    if not K_centered.centered:
        raise InputError("gram_spectrum expects a centered Gram matrix")
    if not 0.0 <= truncation_tol < 1.0:
        raise InputError("truncation_tol must lie in [0, 1)")
    if m is None:
        m = K_centered.m
    elif m != K_centered.m:
        raise InputError(f"m={m} does not match matrix size {K_centered.m}")
    try:
        vals = np.linalg.eigvalsh(K_centered.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    return _clamped_descending_spectrum(vals, m, truncation_tol)


def _clamped_descending_spectrum(vals_ascending, m, tol) -> np.ndarray:
    """Clamp, scale by 1/m, truncate; an all-rounding-noise matrix is zero.

    The source matrices are PSD up to rounding, so their most negative
    eigenvalue bounds the numerical noise level; a largest eigenvalue within
    a decade of that is indistinguishable from an exactly zero matrix.
    """
    noise = 10.0 * max(0.0, -float(vals_ascending[0]))
    vals = np.maximum(vals_ascending[::-1], 0.0) / m
    if vals.size == 0 or vals[0] <= noise / m:
        return np.empty(0)
    return _truncate_descending(vals, tol)


def _truncate_descending(vals: np.ndarray, tol: float) -> np.ndarray:
    if vals.size == 0 or vals[0] <= 0.0:
        return np.empty(0)
    return vals[vals > tol * vals[0]]


def _pair_weights(spectrum: EigenSpectrum) -> np.ndarray:
    lam, eta = spectrum.lambdas, spectrum.etas
    if lam.size == 0 or eta.size == 0:
        raise DegenerateDataError("empty eigenvalue spectrum, null is degenerate")
    lam = lam[:MAX_SIDE]
    eta = eta[:MAX_SIDE]
    weights = np.outer(lam, eta).ravel()
    if weights.size > MAX_PAIRS:
        cutoff = np.partition(weights, weights.size - MAX_PAIRS)[weights.size - MAX_PAIRS]
        weights = weights[weights >= cutoff][:MAX_PAIRS]
    return weights


def spectral_null_sample(spectrum: EigenSpectrum, num_draws: int, rng) -> NullModel:
    """Monte Carlo draws of the weighted chi-square mixture sum_ij l_i e_j N_ij^2."""
    if num_draws < 1:
        raise InputError("num_draws must be >= 1")
    weights = _pair_weights(spectrum)
    draws = np.empty(num_draws)
    chunk = max(1, CHUNK_SCALARS // weights.size)
    done = 0
    while done < num_draws:
        rows = min(chunk, num_draws - done)
        Z = rng.standard_normal((rows, weights.size))
        np.square(Z, out=Z)
        draws[done : done + rows] = Z @ weights
        done += rows
    return NullModel.empirical(draws)


def spectral_test(
    sample: PairedSample,
    spec_x: KernelSpec,
    spec_y: KernelSpec,
    num_draws: int = DEFAULT_NUM_DRAWS,
    truncation_tol: float = DEFAULT_TRUNCATION_TOL,
    rng=None,
    alpha: float = 0.05,
    seed: int | None = None,
) -> TestOutcome:
    """Exact quadratic-time test: statistic m * HSIC_b, spectral null."""
    if sample.m < 2:
        raise InputError("spectral test needs m >= 2")
    rng = _resolve_rng(rng, seed)
    timer = StageTimer()
    m = sample.m
    with timer.stage("statistic"):
        KxC = center_gram(gram(spec_x, sample.X)).entries
        KyC = center_gram(gram(spec_y, sample.Y)).entries
        statistic = m * hsic_biased_centered(KxC, KyC)
    with timer.stage("null"):
        lam = gram_spectrum(GramMatrix(KxC, centered=True), m, truncation_tol)
        eta = gram_spectrum(GramMatrix(KyC, centered=True), m, truncation_tol)
        spectrum = EigenSpectrum(lam, eta, truncation_tol)
        null = spectral_null_sample(spectrum, num_draws, rng)
        p = add_one_pvalue(int((null.samples >= statistic).sum()), num_draws)
    return TestOutcome(
        method="hsic-spectral",
        statistic=statistic,
        p_value=p,
        reject=p <= alpha,
        alpha=alpha,
        m=m,
        params={
            "kernel_x": spec_x.describe(),
            "kernel_y": spec_y.describe(),
            "num_draws": num_draws,
            "truncation_tol": truncation_tol,
        },
        seed=seed,
        seconds=timer.finish(),
        null_model=null,
    )


def hsic_permutation_test(
    sample: PairedSample,
    spec_x: KernelSpec,
    spec_y: KernelSpec,
    num_permutations: int = 200,
    rng=None,
    alpha: float = 0.05,
    seed: int | None = None,
    normalized: bool = False,
) -> TestOutcome:
    """Permutation test of m * HSIC_b (or of dCor with ``normalized=True``).

    Permuting Y rows permutes its Gram matrix, and centering commutes with
    that, so each shuffle reuses the centered Gram matrices: cost is
    O(N_p m^2) after the one-off Gram construction. The dCor normalisation
    is permutation-invariant, hence computed once.
    """
    if num_permutations < 1:
        raise InputError("num_permutations must be >= 1")
    rng = _resolve_rng(rng, seed)
    timer = StageTimer()
    m = sample.m
    with timer.stage("statistic"):
        KxC = center_gram(gram(spec_x, sample.X)).entries
        KyC = center_gram(gram(spec_y, sample.Y)).entries
        if normalized:
            nx = float(np.linalg.norm(KxC))
            ny = float(np.linalg.norm(KyC))
            if nx == 0.0 or ny == 0.0:
                raise DegenerateDataError("a centered Gram matrix is identically zero")
            scale = 1.0 / (nx * ny)
        else:
            scale = 1.0 / m
        observed = scale * float(np.vdot(KxC, KyC))
    with timer.stage("null"):
        order, inverse = _canonical_order(sample.Y)
        null = np.empty(num_permutations)
        for k in range(num_permutations):
            perm = draw_row_permutation(rng, order, inverse)
            null[k] = scale * float(np.vdot(KxC, KyC[np.ix_(perm, perm)]))
        p = add_one_pvalue(int((null >= observed).sum()), num_permutations)
    return TestOutcome(
        method="dcor" if normalized else "hsic-permutation",
        statistic=observed,
        p_value=p,
        reject=p <= alpha,
        alpha=alpha,
        m=m,
        params={
            "kernel_x": spec_x.describe(),
            "kernel_y": spec_y.describe(),
            "num_permutations": num_permutations,
        },
        seed=seed,
        seconds=timer.finish(),
        null_model=NullModel.empirical(null),
    )


def dcor_permutation_test(sample, spec_x, spec_y, num_permutations=200, rng=None,
                          alpha=0.05, seed=None) -> TestOutcome:
    """Permutation test of the normalised statistic (dCor for Brownian kernels)."""
    return hsic_permutation_test(
        sample, spec_x, spec_y, num_permutations, rng, alpha, seed, normalized=True
    )


def _resolve_rng(rng, seed):
    if rng is not None:
        return rng
    return np.random.default_rng(seed)
