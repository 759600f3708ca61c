"""Kernel independence testing with HSIC at small and large scale.

Exact quadratic-time estimators (biased, unbiased, dCor) with permutation
and spectral nulls, plus three linear-time approximate tests: block
averaging, Nystrom features and random Fourier features.
"""

from .block import BlockConfig, block_statistic, block_test, null_variance_direct, null_variance_permutation
from .errors import (
    ConfigError,
    DegenerateDataError,
    HsicError,
    InputError,
    NumericalError,
    ParseError,
    UnsupportedKernelError,
)
from .experiments import (
    GeneratorSpec,
    PowerReport,
    estimate_power,
    gen_large_scale,
    gen_linear,
    gen_null,
    gen_sine,
    generate,
)
from .kernels import (
    GramMatrix,
    KernelSpec,
    brownian_kernel,
    center_gram,
    cross_gram,
    gaussian_kernel,
    gram,
    kernel_eval,
    linear_kernel,
    median_heuristic,
    polynomial_kernel,
    strip_diagonal,
)
from .lowrank import (
    FeatureMatrix,
    FrequencySet,
    InducingSet,
    LowRankConfig,
    center_features,
    draw_frequencies,
    feature_hsic,
    feature_spectrum,
    lowrank_test,
    nystrom_features,
    rff_features,
    subsample_inducing,
)
from .nulls import (
    EigenSpectrum,
    NullModel,
    dcor_permutation_test,
    gram_spectrum,
    hsic_permutation_test,
    permutation_pvalue,
    spectral_null_sample,
    spectral_test,
)
from .outcome import TestOutcome
from .quadratic import PairedSample, dcor, hsic_biased, hsic_unbiased, sub_corr, sub_hsic

__version__ = "0.1.0"
