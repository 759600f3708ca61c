"""Synthetic generators and the Monte Carlo power / Type-I / timing harness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .quadratic import PairedSample


@dataclass(frozen=True)
class GeneratorSpec:
    """A named synthetic joint distribution at a given size and dimension."""

    kind: str
    m: int
    d: int = 1
    dy: int = 1  # only the null generator uses a Y dimension
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("linear", "sine", "large-scale", "null"):
            raise InputError(f"unknown generator {self.kind!r}")
        if self.m < 1:
            raise InputError("m must be positive")
        if self.d < 1:
            raise InputError("d must be positive")
        if self.kind == "sine" and self.d < 2:
            raise InputError("sine generator needs d >= 2")
        if self.kind == "large-scale" and self.d % 2 != 0:
            raise InputError("large-scale generator needs even d")


@dataclass
class PowerReport:
    """Rejection rate with a normal-approximation confidence interval."""

    power: float
    ci_low: float
    ci_high: float
    trials: int
    mean_test_seconds: float
    method_descriptor: str


def gen_linear(m: int, d: int, rng) -> PairedSample:
    """Y depends linearly on the first X dimension: Y = X_1 + Z."""
    X = rng.standard_normal((m, d))
    Y = X[:, 0] + rng.standard_normal(m)
    return PairedSample(X, Y[:, None])


def gen_sine(m: int, d: int, rng) -> PairedSample:
    """High-frequency radial dependence: Y = 20 sin(4 pi (X_1^2 + X_2^2)) + Z."""
    if d < 2:
        raise InputError("sine generator needs d >= 2")
    X = rng.standard_normal((m, d))
    Y = 20.0 * np.sin(4.0 * np.pi * (X[:, 0] ** 2 + X[:, 1] ** 2)) + rng.standard_normal(m)
    return PairedSample(X, Y[:, None])


def gen_large_scale(m: int, d: int, rng) -> PairedSample:
    """Pairwise sign interactions, independent of every single X dimension.

    Y = sqrt(2/d) sum_j sign(X_{2j-1} X_{2j}) |Z_j| + Z_{d/2+1}.
    """
    if d % 2 != 0:
        raise InputError("large-scale generator needs even d")
    X = rng.standard_normal((m, d))
    Z = rng.standard_normal((m, d // 2 + 1))
    signs = np.sign(X[:, 0::2] * X[:, 1::2])
    Y = np.sqrt(2.0 / d) * (signs * np.abs(Z[:, :-1])).sum(axis=1) + Z[:, -1]
    return PairedSample(X, Y[:, None])


def gen_null(m: int, dx: int, dy: int, rng) -> PairedSample:
    """Independent standard normal X and Y, for Type-I calibration."""
    return PairedSample(rng.standard_normal((m, dx)), rng.standard_normal((m, dy)))


def generate(spec: GeneratorSpec, rng=None) -> PairedSample:
    """Draw one sample from a generator spec (seeded from spec.seed by default)."""
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    if spec.kind == "linear":
        return gen_linear(spec.m, spec.d, rng)
    if spec.kind == "sine":
        return gen_sine(spec.m, spec.d, rng)
    if spec.kind == "large-scale":
        return gen_large_scale(spec.m, spec.d, rng)
    return gen_null(spec.m, spec.d, spec.dy, rng)


def binomial_ci(power: float, trials: int) -> tuple[float, float]:
    half = 1.96 * np.sqrt(power * (1.0 - power) / trials)
    return max(power - half, 0.0), min(power + half, 1.0)


def estimate_power(
    test,
    generator: GeneratorSpec,
    trials: int = 100,
    alpha: float = 0.05,
    master_seed: int = 0,
) -> PowerReport:
    """Rejection rate of a test procedure over independent generate-then-test rounds.

    ``test`` is a callable (sample, rng) -> TestOutcome. Each trial uses the
    independent stream seeded by (master_seed, trial index); data generation
    and testing consume the same per-trial stream, in that order, and only
    the test is timed.
    """
    if trials < 1:
        raise InputError("trials must be >= 1")
    rejections = 0
    total_seconds = 0.0
    for trial in range(trials):
        rng = np.random.default_rng([master_seed, trial])
        sample = generate(generator, rng)
        try:
            outcome = test(sample, rng)
        except Exception as exc:
            raise RuntimeError(f"trial {trial} failed: {exc}") from exc
        if outcome.p_value <= alpha:
            rejections += 1
        total_seconds += outcome.seconds.get("total", 0.0)
    power = rejections / trials
    ci_low, ci_high = binomial_ci(power, trials)
    return PowerReport(
        power=power,
        ci_low=ci_low,
        ci_high=ci_high,
        trials=trials,
        mean_test_seconds=total_seconds / trials,
        method_descriptor=getattr(test, "descriptor", repr(test)),
    )
