"""Exception types shared across the package.

Each class carries a short machine-readable ``category`` used by the CLI to
map failures onto exit codes.
"""


class HsicError(Exception):
    """Base class for all errors raised by this package."""

    category = "internal-error"


class InputError(HsicError, ValueError):
    """Invalid arguments: shape mismatches, out-of-range parameters."""

    category = "input-error"


class DegenerateDataError(InputError):
    """Data admits no meaningful answer (constant input, zero variance)."""

    category = "degenerate-input"


class UnsupportedKernelError(InputError):
    """Kernel family not usable with the requested construction."""

    category = "unsupported-kernel"


class NumericalError(HsicError, RuntimeError):
    """A numerical routine (eigensolver, ...) failed to converge."""

    category = "numerical-error"


class ConfigError(HsicError, ValueError):
    """Inconsistent or incomplete run configuration."""

    category = "config-error"


class ParseError(HsicError, ValueError):
    """Malformed input file."""

    category = "parse-error"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
