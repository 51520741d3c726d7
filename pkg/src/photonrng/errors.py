"""Exception types shared across the package."""


class ConstantSequence(ValueError):
    """Sequence contains only one symbol, so the balance ratio is undefined."""


class MalformedFile(ValueError):
    """A bitstream file failed structural validation (magic, version, length)."""


class IoFailure(OSError):
    """Wraps OS-level read/write failures on bitstream files."""


class LengthMismatch(ValueError):
    """A subsequence does not match the block length a codec was built for."""


class DomainError(ValueError):
    """Numeric argument outside the mathematical domain of an operation."""


class TooShort(ValueError):
    """Sequence is shorter than a statistical test's minimum length."""


class Inapplicable(RuntimeError):
    """A test's run-time applicability condition failed (e.g. too few cycles)."""


class InsufficientQuantumBits(ValueError):
    """The replacement stream cannot cover all mixing positions."""


class EmptyProfile(ValueError):
    """An aggregate was requested over an empty collection of results."""


class FitDiverged(RuntimeError):
    """Nonlinear least squares failed to converge to a usable optimum."""


class InsufficientPoints(ValueError):
    """Too few data points to constrain the fit parameters."""
