"""Exception types shared across the package."""


class NumericError(ArithmeticError):
    """A numerical contract was violated (non-PSD matrix, singular system, ...)."""


class IllConditionedBasisError(NumericError):
    """Basis matrix is numerically rank deficient."""


class ConfigError(ValueError):
    """Invalid experiment configuration; message carries the offending field."""
