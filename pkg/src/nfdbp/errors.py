"""Exception and warning types shared across the package."""


class InvalidConfigError(ValueError):
    """A configuration value is outside its documented domain."""


class WindowMismatchError(ValueError):
    """A signal's length or duration does not match the processing window."""


class NormalizerSingularityError(ValueError):
    """A defocusing sample has unit magnitude or larger, so 1 - |q|^2 <= 0."""


class DegeneratePairError(ValueError):
    """Scattering pair with a vanishing leading a-coefficient."""


class NonContractivePairError(ValueError):
    """Layer peeling hit |b0/a0| >= 1 in the defocusing case."""


class DegreeTooLargeError(ValueError):
    """Polynomial degree exceeds the configured root-finding cap."""


class UndefinedQFactorError(ValueError):
    """Q factor requested for a bit error rate outside (0, 1/2)."""


class GuardTooShortWarning(UserWarning):
    """Configured guard interval is shorter than the dispersion memory."""


class SolitonicContentWarning(UserWarning):
    """Focusing-side burst may carry discrete (solitonic) spectrum."""
