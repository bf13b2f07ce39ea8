"""Exceptions shared by every lab app."""


class LabError(Exception):
    """Base class for all bosonlab errors."""


class ParameterError(LabError, ValueError):
    """An argument or parameter is outside its domain."""


class OutOfRangeError(ParameterError):
    """An occupation or hole index lies beyond the available ladder."""


class NormalizationError(LabError, ValueError):
    """An operation that needs a normalized state received one that is not."""

    def __init__(self, norm, tolerance):
        self.norm = norm
        self.tolerance = tolerance
        super().__init__(
            f"state norm {norm!r} differs from 1 by more than {tolerance:g}"
        )


class TruncationError(LabError):
    """The requested tolerance cannot be met at the given cutoff."""

    def __init__(self, tail, tolerance, cutoff):
        self.tail = tail
        self.tolerance = tolerance
        self.cutoff = cutoff
        super().__init__(
            f"Poisson tail {tail:.3e} at cutoff {cutoff} exceeds tolerance {tolerance:.1e}"
        )


class UnboundedCapacityError(LabError):
    """A massless mode at zero momentum admits arbitrarily many quanta."""


class PacketMismatchError(ParameterError):
    """Wave packets with different widths or dimensions were combined."""


class GridResolutionError(LabError):
    """A quadrature grid is too coarse or too narrow for the requested integral."""

    def __init__(self, message, required_points, required_half_width):
        self.required_points = required_points
        self.required_half_width = required_half_width
        super().__init__(
            f"{message} (need >= {required_points} points and "
            f"half-width >= {required_half_width:g})"
        )


class PermanentBoundError(ParameterError):
    """A matrix is too large for the selected permanent algorithm."""


class NumericalFailure(LabError):
    """A computed quantity violates a property it must have."""


class UndefinedRatioError(NumericalFailure):
    """A correlation ratio has a denominator below the numerical floor."""


class ConfigError(ParameterError):
    """A model configuration failed validation; ``errors`` maps each key to its messages."""

    def __init__(self, errors):
        self.errors = {key: [str(message) for message in messages] for key, messages in errors.items()}
        listing = '; '.join(f"{key}: {' '.join(messages)}" for key, messages in sorted(self.errors.items()))
        super().__init__(f"invalid configuration ({listing})")
