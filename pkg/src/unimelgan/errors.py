"""Exception hierarchy shared across the package."""


class UniMelGANError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(UniMelGANError, ValueError):
    """An argument violates a documented precondition."""


class InvalidAudioError(InvalidInputError):
    """Audio payload is unusable: empty, non-finite, wrong layout."""


class SilentAudioError(UniMelGANError):
    """Loudness is unmeasurable: every gating block fell below the gate."""


class DegenerateStatisticsError(UniMelGANError):
    """Normalization statistics are undefined (zero variance input)."""


class ShapeMismatchError(UniMelGANError, ValueError):
    """A tensor or array has a shape other than the contract requires."""


class ConfigurationError(UniMelGANError, ValueError):
    """A configuration object violates one of its invariants."""


class FileFormatError(UniMelGANError):
    """A binary container (feature file, checkpoint) failed validation."""


class TrainingDivergedError(UniMelGANError, RuntimeError):
    """A training step produced a non-finite loss."""
