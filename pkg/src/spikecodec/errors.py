"""Exception types shared across the package."""


class SpikeCodecError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(SpikeCodecError, ValueError):
    """Invalid build or encoder configuration."""


class CalibrationError(SpikeCodecError, ValueError):
    """Level calibration cannot proceed (e.g. no usable codes)."""


class FormatError(SpikeCodecError):
    """Base class for file-format problems."""


class BadMagicError(FormatError):
    """File does not start with the expected magic bytes."""


class BadVersionError(FormatError):
    """File declares an unsupported format version."""


class TruncatedFileError(FormatError):
    """File is shorter than its header-declared payload."""


class CountMismatchError(FormatError):
    """Declared record count disagrees with the actual file size."""


class ChecksumError(FormatError):
    """Stored checksum does not match the file contents."""


class AudioReadError(FormatError):
    """Audio container is unreadable or uses an unsupported encoding."""


class EmptyAudioError(SpikeCodecError, ValueError):
    """Audio file decoded to zero samples."""
