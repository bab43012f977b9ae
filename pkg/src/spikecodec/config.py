"""Encoder configuration and config-file handling.

Precedence everywhere in the package is: explicit argument / CLI flag,
then config file, then the built-in default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigurationError

#: Default processing window, in seconds.
SEGMENT_SECONDS = 0.0435

#: Default target sample rate for all audio, in Hz.
DEFAULT_SAMPLE_RATE = 16000


def next_pow2(n: int) -> int:
    """Smallest power of two >= n (n >= 1)."""
    if n < 1:
        raise ConfigurationError(f"next_pow2 requires n >= 1, got {n}")
    return 1 << (int(n) - 1).bit_length()


def default_segment_len(sample_rate: int) -> int:
    """Segment length in samples for the default window at `sample_rate`."""
    return round(SEGMENT_SECONDS * sample_rate)


@dataclass
class EncoderConfig:
    """All tunables of the encoding pipeline.

    Fields left at ``None`` are derived in ``__post_init__``:

    * ``segment_len``     -> round(0.0435 * sample_rate)
    * ``max_kernel_len``  -> segment_len (every kernel placeable at tau = 0)
    * ``fft_size``        -> next power of two >= segment_len + max_kernel_len - 1
    * ``residual_epsilon``-> 1e-12 * segment_len (near machine-noise floor)
    """

    sps: int = 128
    sample_rate: int = DEFAULT_SAMPLE_RATE
    segment_len: int | None = None
    m_count: int = 40
    fmin: float = 100.0
    fmax: float = 7400.0
    order: int = 4
    max_kernel_len: int | None = None
    fft_size: int | None = None
    residual_epsilon: float | None = None
    bin_width: float = 0.010
    level_quantiles: tuple[float, float, float] = (0.25, 0.50, 0.90)

    def __post_init__(self) -> None:
        if self.segment_len is None:
            self.segment_len = default_segment_len(self.sample_rate)
        if self.max_kernel_len is None:
            self.max_kernel_len = self.segment_len
        if self.fft_size is None:
            self.fft_size = next_pow2(self.segment_len + self.max_kernel_len - 1)
        if self.residual_epsilon is None:
            self.residual_epsilon = 1e-12 * self.segment_len
        self.level_quantiles = tuple(self.level_quantiles)
        self.validate()

    def validate(self) -> None:
        if self.sps < 1:
            raise ConfigurationError(f"sps must be >= 1, got {self.sps}")
        if self.sample_rate < 1:
            raise ConfigurationError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.segment_len < 2:
            raise ConfigurationError(f"segment_len must be >= 2, got {self.segment_len}")
        if self.m_count < 1:
            raise ConfigurationError(f"m_count must be >= 1, got {self.m_count}")
        if not (0.0 < self.fmin <= self.fmax):
            raise ConfigurationError(
                f"need 0 < fmin <= fmax, got fmin={self.fmin}, fmax={self.fmax}"
            )
        if self.fmax >= self.sample_rate / 2:
            raise ConfigurationError(
                f"fmax={self.fmax} must stay below Nyquist ({self.sample_rate / 2})"
            )
        if self.m_count > 1 and self.fmin == self.fmax:
            raise ConfigurationError("fmin == fmax only allowed for a single-kernel bank")
        if self.order < 1:
            raise ConfigurationError(f"order must be >= 1, got {self.order}")
        if self.max_kernel_len < 2:
            raise ConfigurationError(f"max_kernel_len must be >= 2, got {self.max_kernel_len}")
        if self.fft_size & (self.fft_size - 1) or self.fft_size < 1:
            raise ConfigurationError(f"fft_size must be a power of two, got {self.fft_size}")
        if self.fft_size < self.segment_len + self.max_kernel_len - 1:
            raise ConfigurationError(
                f"fft_size={self.fft_size} too small for segment_len={self.segment_len} "
                f"plus max_kernel_len={self.max_kernel_len} (linear correlation would wrap)"
            )
        if self.residual_epsilon < 0:
            raise ConfigurationError("residual_epsilon must be >= 0")
        if self.bin_width <= 0:
            raise ConfigurationError(f"bin_width must be positive, got {self.bin_width}")
        q = self.level_quantiles
        if len(q) != 3 or not (0.0 <= q[0] < q[1] < q[2] <= 1.0):
            raise ConfigurationError(f"level_quantiles must be 3 increasing values in [0, 1], got {q}")

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_mapping(cls, mapping: dict) -> "EncoderConfig":
        """Build a config from a dict, rejecting unknown keys."""
        known = set(cls.field_names())
        unknown = set(mapping) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**mapping)


def load_config_file(path: str | Path) -> dict:
    """Read a JSON config file into a plain dict (keys as in EncoderConfig)."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config file {path} must contain a JSON object")
    return raw


def resolve_config(file_values: dict | None = None, overrides: dict | None = None) -> EncoderConfig:
    """Merge config-file values and explicit overrides onto the defaults.

    ``overrides`` entries that are ``None`` are treated as absent, so CLI
    flags can pass through unset options without clobbering the file.
    """
    merged: dict = {}
    if file_values:
        merged.update(file_values)
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})
    return EncoderConfig.from_mapping(merged)
