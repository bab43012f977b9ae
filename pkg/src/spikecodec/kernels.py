"""Gammatone kernel dictionary.

The dictionary atoms are causal gammatone impulse responses

    g(t) = t^(n-1) * exp(-2*pi*b*t) * cos(2*pi*fc*t)

with order n (default 4) and bandwidth parameter b = 1.019 * ERB(fc),
where ERB is the Glasberg & Moore (1990) equivalent rectangular
bandwidth ERB(f) = 24.7 * (1 + 4.37 f / 1000).  Center frequencies are
spaced uniformly on the ERB-rate scale, mirroring cochlear frequency
selectivity.  Each atom is truncated where its envelope falls below a
fixed fraction of the envelope peak and then L2-normalized, so the
matching-pursuit intensity equals the plain inner product and the
per-iteration energy identity holds exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

#: Envelope truncation threshold, relative to the envelope peak.
TRUNCATION_THRESHOLD = 1e-4


def erb_bandwidth(freq_hz):
    """Equivalent rectangular bandwidth (Hz) at `freq_hz` (Glasberg & Moore)."""
    return 24.7 * (1.0 + 4.37 * freq_hz / 1000.0)


def hz_to_erb_rate(freq_hz):
    """Frequency in Hz -> ERB-rate scale value (Cams)."""
    return 21.4 * np.log10(1.0 + 4.37 * freq_hz / 1000.0)


def erb_rate_to_hz(erb_rate):
    """ERB-rate scale value (Cams) -> frequency in Hz."""
    return (np.power(10.0, erb_rate / 21.4) - 1.0) * 1000.0 / 4.37


def erb_space(fmin: float, fmax: float, count: int) -> np.ndarray:
    """`count` frequencies from fmin to fmax inclusive, uniform on the ERB-rate scale."""
    if count < 1:
        raise ConfigurationError(f"count must be >= 1, got {count}")
    rates = np.linspace(hz_to_erb_rate(fmin), hz_to_erb_rate(fmax), count)
    freqs = erb_rate_to_hz(rates)
    # pin the endpoints to the exact requested values (a lone kernel sits at fmin)
    freqs[0] = fmin
    if count > 1:
        freqs[-1] = fmax
    return freqs


def _gammatone(center_freq: float, sample_rate: float, order: int,
               max_len: int, threshold: float = TRUNCATION_THRESHOLD):
    """Synthesize one atom; returns (samples, effective_len).

    Samples beyond `effective_len` are exactly zero; the vector is
    L2-normalized.  The first sample corresponds to t = 0.
    """
    if not 0.0 < center_freq < sample_rate / 2.0:
        raise ValueError(
            f"center_freq={center_freq} outside (0, {sample_rate / 2}) for "
            f"sample_rate={sample_rate}"
        )
    if max_len < 2:
        raise ConfigurationError(f"max_len must be >= 2, got {max_len}")
    t = np.arange(max_len) / sample_rate
    b = 1.019 * erb_bandwidth(center_freq)
    envelope = t ** (order - 1) * np.exp(-2.0 * np.pi * b * t)
    samples = envelope * np.cos(2.0 * np.pi * center_freq * t)
    effective_len = int(np.nonzero(envelope >= threshold * envelope.max())[0][-1]) + 1
    samples[effective_len:] = 0.0
    norm = np.linalg.norm(samples)
    if norm == 0.0:
        raise ConfigurationError(
            f"gammatone atom at {center_freq} Hz has no support within max_len={max_len}"
        )
    return samples / norm, effective_len


def gammatone_atom(center_freq: float, sample_rate: float, order: int = 4,
                   max_len: int = 1024) -> np.ndarray:
    """Unit-norm, envelope-truncated gammatone impulse response of length `max_len`."""
    samples, _ = _gammatone(center_freq, sample_rate, order, max_len)
    return samples


@dataclass(frozen=True)
class GammatoneKernel:
    """One dictionary atom with its precomputed frequency-domain image."""

    index: int
    center_freq: float
    samples: np.ndarray       # time domain, unit L2 norm, length = bank max_kernel_len
    effective_len: int        # samples beyond this are exactly zero
    spectrum: np.ndarray      # np.fft.fft(samples, bank.fft_size)


@dataclass
class KernelBank:
    """Immutable dictionary of gammatone atoms plus stacked fast-path views.

    All arrays are marked read-only after construction; a bank can be
    shared freely across concurrent encoder workers.
    """

    kernels: tuple[GammatoneKernel, ...]
    sample_rate: int
    fft_size: int
    fmin: float
    fmax: float
    max_kernel_len: int
    order: int
    # stacked views used by the correlation hot path
    samples_matrix: np.ndarray = None    # (M, max_kernel_len) float64
    effective_lens: np.ndarray = None    # (M,) int64
    conj_rfft: np.ndarray = None         # (M, fft_size // 2 + 1) complex128

    def __post_init__(self) -> None:
        if self.samples_matrix is None:
            mat = np.stack([k.samples for k in self.kernels])
            self.samples_matrix = mat
            self.effective_lens = np.array([k.effective_len for k in self.kernels], dtype=np.int64)
            self.conj_rfft = np.conj(np.fft.rfft(mat, self.fft_size, axis=1))
        for arr in (self.samples_matrix, self.effective_lens, self.conj_rfft):
            arr.flags.writeable = False
        # per-segment-length masks of inadmissible offsets, filled lazily
        self._overhang_masks: dict[int, np.ndarray] = {}

    def overhang_mask(self, segment_len: int) -> np.ndarray:
        """(M, segment_len) bool mask of offsets where a kernel would overhang."""
        mask = self._overhang_masks.get(segment_len)
        if mask is None:
            mask = np.arange(segment_len) > (segment_len - self.effective_lens)[:, None]
            mask.flags.writeable = False
            self._overhang_masks[segment_len] = mask
        return mask

    @property
    def m_count(self) -> int:
        return len(self.kernels)

    @property
    def center_freqs(self) -> np.ndarray:
        return np.array([k.center_freq for k in self.kernels])


def build_bank(m_count: int, sample_rate: int, fmin: float, fmax: float,
               order: int = 4, max_len: int = 1024, fft_size: int = 2048) -> KernelBank:
    """Construct the dictionary of `m_count` ERB-spaced unit-norm gammatone kernels.

    Raises ConfigurationError for an invalid frequency range or an
    fft_size too small to hold a kernel (linear correlation with a
    segment additionally requires fft_size >= segment_len + max_len - 1,
    checked at correlation time).
    """
    if m_count < 1:
        raise ConfigurationError(f"m_count must be >= 1, got {m_count}")
    if not (0.0 < fmin <= fmax):
        raise ConfigurationError(f"need 0 < fmin <= fmax, got fmin={fmin}, fmax={fmax}")
    if m_count > 1 and fmin == fmax:
        raise ConfigurationError("fmin == fmax requires m_count == 1")
    if fmax >= sample_rate / 2.0:
        raise ConfigurationError(f"fmax={fmax} must stay below Nyquist ({sample_rate / 2})")
    if order < 1:
        raise ConfigurationError(f"order must be >= 1, got {order}")
    if fft_size < max_len or fft_size & (fft_size - 1):
        raise ConfigurationError(
            f"fft_size={fft_size} must be a power of two >= max_len={max_len}"
        )

    freqs = erb_space(fmin, fmax, m_count)
    kernels = []
    for m, cf in enumerate(freqs):
        samples, effective_len = _gammatone(cf, sample_rate, order, max_len)
        spectrum = np.fft.fft(samples, fft_size)
        samples.flags.writeable = False
        spectrum.flags.writeable = False
        kernels.append(GammatoneKernel(m, float(cf), samples, effective_len, spectrum))
    return KernelBank(
        kernels=tuple(kernels),
        sample_rate=sample_rate,
        fft_size=fft_size,
        fmin=fmin,
        fmax=fmax,
        max_kernel_len=max_len,
        order=order,
    )


def bank_from_config(config) -> KernelBank:
    """Build the bank described by an EncoderConfig."""
    return build_bank(
        m_count=config.m_count,
        sample_rate=config.sample_rate,
        fmin=config.fmin,
        fmax=config.fmax,
        order=config.order,
        max_len=config.max_kernel_len,
        fft_size=config.fft_size,
    )
