"""Greedy sparse decomposition of audio segments over the kernel bank.

Each segment is encoded independently: correlate the current residual
against every kernel at every admissible offset (frequency-domain, via
the bank's precomputed spectra), pick the magnitude-maximal match,
subtract the scaled shifted atom, repeat up to `sps` times.  Because the
atoms are unit-norm, the selected intensity equals the inner product and
the residual energy drops by exactly intensity**2 per iteration.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import EncoderConfig
from .errors import ConfigurationError
from .kernels import KernelBank


@dataclass(frozen=True)
class Code:
    """One pursuit result: atom identity, placement, and signed intensity."""

    kernel_index: int
    tau: int
    intensity: float
    segment_index: int = 0


@dataclass
class Segment:
    """Fixed-length window of the input stream."""

    samples: np.ndarray
    start_time: float = 0.0       # seconds from stream origin
    sample_rate: int = 16000


def segment_signal(signal: np.ndarray, segment_len: int, sample_rate: int) -> list[Segment]:
    """Split a signal into consecutive segments, zero-padding the last one."""
    signal = np.asarray(signal, dtype=np.float64)
    if signal.ndim != 1 or signal.size == 0:
        raise ValueError("signal must be a nonempty 1-D array")
    n_segments = -(-signal.size // segment_len)  # ceil division
    segments = []
    for i in range(n_segments):
        chunk = signal[i * segment_len:(i + 1) * segment_len]
        if chunk.size < segment_len:
            chunk = np.concatenate([chunk, np.zeros(segment_len - chunk.size)])
        segments.append(Segment(chunk, start_time=i * segment_len / sample_rate,
                                sample_rate=sample_rate))
    return segments


def correlate_all(residual: np.ndarray, bank: KernelBank) -> np.ndarray:
    """Inner products of `residual` with every kernel at every admissible offset.

    Returns an (m_count, segment_len) array where entry (m, tau) is
    <residual, kernel_m shifted to tau>.  Offsets where the kernel would
    overhang the segment are set to exactly 0.0, which removes them from
    the magnitude argmax (a zero can never beat a nonzero match, and an
    all-zero surface stops the pursuit before any code is emitted).
    """
    residual = np.asarray(residual, dtype=np.float64)
    length = residual.shape[-1]
    if residual.ndim != 1:
        raise ValueError("residual must be 1-D")
    if bank.fft_size < length + bank.max_kernel_len - 1:
        raise ConfigurationError(
            f"bank fft_size={bank.fft_size} cannot represent linear correlation "
            f"with a segment of {length} samples (needs >= {length + bank.max_kernel_len - 1})"
        )
    spectrum = np.fft.rfft(residual, bank.fft_size)
    surface = np.fft.irfft(bank.conj_rfft * spectrum, bank.fft_size, axis=1)[:, :length]
    # zero offsets where the atom's support would cross the segment end
    surface[bank.overhang_mask(length)] = 0.0
    return surface


def best_match(surface: np.ndarray) -> tuple[int, int, float]:
    """(kernel_index, tau, signed value) of the magnitude-maximal cell.

    Ties break toward smaller kernel index, then smaller tau (row-major
    first occurrence).
    """
    if surface.size == 0:
        raise ValueError("empty correlation surface")
    flat = int(np.argmax(np.abs(surface)))
    m, tau = divmod(flat, surface.shape[1])
    return m, tau, float(surface[m, tau])


def subtract_atom(residual: np.ndarray, code: Code, bank: KernelBank) -> np.ndarray:
    """Residual minus the scaled shifted atom named by `code` (new array)."""
    residual = np.asarray(residual, dtype=np.float64)
    effective_len = int(bank.effective_lens[code.kernel_index])
    if not 0 <= code.tau <= residual.size - effective_len:
        raise ValueError(
            f"tau={code.tau} places kernel {code.kernel_index} "
            f"(effective_len={effective_len}) outside a {residual.size}-sample segment"
        )
    out = residual.copy()
    atom = bank.samples_matrix[code.kernel_index, :effective_len]
    out[code.tau:code.tau + effective_len] -= code.intensity * atom
    return out


def encode_segment(x, bank: KernelBank, config: EncoderConfig,
                   segment_index: int = 0) -> tuple[list[Code], np.ndarray]:
    """Run the pursuit on one segment; returns (codes, final residual).

    Stops after `config.sps` codes, or earlier once the residual energy
    falls to `config.residual_epsilon` or no kernel correlates at all.
    """
    if isinstance(x, Segment):
        x = x.samples
    residual = np.array(x, dtype=np.float64)
    if residual.ndim != 1 or residual.size != config.segment_len:
        raise ValueError(f"segment must be 1-D of length {config.segment_len}")
    codes: list[Code] = []
    energy = float(residual @ residual)
    for _ in range(config.sps):
        if energy <= config.residual_epsilon:
            break
        surface = correlate_all(residual, bank)
        m, tau, s = best_match(surface)
        if s == 0.0:
            break
        code = Code(m, tau, s, segment_index)
        residual = subtract_atom(residual, code, bank)
        codes.append(code)
        energy = float(residual @ residual)
    return codes, residual


def encode_stream(signal: np.ndarray, bank: KernelBank, config: EncoderConfig,
                  workers: int | None = None) -> list[tuple[int, list[Code]]]:
    """Encode a whole signal as consecutive independent segments.

    Returns [(segment_index, codes), ...] in segment order.  `workers`
    enables concurrent per-segment encoding over the shared bank; the
    result is identical to the sequential one.
    """
    if config.sample_rate != bank.sample_rate:
        raise ConfigurationError(
            f"config sample_rate={config.sample_rate} != bank sample_rate={bank.sample_rate}"
        )
    segments = segment_signal(signal, config.segment_len, config.sample_rate)

    def job(i: int) -> tuple[int, list[Code]]:
        codes, _ = encode_segment(segments[i].samples, bank, config, segment_index=i)
        return i, codes

    if workers is not None and workers > 1 and len(segments) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(job, range(len(segments))))
    return [job(i) for i in range(len(segments))]


def flatten_codes(per_segment: list[tuple[int, list[Code]]]) -> list[Code]:
    """Concatenate per-segment code lists in emission order."""
    out: list[Code] = []
    for _, codes in per_segment:
        out.extend(codes)
    return out
