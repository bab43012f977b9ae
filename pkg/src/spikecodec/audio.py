"""WAV ingestion (mono, normalized, resampled) and output."""

from __future__ import annotations

import os
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .errors import AudioReadError, EmptyAudioError

_INT_SCALE = {
    np.dtype(np.uint8): (128.0, 128.0),   # (offset, scale): (x - offset) / scale
    np.dtype(np.int16): (0.0, 32768.0),
    np.dtype(np.int32): (0.0, 2147483648.0),
}


def load_audio(path: str | Path, target_rate: int = 16000) -> np.ndarray:
    """Read a PCM WAV file as a mono float64 vector at `target_rate`.

    Multichannel audio is averaged to mono, integer samples are scaled to
    [-1, 1] by their type's full-scale value, and the result is
    polyphase-resampled when the file rate differs from `target_rate`.
    """
    path = Path(path)
    try:
        rate, data = wavfile.read(path)
    except (ValueError, EOFError, OSError) as exc:
        if isinstance(exc, FileNotFoundError):
            raise
        raise AudioReadError(f"cannot read WAV file {path}: {exc}") from exc
    if data.size == 0:
        raise EmptyAudioError(f"{path} contains no audio samples")

    dtype = data.dtype
    if dtype in _INT_SCALE:
        offset, scale = _INT_SCALE[dtype]
        signal = (data.astype(np.float64) - offset) / scale
    elif np.issubdtype(dtype, np.floating):
        signal = data.astype(np.float64)
    else:
        raise AudioReadError(f"{path}: unsupported sample type {dtype}")

    if signal.ndim == 2:
        signal = signal.mean(axis=1)

    if rate != target_rate:
        ratio = Fraction(int(target_rate), int(rate))
        signal = resample_poly(signal, ratio.numerator, ratio.denominator)
    return signal


def save_wav(path: str | Path, signal: np.ndarray, sample_rate: int) -> None:
    """Write a float signal as 16-bit PCM, clipping to [-1, 1] (atomic)."""
    path = Path(path)
    clipped = np.clip(np.asarray(signal, dtype=np.float64), -1.0, 1.0)
    pcm = np.round(clipped * 32767.0).astype(np.int16)
    tmp = path.with_name(path.name + ".tmp")
    wavfile.write(tmp, int(sample_rate), pcm)
    os.replace(tmp, path)
