"""Waveform reconstruction from codes (exact up to the residual) and from spikes.

The code path rebuilds sum_i s_i * kernel_{m_i}(t - offset_i), so input
minus reconstruction equals the encoder's final residual to rounding.
The spike path substitutes each event's channel level for the signed
intensity, adding level-quantization (and sign) loss on top.
"""

from __future__ import annotations

import numpy as np

from .errors import FormatError
from .kernels import KernelBank
from .place_coding import LEVELS_PER_KERNEL, EventStream, LevelTable
from .pursuit import Code


def reconstruct_from_codes(codes: list[Code], bank: KernelBank, duration: int,
                           segment_len: int) -> np.ndarray:
    """Sum of scaled shifted atoms over `duration` samples."""
    out = np.zeros(int(duration))
    for code in codes:
        effective_len = int(bank.effective_lens[code.kernel_index])
        offset = code.segment_index * segment_len + code.tau
        if offset < 0 or offset + effective_len > duration:
            raise ValueError(
                f"code at segment {code.segment_index}, tau {code.tau} places kernel "
                f"{code.kernel_index} outside duration {duration}"
            )
        atom = bank.samples_matrix[code.kernel_index, :effective_len]
        out[offset:offset + effective_len] += code.intensity * atom
    return out


def reconstruct_from_events(stream: EventStream, bank: KernelBank,
                            table: LevelTable) -> np.ndarray:
    """Sum of level-scaled atoms at event times (all contributions positive)."""
    if stream.n_channels > LEVELS_PER_KERNEL * bank.m_count:
        raise FormatError(
            f"stream spans {stream.n_channels} channels but bank supports "
            f"{LEVELS_PER_KERNEL * bank.m_count}"
        )
    out = np.zeros(int(stream.duration))
    for channel, time in zip(stream.channels, stream.times):
        m, level_index = divmod(int(channel), LEVELS_PER_KERNEL)
        if m >= bank.m_count:
            raise FormatError(f"channel {channel} exceeds bank kernel count")
        effective_len = int(bank.effective_lens[m])
        end = min(int(time) + effective_len, out.size)
        atom = bank.samples_matrix[m, :end - int(time)]
        out[int(time):end] += table.levels[m, level_index] * atom
    return out


def reconstruction_report(original: np.ndarray, reconstructed: np.ndarray) -> dict:
    """rmse / snr_db / residual_energy_fraction between a signal and its rebuild.

    snr_db = 10*log10(|x|^2 / |x - xhat|^2); a zero input makes snr and
    the energy fraction undefined and both are reported as NaN; an exact
    rebuild reports snr_db = +inf.
    """
    x = np.asarray(original, dtype=np.float64)
    xhat = np.asarray(reconstructed, dtype=np.float64)
    if x.shape != xhat.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {xhat.shape}")
    err = x - xhat
    err_energy = float(err @ err)
    sig_energy = float(x @ x)
    rmse = float(np.sqrt(err_energy / x.size)) if x.size else 0.0
    if sig_energy == 0.0:
        snr_db = float("nan")
        fraction = float("nan")
    elif err_energy == 0.0:
        snr_db = float("inf")
        fraction = 0.0
    else:
        snr_db = float(10.0 * np.log10(sig_energy / err_energy))
        fraction = err_energy / sig_energy
    return {
        "rmse": rmse,
        "snr_db": snr_db,
        "residual_energy_fraction": fraction,
    }
