"""Reference baseline encoders for comparative benchmarking.

Two deliberately simplified encoders with the same EventStream output
contract as the pursuit pipeline:

* Spectrogram-SOM: 40-band log-mel frames quantized against a 50x10
  self-organizing map; one spike per frame on the winning prototype's
  channel (500 channels).
* Lauscher-style cascade: a 700-channel gammatone filterbank feeding
  half-wave rectification, power-law compression, and per-channel leaky
  integrate-and-fire neurons with an absolute refractory period; an
  optional second ("bushy cell") LIF layer resharpens the spike timing.

Neither aims at biophysical fidelity; they exist so spike statistics can
be compared across encoder families on equal terms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import next_pow2
from .errors import ConfigurationError
from .kernels import build_bank
from .place_coding import EventStream

# ---------------------------------------------------------------------------
# mel spectrogram front end
# ---------------------------------------------------------------------------

#: Energy floor inserted before the log so silence maps to a finite value.
MEL_FLOOR = 1e-10


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (np.power(10.0, np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_filters: int, n_fft: int, sample_rate: int,
                   fmin: float = 0.0, fmax: float | None = None) -> np.ndarray:
    """Triangular mel filters, shape (n_filters, n_fft // 2 + 1)."""
    if fmax is None:
        fmax = sample_rate / 2.0
    edges_hz = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_filters + 2))
    bin_freqs = np.arange(n_fft // 2 + 1) * sample_rate / n_fft
    bank = np.zeros((n_filters, bin_freqs.size))
    for i in range(n_filters):
        lo, center, hi = edges_hz[i], edges_hz[i + 1], edges_hz[i + 2]
        rising = (bin_freqs - lo) / max(center - lo, 1e-12)
        falling = (hi - bin_freqs) / max(hi - center, 1e-12)
        bank[i] = np.clip(np.minimum(rising, falling), 0.0, None)
    return bank


def mel_band_edges(n_filters: int, sample_rate: int,
                   fmin: float = 0.0, fmax: float | None = None) -> np.ndarray:
    """(n_filters, 2) low/high band edges in Hz (triangle feet)."""
    if fmax is None:
        fmax = sample_rate / 2.0
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_filters + 2))
    return np.stack([edges[:-2], edges[2:]], axis=1)


def frame_signal(signal: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """(n_frames, frame_len) view of the signal; short input yields one padded frame."""
    signal = np.asarray(signal, dtype=np.float64)
    if signal.size < frame_len:
        padded = np.zeros(frame_len)
        padded[:signal.size] = signal
        return padded[None, :]
    n_frames = 1 + (signal.size - frame_len) // hop
    idx = np.arange(frame_len)[None, :] + hop * np.arange(n_frames)[:, None]
    return signal[idx]


def mel_spectrogram(signal: np.ndarray, sample_rate: int = 16000,
                    n_filters: int = 40, frame_seconds: float = 0.025,
                    hop_seconds: float = 0.010) -> np.ndarray:
    """Log-compressed mel energies, shape (n_frames, n_filters)."""
    frame_len = round(frame_seconds * sample_rate)
    hop = round(hop_seconds * sample_rate)
    frames = frame_signal(signal, frame_len, hop)
    window = np.hanning(frame_len)
    n_fft = next_pow2(frame_len)
    spectra = np.abs(np.fft.rfft(frames * window, n_fft, axis=1)) ** 2
    filters = mel_filterbank(n_filters, n_fft, sample_rate)
    energies = spectra @ filters.T
    return np.log(energies + MEL_FLOOR)


# ---------------------------------------------------------------------------
# self-organizing map codebook
# ---------------------------------------------------------------------------


@dataclass
class SomCodebook:
    prototypes: np.ndarray        # (grid_rows * grid_cols, n_features)
    grid_shape: tuple[int, int]
    epochs: int
    learning_rate: tuple[float, float]
    radius: tuple[float, float]
    seed: int
    # front-end parameters the codebook was trained with
    sample_rate: int = 16000
    n_filters: int = 40
    frame_seconds: float = 0.025
    hop_seconds: float = 0.010

    @property
    def n_prototypes(self) -> int:
        return self.prototypes.shape[0]


def _grid_coordinates(grid_shape: tuple[int, int]) -> np.ndarray:
    rows, cols = grid_shape
    rr, cc = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    return np.stack([rr.ravel(), cc.ravel()], axis=1).astype(np.float64)


def nearest_prototype(frames: np.ndarray, prototypes: np.ndarray) -> np.ndarray:
    """Index of the Euclidean-nearest prototype for each frame."""
    frames = np.atleast_2d(frames)
    d2 = (
        (frames ** 2).sum(axis=1)[:, None]
        - 2.0 * frames @ prototypes.T
        + (prototypes ** 2).sum(axis=1)[None, :]
    )
    return np.argmin(d2, axis=1)


def som_train(frames: np.ndarray, grid_shape: tuple[int, int] = (50, 10),
              epochs: int = 20, seed: int = 0,
              learning_rate: tuple[float, float] = (0.5, 0.01),
              radius: tuple[float, float] | None = None,
              sample_rate: int = 16000, n_filters: int = 40,
              frame_seconds: float = 0.025, hop_seconds: float = 0.010) -> SomCodebook:
    """Train a SOM codebook on feature frames (deterministic given `seed`).

    Prototypes are initialized by sampling training frames; the learning
    rate and Gaussian neighborhood radius decay exponentially per epoch
    from their first to their second value.  Presentation order is
    reshuffled every epoch from the seeded generator.
    """
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    if frames.shape[0] == 0:
        raise ValueError("cannot train a SOM on an empty frame set")
    if radius is None:
        radius = (max(grid_shape) / 2.0, 1.0)
    rng = np.random.default_rng(seed)
    n_units = grid_shape[0] * grid_shape[1]
    prototypes = frames[rng.integers(0, frames.shape[0], size=n_units)].copy()
    coords = _grid_coordinates(grid_shape)

    denom = max(epochs - 1, 1)
    for epoch in range(epochs):
        lr = learning_rate[0] * (learning_rate[1] / learning_rate[0]) ** (epoch / denom)
        sigma = radius[0] * (radius[1] / radius[0]) ** (epoch / denom)
        for idx in rng.permutation(frames.shape[0]):
            x = frames[idx]
            bmu = int(nearest_prototype(x[None, :], prototypes)[0])
            grid_d2 = ((coords - coords[bmu]) ** 2).sum(axis=1)
            influence = lr * np.exp(-grid_d2 / (2.0 * sigma * sigma))
            prototypes += influence[:, None] * (x - prototypes)
    return SomCodebook(
        prototypes=prototypes, grid_shape=grid_shape, epochs=epochs,
        learning_rate=learning_rate, radius=radius, seed=seed,
        sample_rate=sample_rate, n_filters=n_filters,
        frame_seconds=frame_seconds, hop_seconds=hop_seconds,
    )


def spectrogram_encode(signal: np.ndarray, codebook: SomCodebook) -> EventStream:
    """One spike per frame on the channel of the nearest prototype.

    Spike times sit at the frame centers; the stream spans one channel
    per prototype (500 for the default 50x10 grid).
    """
    signal = np.asarray(signal, dtype=np.float64)
    feats = mel_spectrogram(
        signal, codebook.sample_rate, codebook.n_filters,
        codebook.frame_seconds, codebook.hop_seconds,
    )
    winners = nearest_prototype(feats, codebook.prototypes)
    frame_len = round(codebook.frame_seconds * codebook.sample_rate)
    hop = round(codebook.hop_seconds * codebook.sample_rate)
    times = hop * np.arange(feats.shape[0]) + frame_len // 2
    duration = max(int(signal.size), int(times[-1]) + 1)
    order = np.lexsort((winners, times))
    return EventStream(
        channels=winners[order].astype(np.int64),
        times=times[order].astype(np.int64),
        n_channels=codebook.n_prototypes,
        duration=duration,
        sample_rate=codebook.sample_rate,
    )


# ---------------------------------------------------------------------------
# leaky integrate-and-fire cascade
# ---------------------------------------------------------------------------


@dataclass
class LifState:
    """Single-neuron reference state (the array path mirrors this exactly)."""

    potential: float = 0.0
    threshold: float = 1.0
    tau: float = 0.005            # leak time constant, seconds
    refractory_remaining: int = 0  # samples


def lif_step(state: LifState, drive: float, dt: float) -> bool:
    """Advance one sample; returns True when the neuron fires."""
    if state.refractory_remaining > 0:
        state.refractory_remaining -= 1
        return False
    decay = np.exp(-dt / state.tau)
    state.potential = state.potential * decay + (1.0 - decay) * drive
    if state.potential >= state.threshold:
        state.potential = 0.0
        return True
    return False


def lif_spike_trains(drive: np.ndarray, thresholds: np.ndarray, tau: float,
                     refractory: float, sample_rate: int) -> np.ndarray:
    """Boolean (n_channels, n_samples) spike raster for a bank of LIF neurons.

    Channels evolve independently; membrane resets to 0 on a spike and
    stays silent for the absolute refractory period.
    """
    drive = np.atleast_2d(drive)
    n_channels, n_samples = drive.shape
    thresholds = np.broadcast_to(np.asarray(thresholds, dtype=np.float64), (n_channels,))
    decay = np.exp(-1.0 / (tau * sample_rate))
    refractory_samples = round(refractory * sample_rate)
    v = np.zeros(n_channels)
    refr = np.zeros(n_channels, dtype=np.int64)
    spikes = np.zeros((n_channels, n_samples), dtype=bool)
    for t in range(n_samples):
        active = refr == 0
        refr[~active] -= 1
        v[active] = v[active] * decay + (1.0 - decay) * drive[active, t]
        fired = active & (v >= thresholds)
        if fired.any():
            spikes[fired, t] = True
            v[fired] = 0.0
            refr[fired] = refractory_samples
    return spikes


def bushy_layer(spikes: np.ndarray, weight: float, tau: float, refractory: float,
                sample_rate: int, threshold: float = 1.0) -> np.ndarray:
    """Second LIF layer driven by spike impulses (one neuron per channel).

    Each input spike bumps the membrane by `weight`; the membrane leaks
    with time constant `tau` and the neuron fires on crossing `threshold`,
    which sharpens the phase-locking of the first layer's output.
    """
    spikes = np.atleast_2d(spikes)
    n_channels, n_samples = spikes.shape
    decay = np.exp(-1.0 / (tau * sample_rate))
    refractory_samples = round(refractory * sample_rate)
    v = np.zeros(n_channels)
    refr = np.zeros(n_channels, dtype=np.int64)
    out = np.zeros_like(spikes, dtype=bool)
    for t in range(n_samples):
        active = refr == 0
        refr[~active] -= 1
        v *= decay
        v[active] += weight * spikes[active, t]
        fired = active & (v >= threshold)
        if fired.any():
            out[fired, t] = True
            v[fired] = 0.0
            refr[fired] = refractory_samples
    return out


def _halfwave_compressed_mean(exponent: float) -> float:
    """Mean of max(sin, 0)**exponent over one period (fine-grid quadrature)."""
    theta = np.linspace(0.0, np.pi, 20001)
    return float(np.trapezoid(np.sin(theta) ** exponent, theta) / (2.0 * np.pi))


def _tone_gain(kernel: np.ndarray, center_freq: float, sample_rate: int) -> float:
    """Magnitude response of a kernel to a unit tone at its center frequency."""
    n = np.arange(kernel.size)
    return float(np.abs(kernel @ np.exp(-2j * np.pi * center_freq * n / sample_rate)))


@dataclass
class LauscherParams:
    n_channels: int = 700
    fmin: float = 100.0
    fmax: float = 7400.0
    order: int = 4
    kernel_len: int = 1024
    compression: float = 0.3
    tau: float = 0.005            # LIF leak, seconds
    refractory: float = 0.001     # absolute refractory, seconds
    target_rate: float = 200.0    # Hz, for a full-scale center-frequency tone
    bushy: bool = False
    bushy_weight: float = 0.7
    bushy_tau: float = 0.002


def lauscher_thresholds(bank, params: LauscherParams) -> np.ndarray:
    """Per-channel LIF thresholds hitting `target_rate` on a full-scale tone.

    For a constant drive i the LIF period is refractory + tau*ln(i/(i-theta)),
    so theta = i * (1 - exp(-(1/rate - refractory)/tau)).  The drive of a
    full-scale tone at the channel's center frequency is approximated by
    its rectified-compressed mean, gain**compression times the half-wave
    sine mean.
    """
    integrate_time = 1.0 / params.target_rate - params.refractory
    if integrate_time <= 0:
        raise ConfigurationError("target_rate too high for the refractory period")
    theta_fraction = 1.0 - np.exp(-integrate_time / params.tau)
    c = _halfwave_compressed_mean(params.compression)
    gains = np.array([
        _tone_gain(k.samples[:k.effective_len], k.center_freq, bank.sample_rate)
        for k in bank.kernels
    ])
    mean_drive = c * gains ** params.compression
    return theta_fraction * mean_drive


def lauscher_encode(signal: np.ndarray, sample_rate: int = 16000,
                    params: LauscherParams | None = None,
                    bank=None, thresholds: np.ndarray | None = None,
                    channel_block: int = 128) -> EventStream:
    """Filterbank -> rectify -> compress -> LIF cascade over 700 channels.

    Passing a prebuilt `bank`/`thresholds` pair (see `lauscher_thresholds`)
    avoids rebuilding the 700-kernel dictionary per call.  Channels are
    processed in blocks to bound the transient memory of the FFT
    convolution.
    """
    params = params or LauscherParams()
    signal = np.asarray(signal, dtype=np.float64)
    if signal.ndim != 1 or signal.size == 0:
        raise ValueError("signal must be a nonempty 1-D array")
    if bank is None:
        bank = build_bank(
            params.n_channels, sample_rate, params.fmin, params.fmax,
            order=params.order, max_len=params.kernel_len,
            fft_size=next_pow2(params.kernel_len),
        )
    if thresholds is None:
        thresholds = lauscher_thresholds(bank, params)

    n = signal.size
    n_fft = next_pow2(n + bank.max_kernel_len - 1)
    spectrum = np.fft.rfft(signal, n_fft)
    chans: list[np.ndarray] = []
    times: list[np.ndarray] = []
    for start in range(0, bank.m_count, channel_block):
        stop = min(start + channel_block, bank.m_count)
        kernel_spectra = np.fft.rfft(bank.samples_matrix[start:stop], n_fft, axis=1)
        filtered = np.fft.irfft(kernel_spectra * spectrum, n_fft, axis=1)[:, :n]
        drive = np.clip(filtered, 0.0, None) ** params.compression
        spikes = lif_spike_trains(drive, thresholds[start:stop], params.tau,
                                  params.refractory, sample_rate)
        if params.bushy:
            spikes = bushy_layer(spikes, params.bushy_weight, params.bushy_tau,
                                 params.refractory, sample_rate)
        ch, t = np.nonzero(spikes)
        chans.append(ch + start)
        times.append(t)
    channels = np.concatenate(chans)
    time_arr = np.concatenate(times)
    order = np.lexsort((channels, time_arr))
    return EventStream(
        channels=channels[order].astype(np.int64),
        times=time_arr[order].astype(np.int64),
        n_channels=bank.m_count,
        duration=int(n),
        sample_rate=sample_rate,
    )
