"""Scikit-learn style estimators wrapping the functional pipeline.

All encoders share one convention: X is a list (or other sequence) of
1-D float arrays, one audio signal per entry, all at the estimator's
sample rate.  ``transform`` returns a list of EventStream objects, so
encoders are interchangeable inside benchmarking code and compose with
sklearn tooling (``get_params``/``set_params``/``clone``).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import baselines, place_coding, probe, pursuit, reconstruct
from .config import EncoderConfig, next_pow2
from .kernels import bank_from_config, build_bank


def as_signal_list(X) -> list[np.ndarray]:
    """Validate X as a sequence of 1-D finite float arrays."""
    if isinstance(X, np.ndarray) and X.ndim == 1:
        X = [X]
    signals = []
    for i, x in enumerate(X):
        arr = np.asarray(x, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError(f"X[{i}] must be a nonempty 1-D signal")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"X[{i}] contains non-finite samples")
        signals.append(arr)
    if not signals:
        raise ValueError("X must contain at least one signal")
    return signals


def _check_fitted(estimator, attr: str) -> None:
    if not hasattr(estimator, attr):
        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet; call fit first."
        )


class MatchingPursuitEncoder(BaseEstimator, TransformerMixin):
    """Gammatone matching-pursuit spike encoder.

    ``fit`` builds the kernel dictionary and calibrates the per-kernel
    intensity levels from the training signals' codes; ``transform``
    emits place-coded event streams (3 channels per kernel);
    ``inverse_transform`` rebuilds waveforms from those streams.

    Parameters
    ----------
    sps : int
        Codes (hence spikes, barring collisions) per segment.
    sample_rate : int
        Sample rate every input signal must share.
    m_count, fmin, fmax, order : dictionary shape and frequency range.
    segment_len : int or None
        Samples per segment; None picks the default 43.5 ms window.
    max_kernel_len : int or None
        Kernel buffer length; None ties it to segment_len.
    level_quantiles : tuple of 3 floats
        Quantiles of |intensity| used as the per-kernel channel levels.
    workers : int or None
        Concurrent per-segment encoding workers.

    Attributes
    ----------
    bank_ : KernelBank
    config_ : EncoderConfig
    levels_ : LevelTable
    n_channels_ : int (3 * m_count)
    """

    def __init__(self, sps: int = 128, sample_rate: int = 16000, m_count: int = 40,
                 fmin: float = 100.0, fmax: float = 7400.0, order: int = 4,
                 segment_len: int | None = None, max_kernel_len: int | None = None,
                 level_quantiles: tuple = (0.25, 0.50, 0.90),
                 workers: int | None = None):
        self.sps = sps
        self.sample_rate = sample_rate
        self.m_count = m_count
        self.fmin = fmin
        self.fmax = fmax
        self.order = order
        self.segment_len = segment_len
        self.max_kernel_len = max_kernel_len
        self.level_quantiles = level_quantiles
        self.workers = workers

    def _make_config(self) -> EncoderConfig:
        return EncoderConfig(
            sps=self.sps, sample_rate=self.sample_rate, m_count=self.m_count,
            fmin=self.fmin, fmax=self.fmax, order=self.order,
            segment_len=self.segment_len, max_kernel_len=self.max_kernel_len,
            level_quantiles=tuple(self.level_quantiles),
        )

    def fit(self, X, y=None):
        signals = as_signal_list(X)
        self.config_ = self._make_config()
        self.bank_ = bank_from_config(self.config_)
        codes: list[pursuit.Code] = []
        for signal in signals:
            per_segment = pursuit.encode_stream(signal, self.bank_, self.config_,
                                                workers=self.workers)
            codes.extend(pursuit.flatten_codes(per_segment))
        self.levels_ = place_coding.calibrate_levels(
            codes, self.config_.m_count, tuple(self.level_quantiles),
        )
        self.n_channels_ = self.levels_.n_channels
        return self

    def encode_codes(self, X) -> list[list[pursuit.Code]]:
        """Pursuit codes per signal (the lossless-side representation)."""
        _check_fitted(self, "bank_")
        return [
            pursuit.flatten_codes(
                pursuit.encode_stream(signal, self.bank_, self.config_,
                                      workers=self.workers)
            )
            for signal in as_signal_list(X)
        ]

    def transform(self, X) -> list[place_coding.EventStream]:
        _check_fitted(self, "levels_")
        streams = []
        for signal in as_signal_list(X):
            codes = pursuit.flatten_codes(
                pursuit.encode_stream(signal, self.bank_, self.config_,
                                      workers=self.workers)
            )
            duration = self._padded_duration(signal.size)
            streams.append(place_coding.encode_to_events(
                codes, self.levels_, self.config_, duration,
            ))
        return streams

    def inverse_transform(self, streams) -> list[np.ndarray]:
        _check_fitted(self, "levels_")
        return [
            reconstruct.reconstruct_from_events(s, self.bank_, self.levels_)
            for s in streams
        ]

    def _padded_duration(self, n_samples: int) -> int:
        seg = self.config_.segment_len
        return seg * (-(-n_samples // seg))


class SpectrogramSomEncoder(BaseEstimator, TransformerMixin):
    """Log-mel frames quantized by a self-organizing map (one spike per frame)."""

    def __init__(self, grid_shape: tuple = (50, 10), n_filters: int = 40,
                 frame_seconds: float = 0.025, hop_seconds: float = 0.010,
                 epochs: int = 20, seed: int = 0, sample_rate: int = 16000):
        self.grid_shape = grid_shape
        self.n_filters = n_filters
        self.frame_seconds = frame_seconds
        self.hop_seconds = hop_seconds
        self.epochs = epochs
        self.seed = seed
        self.sample_rate = sample_rate

    def fit(self, X, y=None):
        signals = as_signal_list(X)
        frames = np.concatenate([
            baselines.mel_spectrogram(s, self.sample_rate, self.n_filters,
                                      self.frame_seconds, self.hop_seconds)
            for s in signals
        ])
        self.codebook_ = baselines.som_train(
            frames, grid_shape=tuple(self.grid_shape), epochs=self.epochs,
            seed=self.seed, sample_rate=self.sample_rate, n_filters=self.n_filters,
            frame_seconds=self.frame_seconds, hop_seconds=self.hop_seconds,
        )
        self.n_channels_ = self.codebook_.n_prototypes
        return self

    def transform(self, X) -> list[place_coding.EventStream]:
        _check_fitted(self, "codebook_")
        return [baselines.spectrogram_encode(s, self.codebook_)
                for s in as_signal_list(X)]


class LauscherEncoder(BaseEstimator, TransformerMixin):
    """Gammatone filterbank -> rectify/compress -> LIF cascade (700 channels)."""

    def __init__(self, n_channels: int = 700, sample_rate: int = 16000,
                 fmin: float = 100.0, fmax: float = 7400.0, order: int = 4,
                 kernel_len: int = 1024, compression: float = 0.3,
                 tau: float = 0.005, refractory: float = 0.001,
                 target_rate: float = 200.0, bushy: bool = False):
        self.n_channels = n_channels
        self.sample_rate = sample_rate
        self.fmin = fmin
        self.fmax = fmax
        self.order = order
        self.kernel_len = kernel_len
        self.compression = compression
        self.tau = tau
        self.refractory = refractory
        self.target_rate = target_rate
        self.bushy = bushy

    def _params(self) -> baselines.LauscherParams:
        return baselines.LauscherParams(
            n_channels=self.n_channels, fmin=self.fmin, fmax=self.fmax,
            order=self.order, kernel_len=self.kernel_len,
            compression=self.compression, tau=self.tau,
            refractory=self.refractory, target_rate=self.target_rate,
            bushy=self.bushy,
        )

    def fit(self, X=None, y=None):
        params = self._params()
        self.params_ = params
        self.bank_ = build_bank(
            params.n_channels, self.sample_rate, params.fmin, params.fmax,
            order=params.order, max_len=params.kernel_len,
            fft_size=next_pow2(params.kernel_len),
        )
        self.thresholds_ = baselines.lauscher_thresholds(self.bank_, params)
        self.n_channels_ = params.n_channels
        return self

    def transform(self, X) -> list[place_coding.EventStream]:
        _check_fitted(self, "bank_")
        return [
            baselines.lauscher_encode(s, self.sample_rate, self.params_,
                                      bank=self.bank_, thresholds=self.thresholds_)
            for s in as_signal_list(X)
        ]


class SpikeCountProbe(BaseEstimator, ClassifierMixin):
    """Nearest-centroid classifier over per-channel spike rates."""

    def fit(self, X, y):
        self.model_ = probe.probe_train(list(X), list(y))
        self.classes_ = np.asarray(self.model_.class_labels)
        return self

    def predict(self, X):
        _check_fitted(self, "model_")
        return np.asarray(probe.probe_predict(self.model_, list(X)))

    def score(self, X, y):
        _check_fitted(self, "model_")
        return probe.probe_eval(self.model_, list(X), list(y))
