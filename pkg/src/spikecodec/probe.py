"""Nearest-centroid probe over pooled per-channel spike counts.

A deliberately tiny discriminability check: the feature vector of a
stream is its per-channel spike count divided by the stream duration in
seconds, and classification is by the nearest class-mean vector.  Good
enough to certify that an encoding separates classes at desk scale; not
a classifier benchmark.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .place_coding import EventStream


@dataclass
class ProbeModel:
    class_labels: list
    centroids: np.ndarray   # (n_classes, n_channels)
    n_channels: int


def stream_features(stream: EventStream) -> np.ndarray:
    """Per-channel spike rate (count / duration in seconds)."""
    counts = np.bincount(stream.channels, minlength=stream.n_channels).astype(np.float64)
    return counts / stream.duration_seconds


def _as_stream(item) -> EventStream:
    if isinstance(item, EventStream):
        return item
    from .formats import read_events
    return read_events(Path(item))


def probe_train(streams, labels) -> ProbeModel:
    """Fit per-class centroid vectors; `streams` may be EventStreams or file paths."""
    streams = [_as_stream(s) for s in streams]
    labels = list(labels)
    if len(streams) != len(labels):
        raise ValueError("one label per stream required")
    if len(set(labels)) < 2:
        raise ValueError("probe needs at least 2 classes")
    n_channels = streams[0].n_channels
    features = np.stack([stream_features(s) for s in streams])
    if any(s.n_channels != n_channels for s in streams):
        raise ValueError("all streams must share one channel count")
    class_labels = sorted(set(labels))
    centroids = np.stack([
        features[[i for i, y in enumerate(labels) if y == label]].mean(axis=0)
        for label in class_labels
    ])
    return ProbeModel(class_labels=class_labels, centroids=centroids, n_channels=n_channels)


def probe_predict(model: ProbeModel, streams) -> list:
    streams = [_as_stream(s) for s in streams]
    out = []
    for s in streams:
        if s.n_channels != model.n_channels:
            raise ValueError(
                f"stream has {s.n_channels} channels, model expects {model.n_channels}"
            )
        d = np.linalg.norm(model.centroids - stream_features(s)[None, :], axis=1)
        out.append(model.class_labels[int(np.argmin(d))])
    return out


def probe_eval(model: ProbeModel, streams, labels) -> float:
    """Fraction of streams assigned their true label."""
    predictions = probe_predict(model, streams)
    labels = list(labels)
    if len(predictions) != len(labels):
        raise ValueError("one label per stream required")
    hits = sum(p == y for p, y in zip(predictions, labels))
    return hits / len(labels)
