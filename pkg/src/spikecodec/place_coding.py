"""Intensity-to-place coding: codes -> binary spike events.

Every kernel owns three output channels, each carrying a fixed positive
intensity level.  A code becomes a single spike on the channel whose
level is nearest to |intensity|, at sample time
segment_index * segment_len + tau.  With M kernels the stream spans
3*M channels (120 for the default 40-kernel bank).  The sign of the
intensity is dropped at this interface; it is a known lossy step of the
spike path (the code path keeps it).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import CalibrationError
from .pursuit import Code

#: Channels per kernel, fixed by the three-level place code.
LEVELS_PER_KERNEL = 3

#: Relative spread applied to degenerate (tied) calibration levels.
LEVEL_SPREAD = 1e-9


class SpikeEvent(NamedTuple):
    channel: int
    time: int  # sample index from stream origin


@dataclass(frozen=True)
class LevelTable:
    """Per-kernel strictly increasing positive intensity levels, shape (M, 3)."""

    levels: np.ndarray

    def __post_init__(self) -> None:
        levels = np.asarray(self.levels, dtype=np.float64)
        if levels.ndim != 2 or levels.shape[1] != LEVELS_PER_KERNEL:
            raise ValueError(f"levels must have shape (M, {LEVELS_PER_KERNEL})")
        if not np.all(levels > 0.0):
            raise ValueError("all levels must be positive")
        if not np.all(np.diff(levels, axis=1) > 0.0):
            raise ValueError("levels must increase strictly within each kernel")
        levels.flags.writeable = False
        object.__setattr__(self, "levels", levels)

    @property
    def m_count(self) -> int:
        return self.levels.shape[0]

    @property
    def n_channels(self) -> int:
        return self.m_count * LEVELS_PER_KERNEL


@dataclass
class EventStream:
    """Time-sorted spikes over a fixed channel count and duration."""

    channels: np.ndarray          # (n_events,) int64
    times: np.ndarray             # (n_events,) int64, samples from origin
    n_channels: int
    duration: int                 # samples
    sample_rate: int
    collision_count: int = 0

    def __post_init__(self) -> None:
        self.channels = np.asarray(self.channels, dtype=np.int64)
        self.times = np.asarray(self.times, dtype=np.int64)
        if self.channels.shape != self.times.shape or self.channels.ndim != 1:
            raise ValueError("channels and times must be matching 1-D arrays")

    def __len__(self) -> int:
        return self.channels.size

    def __iter__(self) -> Iterator[SpikeEvent]:
        for c, t in zip(self.channels, self.times):
            yield SpikeEvent(int(c), int(t))

    @property
    def duration_seconds(self) -> float:
        return self.duration / self.sample_rate


def calibrate_levels(codes: list[Code], m_count: int,
                     quantiles: tuple[float, float, float] = (0.25, 0.50, 0.90)) -> LevelTable:
    """Set each kernel's three levels from the |intensity| distribution of `codes`.

    Levels are the given quantiles (linear interpolation) of the observed
    magnitudes per kernel; kernels with no observations inherit the global
    quantiles.  Tied quantiles are spread by a minimal multiplicative
    ladder so the table stays strictly increasing.
    """
    magnitudes = np.array([abs(c.intensity) for c in codes], dtype=np.float64)
    magnitudes = magnitudes[magnitudes > 0.0]
    if magnitudes.size == 0:
        raise CalibrationError("cannot calibrate levels from an empty code list")
    q = np.asarray(quantiles, dtype=np.float64)
    global_levels = np.quantile(magnitudes, q)

    by_kernel: dict[int, list[float]] = {}
    for c in codes:
        if c.intensity != 0.0:
            by_kernel.setdefault(c.kernel_index, []).append(abs(c.intensity))

    table = np.empty((m_count, LEVELS_PER_KERNEL))
    for m in range(m_count):
        observed = by_kernel.get(m)
        if observed:
            table[m] = np.quantile(np.asarray(observed), q)
        else:
            table[m] = global_levels
    return LevelTable(_spread_ties(table))


def _spread_ties(table: np.ndarray) -> np.ndarray:
    """Make each row strictly increasing with a minimal multiplicative spread."""
    out = table.copy()
    for row in out:
        if row[0] == row[1] == row[2]:
            c = row[1]
            row[0] = c * (1.0 - LEVEL_SPREAD)
            row[2] = c * (1.0 + LEVEL_SPREAD)
        else:
            for j in (1, 2):
                if row[j] <= row[j - 1]:
                    row[j] = row[j - 1] * (1.0 + LEVEL_SPREAD)
    return out


def map_code(code: Code, table: LevelTable, segment_len: int) -> SpikeEvent:
    """Spike event for one code: nearest level wins, ties toward the lower level."""
    levels = table.levels[code.kernel_index]
    level_index = int(np.argmin(np.abs(abs(code.intensity) - levels)))
    channel = LEVELS_PER_KERNEL * code.kernel_index + level_index
    time = code.segment_index * segment_len + code.tau
    return SpikeEvent(channel, time)


def encode_to_events(codes: list[Code], table: LevelTable, config,
                     duration: int) -> EventStream:
    """Map codes to a sorted spike stream; at most one spike per (channel, time).

    When two codes land on the same channel at the same time the
    first-emitted one keeps its spike and the rest are counted in
    `collision_count` (a binary train cannot carry simultaneous spikes).
    """
    seen: set[tuple[int, int]] = set()
    chans: list[int] = []
    times: list[int] = []
    collisions = 0
    for code in codes:
        event = map_code(code, table, config.segment_len)
        if event.time >= duration:
            raise ValueError(
                f"event time {event.time} beyond stream duration {duration}"
            )
        key = (event.channel, event.time)
        if key in seen:
            collisions += 1
            continue
        seen.add(key)
        chans.append(event.channel)
        times.append(event.time)
    channels = np.asarray(chans, dtype=np.int64)
    time_arr = np.asarray(times, dtype=np.int64)
    order = np.lexsort((channels, time_arr))
    return EventStream(
        channels=channels[order],
        times=time_arr[order],
        n_channels=LEVELS_PER_KERNEL * table.m_count,
        duration=int(duration),
        sample_rate=config.sample_rate,
        collision_count=collisions,
    )
