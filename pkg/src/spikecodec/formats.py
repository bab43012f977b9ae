"""Bit-exact binary serialization for event streams, code lists, and level tables.

Event file layout (all little-endian):

    offset  size  field
    0       4     magic "SPKT"
    4       2     version (u16, currently 1)
    6       4     n_channels (u32)
    10      4     sample_rate (u32)
    14      8     duration in samples (u64)
    22      8     event_count (u64)
    30      4     flags (u32, bit 0 = binarized)
    34      12*N  records: channel (u32), time (u64)
    end     4     CRC-32 of everything before it

Code file layout:

    0       4     magic "SPKC"
    4       2     version (u16, currently 1)
    6       4     sample_rate (u32)
    10      4     segment_len (u32)
    14      4     sps (u32)
    18      4     m_count (u32)
    22      4     kernel order (u32)
    26      4     max_kernel_len (u32)
    30      8     fmin in Hz (f64)
    38      8     fmax in Hz (f64)
    46      8     code_count (u64)
    54      8     duration in samples (u64)
    62      24*N  records: segment_index (u64), m (u32), tau (u32), s (f64)
    end     4     CRC-32 of everything before it

The code header carries the full bank geometry so a code file decodes
without the original config.

The trailing checksum exists so any single-byte corruption is detected;
truncations are caught by the count/size consistency check first.  Level
tables use a plain CSV (kernel_index, level0, level1, level2) whose float
fields round-trip exactly via repr.

Writes are atomic (temp file + rename).
"""

from __future__ import annotations

import os
import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    BadVersionError,
    ChecksumError,
    CountMismatchError,
    FormatError,
    TruncatedFileError,
)
from .place_coding import EventStream, LevelTable
from .pursuit import Code

EVENT_MAGIC = b"SPKT"
CODE_MAGIC = b"SPKC"
FORMAT_VERSION = 1

_EVENT_HEADER = struct.Struct("<4sHIIQQI")
_CODE_HEADER = struct.Struct("<4sHIIIIIIddQQ")
_EVENT_RECORD = np.dtype([("channel", "<u4"), ("time", "<u8")])
_CODE_RECORD = np.dtype([("segment", "<u8"), ("m", "<u4"), ("tau", "<u4"), ("s", "<f8")])
_CRC = struct.Struct("<I")

FLAG_BINARIZED = 1


def _atomic_write(path: Path, payload: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)


def _read_and_check(path: Path, magic: bytes, header: struct.Struct,
                    record_size: int, count_at: int):
    """Shared header/size/CRC validation; returns (header fields, payload bytes)."""
    try:
        blob = Path(path).read_bytes()
    except IsADirectoryError as exc:
        raise FormatError(f"{path} is a directory") from exc
    if len(blob) < header.size + _CRC.size:
        raise TruncatedFileError(f"{path}: {len(blob)} bytes is too short for a header")
    fields = header.unpack_from(blob, 0)
    if fields[0] != magic:
        raise BadMagicError(f"{path}: bad magic {fields[0]!r}, expected {magic!r}")
    if fields[1] != FORMAT_VERSION:
        raise BadVersionError(f"{path}: unsupported version {fields[1]}")
    count = fields[count_at]
    expected = header.size + record_size * count + _CRC.size
    if len(blob) < expected:
        raise TruncatedFileError(
            f"{path}: header declares {count} records ({expected} bytes) "
            f"but file has {len(blob)}"
        )
    if len(blob) > expected:
        raise CountMismatchError(
            f"{path}: {len(blob) - expected} trailing bytes beyond the declared payload"
        )
    (stored_crc,) = _CRC.unpack_from(blob, len(blob) - _CRC.size)
    actual_crc = zlib.crc32(blob[:-_CRC.size])
    if stored_crc != actual_crc:
        raise ChecksumError(f"{path}: CRC mismatch (stored {stored_crc:#x}, actual {actual_crc:#x})")
    payload = blob[header.size:len(blob) - _CRC.size]
    return fields, payload


# ---------------------------------------------------------------------------
# event streams
# ---------------------------------------------------------------------------


def write_events(path: str | Path, stream: EventStream, binarized: bool = False) -> None:
    path = Path(path)
    flags = FLAG_BINARIZED if binarized else 0
    header = _EVENT_HEADER.pack(
        EVENT_MAGIC, FORMAT_VERSION, stream.n_channels, stream.sample_rate,
        stream.duration, len(stream), flags,
    )
    records = np.empty(len(stream), dtype=_EVENT_RECORD)
    records["channel"] = stream.channels
    records["time"] = stream.times
    body = header + records.tobytes()
    _atomic_write(path, body + _CRC.pack(zlib.crc32(body)))


def read_events(path: str | Path) -> EventStream:
    fields, payload = _read_and_check(
        Path(path), EVENT_MAGIC, _EVENT_HEADER, _EVENT_RECORD.itemsize, count_at=5,
    )
    _, _, n_channels, sample_rate, duration, count, flags = fields
    records = np.frombuffer(payload, dtype=_EVENT_RECORD)
    channels = records["channel"].astype(np.int64)
    times = records["time"].astype(np.int64)
    if count and channels.max() >= n_channels:
        raise FormatError(f"{path}: channel {channels.max()} >= n_channels {n_channels}")
    if count and times.max() >= duration:
        raise FormatError(f"{path}: event time {times.max()} beyond duration {duration}")
    order = np.lexsort((channels, times))
    if not np.array_equal(order, np.arange(count)):
        raise FormatError(f"{path}: events are not sorted by (time, channel)")
    return EventStream(
        channels=channels, times=times, n_channels=n_channels,
        duration=duration, sample_rate=sample_rate,
    )


# ---------------------------------------------------------------------------
# code lists
# ---------------------------------------------------------------------------


def write_codes(path: str | Path, codes: list[Code], config, duration: int) -> None:
    """Serialize codes with the bank geometry taken from `config`."""
    path = Path(path)
    header = _CODE_HEADER.pack(
        CODE_MAGIC, FORMAT_VERSION, config.sample_rate, config.segment_len,
        config.sps, config.m_count, config.order, config.max_kernel_len,
        config.fmin, config.fmax, len(codes), duration,
    )
    records = np.empty(len(codes), dtype=_CODE_RECORD)
    for i, code in enumerate(codes):
        records[i] = (code.segment_index, code.kernel_index, code.tau, code.intensity)
    body = header + records.tobytes()
    _atomic_write(path, body + _CRC.pack(zlib.crc32(body)))


def read_codes(path: str | Path):
    """Returns (codes, metadata dict mirroring the header fields)."""
    fields, payload = _read_and_check(
        Path(path), CODE_MAGIC, _CODE_HEADER, _CODE_RECORD.itemsize, count_at=10,
    )
    (_, _, sample_rate, segment_len, sps, m_count, order, max_kernel_len,
     fmin, fmax, count, duration) = fields
    records = np.frombuffer(payload, dtype=_CODE_RECORD)
    if count and records["m"].max() >= m_count:
        raise FormatError(f"{path}: kernel index {records['m'].max()} >= m_count {m_count}")
    codes = [
        Code(int(r["m"]), int(r["tau"]), float(r["s"]), int(r["segment"]))
        for r in records
    ]
    meta = {
        "sample_rate": sample_rate,
        "segment_len": segment_len,
        "sps": sps,
        "m_count": m_count,
        "order": order,
        "max_kernel_len": max_kernel_len,
        "fmin": fmin,
        "fmax": fmax,
        "duration": duration,
    }
    return codes, meta


# ---------------------------------------------------------------------------
# level tables (CSV)
# ---------------------------------------------------------------------------

_LEVEL_HEADER = "kernel_index,level0,level1,level2"


def write_level_table(path: str | Path, table: LevelTable) -> None:
    lines = [_LEVEL_HEADER]
    for m, row in enumerate(table.levels):
        lines.append(f"{m},{float(row[0])!r},{float(row[1])!r},{float(row[2])!r}")
    _atomic_write(Path(path), ("\n".join(lines) + "\n").encode())


def read_level_table(path: str | Path) -> LevelTable:
    path = Path(path)
    lines = path.read_text().strip().splitlines()
    if not lines or lines[0].strip() != _LEVEL_HEADER:
        raise FormatError(f"{path}: missing level-table header line")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 4:
            raise FormatError(f"{path}:{lineno}: expected 4 comma-separated fields")
        try:
            idx = int(parts[0])
            values = [float(p) for p in parts[1:]]
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
        if idx != lineno - 2:
            raise FormatError(f"{path}:{lineno}: kernel indices must be consecutive from 0")
        rows.append(values)
    if not rows:
        raise FormatError(f"{path}: table has no rows")
    try:
        return LevelTable(np.asarray(rows))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
