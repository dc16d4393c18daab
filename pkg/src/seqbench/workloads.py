"""Application-shaped file workloads: byte, line, block and record access.

These are the little programs people actually write, expressed at the
granularities worth comparing: one byte per call, one text line per call,
one fixed block per call, and fixed-width typed records.  Each runner
reports what it processed, a checksum of the payload it saw, and a
ThroughputSample, so different granularities over the same data can be
checked for equivalence and compared for speed.

Also here: a length-prefixed typed binary stream (the portable way to put
numbers and strings in a file without inventing a text format), a line
counter, and the classic 100-byte-record sort input generator.
"""
from __future__ import annotations

import struct
import time
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Sequence

import numpy as np

from .bench import ThroughputSample
from .core import Direction, OpenDisposition
from .engine import FlushLevel, open_file
from .errors import StreamTruncatedError

__all__ = [
    "ByteAtATime",
    "LineAtATime",
    "BlockAtATime",
    "TypedRecords",
    "WorkloadResult",
    "run_read",
    "run_write",
    "TypedWriter",
    "TypedReader",
    "typed_roundtrip",
    "count_lines",
    "write_sort_file",
    "SORT_RECORD_BYTES",
]

DEFAULT_BLOCK = 64 * 1024
RECORD_BYTES = 100

# Sort input layout: a random key, then the record's decimal index
# zero-padded to 20 digits, then spaces out to 100 bytes.  Fixed-width
# records, no line terminators.
SORT_RECORD_BYTES = RECORD_BYTES
_SORT_KEY_BYTES = 10
_SORT_INDEX_DIGITS = 20


class Granularity:
    """Marker base class; see the concrete granularities below."""


@dataclass(frozen=True)
class ByteAtATime(Granularity):
    pass


@dataclass(frozen=True)
class LineAtATime(Granularity):
    pass


@dataclass(frozen=True)
class BlockAtATime(Granularity):
    block: int = DEFAULT_BLOCK

    def __post_init__(self):
        if self.block < 1:
            raise ValueError(f"block must be at least 1 byte, got {self.block}")


@dataclass(frozen=True)
class TypedRecords(Granularity):
    """Fixed 100-byte records, one record per call."""


@dataclass(frozen=True)
class WorkloadResult:
    """What a workload run processed and how fast.

    For LineAtATime, ``bytes_processed`` and ``checksum`` cover line
    payloads only (terminators excluded); every other granularity covers
    the raw file content.
    """

    bytes_processed: int
    checksum: int
    sample: ThroughputSample


def _strip_terminator(line: bytes) -> bytes:
    if line.endswith(b"\r\n"):
        return line[:-2]
    if line.endswith(b"\n"):
        return line[:-1]
    return line


def run_read(path: str | Path, granularity: Granularity) -> WorkloadResult:
    """Read the whole file at the given granularity and checksum it."""
    if isinstance(granularity, LineAtATime):
        return _read_lines(path)
    if isinstance(granularity, ByteAtATime):
        step = 1
    elif isinstance(granularity, BlockAtATime):
        step = granularity.block
    elif isinstance(granularity, TypedRecords):
        step = RECORD_BYTES
    else:
        raise TypeError(f"unknown granularity {granularity!r}")
    checksum = 1
    processed = 0
    requests = 0
    buffer = bytearray(step)
    cpu_start = time.process_time()
    wall_start = time.perf_counter()
    with open_file(path, OpenDisposition.OPEN, Direction.READ) as handle:
        while True:
            got = handle.read_block(buffer, step)
            if got == 0:
                break
            checksum = zlib.adler32(memoryview(buffer)[:got], checksum)
            processed += got
            requests += 1
    wall = time.perf_counter() - wall_start
    cpu = time.process_time() - cpu_start
    return WorkloadResult(processed, checksum, ThroughputSample(processed, wall, cpu, requests))


def _read_lines(path: str | Path) -> WorkloadResult:
    checksum = 1
    payload = 0
    lines = 0
    cpu_start = time.process_time()
    wall_start = time.perf_counter()
    with open(path, "rb") as stream:
        for line in stream:
            body = _strip_terminator(line)
            checksum = zlib.adler32(body, checksum)
            payload += len(body)
            lines += 1
    wall = time.perf_counter() - wall_start
    cpu = time.process_time() - cpu_start
    return WorkloadResult(payload, checksum, ThroughputSample(payload, wall, cpu, lines))


def run_write(
    path: str | Path,
    granularity: Granularity,
    total_bytes: int,
    rng: np.random.Generator,
) -> WorkloadResult:
    """Write exactly ``total_bytes`` of seeded random content.

    The file is created fresh (truncated if present).  LineAtATime writes
    newline-terminated lines of random lowercase letters with lengths
    uniform on [0, 78], truncating the last line so the total is exact;
    its checksum covers payloads only, mirroring run_read.  TypedRecords
    requires a multiple of 100 bytes.
    """
    if total_bytes < 0:
        raise ValueError(f"total may not be negative, got {total_bytes}")
    if isinstance(granularity, TypedRecords) and total_bytes % RECORD_BYTES:
        raise ValueError(
            f"typed records are {RECORD_BYTES} bytes; {total_bytes} is not a multiple"
        )
    checksum = 1
    requests = 0
    cpu_start = time.process_time()
    wall_start = time.perf_counter()
    with open_file(path, OpenDisposition.CREATE, Direction.WRITE) as handle:
        if isinstance(granularity, ByteAtATime):
            remaining = total_bytes
            while remaining:
                chunk = rng.bytes(min(DEFAULT_BLOCK, remaining))
                checksum = zlib.adler32(chunk, checksum)
                view = memoryview(chunk)
                for index in range(len(chunk)):
                    handle.write_block(view[index : index + 1], 1)
                    requests += 1
                remaining -= len(chunk)
        elif isinstance(granularity, LineAtATime):
            remaining = total_bytes
            while remaining:
                length = int(rng.integers(0, 79))
                if length + 1 > remaining:
                    length = remaining - 1
                body = rng.integers(97, 123, size=length, dtype=np.uint8).tobytes()
                checksum = zlib.adler32(body, checksum)
                handle.write_block(body + b"\n")
                requests += 1
                remaining -= length + 1
        else:
            if isinstance(granularity, BlockAtATime):
                step = granularity.block
            elif isinstance(granularity, TypedRecords):
                step = RECORD_BYTES
            else:
                raise TypeError(f"unknown granularity {granularity!r}")
            remaining = total_bytes
            while remaining:
                chunk = rng.bytes(min(step, remaining))
                checksum = zlib.adler32(chunk, checksum)
                handle.write_block(chunk)
                requests += 1
                remaining -= len(chunk)
        handle.flush(FlushLevel.APPLICATION_BUFFERS)
    wall = time.perf_counter() - wall_start
    cpu = time.process_time() - cpu_start
    sample = ThroughputSample(total_bytes, wall, cpu, requests)
    return WorkloadResult(total_bytes, checksum, sample)


# -- typed binary streams ----------------------------------------------

_U32 = struct.Struct("<I")
_I64 = struct.Struct("<q")
_F64 = struct.Struct("<d")
U32_MAX = (1 << 32) - 1
I64_MIN, I64_MAX = -(1 << 63), (1 << 63) - 1


class TypedWriter:
    """Writes u32/i64/f64/str values to a binary stream.

    Numbers are fixed-width little-endian; strings are UTF-8 with a u32
    little-endian byte-length prefix.  The format is self-framing, so a
    reader issuing the same sequence of typed reads gets the values back.
    """

    def __init__(self, stream: BinaryIO):
        self._stream = stream

    def write_u32(self, value: int) -> None:
        if not 0 <= value <= U32_MAX:
            raise ValueError(f"{value} does not fit in an unsigned 32-bit field")
        self._stream.write(_U32.pack(value))

    def write_i64(self, value: int) -> None:
        if not I64_MIN <= value <= I64_MAX:
            raise ValueError(f"{value} does not fit in a signed 64-bit field")
        self._stream.write(_I64.pack(value))

    def write_f64(self, value: float) -> None:
        self._stream.write(_F64.pack(value))

    def write_str(self, value: str) -> None:
        data = value.encode("utf-8")
        if len(data) > U32_MAX:
            raise ValueError("string is too long for a u32 length prefix")
        self._stream.write(_U32.pack(len(data)))
        self._stream.write(data)

    def write(self, kind: str, value) -> None:
        getattr(self, f"write_{kind}")(value)


class TypedReader:
    """Reads values written by TypedWriter, in the same order and kinds."""

    def __init__(self, stream: BinaryIO):
        self._stream = stream

    def _exactly(self, count: int) -> bytes:
        data = self._stream.read(count)
        if len(data) != count:
            raise StreamTruncatedError(
                f"unexpected end of stream: wanted {count} more bytes, found {len(data)}"
            )
        return data

    def read_u32(self) -> int:
        return _U32.unpack(self._exactly(4))[0]

    def read_i64(self) -> int:
        return _I64.unpack(self._exactly(8))[0]

    def read_f64(self) -> float:
        return _F64.unpack(self._exactly(8))[0]

    def read_str(self) -> str:
        length = self.read_u32()
        return self._exactly(length).decode("utf-8")

    def read(self, kind: str):
        return getattr(self, f"read_{kind}")()


def typed_roundtrip(values: Sequence[tuple[str, object]], path: str | Path) -> list[tuple[str, object]]:
    """Write (kind, value) pairs to ``path``, read them back, return them."""
    with open(path, "wb") as stream:
        writer = TypedWriter(stream)
        for kind, value in values:
            writer.write(kind, value)
    out = []
    with open(path, "rb") as stream:
        reader = TypedReader(stream)
        for kind, _ in values:
            out.append((kind, reader.read(kind)))
    return out


# -- text and sort-input helpers -----------------------------------------

def count_lines(path: str | Path, chunk: int = 1 << 20) -> int:
    """Count lines the way editors do: LF terminated, CRLF welcome, and an
    unterminated final fragment still counts as a line."""
    lines = 0
    last = b""
    with open(path, "rb") as stream:
        while True:
            data = stream.read(chunk)
            if not data:
                break
            lines += data.count(b"\n")
            last = data[-1:]
    if last and last != b"\n":
        lines += 1
    return lines


def write_sort_file(
    path: str | Path,
    record_count: int,
    rng: np.random.Generator,
    *,
    io_block: int = DEFAULT_BLOCK,
) -> None:
    """Generate the fixed-width sort input file (see SORT_RECORD_BYTES).

    Record i is 10 seeded-random key bytes, i as a zero-padded 20-digit
    decimal, and spaces out to 100 bytes.  Output is written in
    ``io_block``-byte requests regardless of record boundaries.
    """
    if record_count < 0:
        raise ValueError(f"record count may not be negative, got {record_count}")
    if io_block < 1:
        raise ValueError(f"io block must be at least 1 byte, got {io_block}")
    build_chunk = 4096  # records materialized per numpy batch
    pending = bytearray()
    with open_file(path, OpenDisposition.CREATE, Direction.WRITE) as handle:
        for start in range(0, record_count, build_chunk):
            count = min(build_chunk, record_count - start)
            records = np.full((count, RECORD_BYTES), 0x20, dtype=np.uint8)
            records[:, :_SORT_KEY_BYTES] = rng.integers(
                0, 256, size=(count, _SORT_KEY_BYTES), dtype=np.uint8
            )
            digits = "".join(f"{i:020d}" for i in range(start, start + count))
            records[:, _SORT_KEY_BYTES : _SORT_KEY_BYTES + _SORT_INDEX_DIGITS] = (
                np.frombuffer(digits.encode("ascii"), dtype=np.uint8).reshape(count, -1)
            )
            pending += records.tobytes()
            while len(pending) >= io_block:
                handle.write_block(pending[:io_block])
                del pending[:io_block]
        if pending:
            handle.write_block(pending)
        handle.flush(FlushLevel.APPLICATION_BUFFERS)
