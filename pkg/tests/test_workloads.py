"""Byte/line/block/record workloads, typed streams, text and sort helpers."""
import hashlib
import math
import struct
import zlib

import pytest
from hypothesis import given, settings, strategies as st

import seqbench as sb
from seqbench.workloads import TypedReader, TypedWriter

from conftest import golden_text


# -- read granularities -------------------------------------------------------

def test_byte_block_and_record_reads_agree(tmp_path):
    p = tmp_path / "data.bin"
    payload = sb.make_rng(1).bytes(200_001)
    p.write_bytes(payload)
    want = zlib.adler32(payload, 1)
    by_byte = sb.run_read(p, sb.ByteAtATime())
    by_block = sb.run_read(p, sb.BlockAtATime(64 * 1024))
    by_small_block = sb.run_read(p, sb.BlockAtATime(777))
    assert by_byte.checksum == by_block.checksum == by_small_block.checksum == want
    assert by_byte.bytes_processed == by_block.bytes_processed == 200_001
    assert by_byte.sample.request_count == 200_001
    assert by_block.sample.request_count == math.ceil(200_001 / 65536)


def test_record_read_requires_whole_records(tmp_path):
    p = tmp_path / "data.bin"
    p.write_bytes(b"r" * 300)
    result = sb.run_read(p, sb.TypedRecords())
    assert result.bytes_processed == 300
    assert result.sample.request_count == 3
    assert result.checksum == zlib.adler32(b"r" * 300, 1)


def test_line_read_counts_payload_not_terminators(tmp_path):
    p = tmp_path / "lines.txt"
    p.write_bytes(b"ab\r\ncd\n" + b"tail")
    result = sb.run_read(p, sb.LineAtATime())
    assert result.bytes_processed == 8  # "ab" + "cd" + "tail"
    assert result.checksum == zlib.adler32(b"abcdtail", 1)
    assert result.sample.request_count == 3


def test_empty_file_reads_cleanly(tmp_path):
    p = tmp_path / "empty"
    p.write_bytes(b"")
    for granularity in (sb.ByteAtATime(), sb.LineAtATime(), sb.BlockAtATime(4096)):
        result = sb.run_read(p, granularity)
        assert result.bytes_processed == 0
        assert result.sample.request_count == 0
        assert result.checksum == zlib.adler32(b"", 1)


def test_block_granularity_rejects_bad_size():
    with pytest.raises(ValueError):
        sb.BlockAtATime(0)


# -- write granularities ---------------------------------------------------------

def test_byte_write_total_and_read_back(tmp_path):
    p = tmp_path / "w.bin"
    result = sb.run_write(p, sb.ByteAtATime(), 5000, sb.make_rng(2))
    assert p.stat().st_size == 5000
    assert result.bytes_processed == 5000
    assert result.sample.request_count == 5000
    back = sb.run_read(p, sb.BlockAtATime(512))
    assert back.checksum == result.checksum


def test_block_write_total(tmp_path):
    p = tmp_path / "w.bin"
    result = sb.run_write(p, sb.BlockAtATime(4096), 10_001, sb.make_rng(3))
    assert p.stat().st_size == 10_001
    assert result.sample.request_count == 3
    assert sb.run_read(p, sb.ByteAtATime()).checksum == result.checksum


def test_line_write_exact_total_and_payload_checksum(tmp_path):
    p = tmp_path / "w.txt"
    result = sb.run_write(p, sb.LineAtATime(), 10_000, sb.make_rng(4))
    assert p.stat().st_size == 10_000
    back = sb.run_read(p, sb.LineAtATime())
    assert back.checksum == result.checksum
    text = p.read_bytes()
    body_lengths = [len(line) for line in text.split(b"\n") if line]
    assert all(length <= 78 for length in body_lengths[:-1])
    assert set(text) <= set(range(97, 123)) | {10}  # lowercase plus newline


def test_record_write_requires_multiple_of_record_size(tmp_path):
    p = tmp_path / "w.bin"
    with pytest.raises(ValueError):
        sb.run_write(p, sb.TypedRecords(), 150, sb.make_rng(0))
    result = sb.run_write(p, sb.TypedRecords(), 300, sb.make_rng(0))
    assert p.stat().st_size == 300
    assert result.sample.request_count == 3


def test_writes_are_deterministic(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    for granularity in (sb.ByteAtATime(), sb.LineAtATime(), sb.BlockAtATime(1024)):
        sb.run_write(first, granularity, 4096, sb.make_rng(9))
        sb.run_write(second, granularity, 4096, sb.make_rng(9))
        assert first.read_bytes() == second.read_bytes()


# -- typed streams -----------------------------------------------------------------

def test_typed_roundtrip_example(tmp_path):
    values = [("u32", 42), ("str", "hello")]
    assert sb.typed_roundtrip(values, tmp_path / "t.bin") == values


def test_typed_layout_is_little_endian_with_length_prefixes(tmp_path):
    p = tmp_path / "t.bin"
    sb.typed_roundtrip(
        [("u32", 42), ("str", "hello"), ("i64", -3), ("f64", 2.5)], p
    )
    raw = p.read_bytes()
    assert raw[0:4] == struct.pack("<I", 42)
    assert raw[4:8] == struct.pack("<I", 5)
    assert raw[8:13] == b"hello"
    assert raw[13:21] == struct.pack("<q", -3)
    assert raw[21:29] == struct.pack("<d", 2.5)
    assert len(raw) == 29


def test_typed_unicode_strings(tmp_path):
    values = [("str", "Ünï¢ødé"), ("str", ""), ("str", "line\nbreak")]
    assert sb.typed_roundtrip(values, tmp_path / "t.bin") == values


def test_typed_range_checks(tmp_path):
    with open(tmp_path / "t.bin", "wb") as stream:
        writer = TypedWriter(stream)
        with pytest.raises(ValueError):
            writer.write_u32(-1)
        with pytest.raises(ValueError):
            writer.write_u32(2**32)
        with pytest.raises(ValueError):
            writer.write_i64(2**63)
        with pytest.raises(ValueError):
            writer.write_i64(-(2**63) - 1)
        writer.write_i64(2**63 - 1)
        writer.write_i64(-(2**63))


def test_typed_truncation_is_detected(tmp_path):
    p = tmp_path / "t.bin"
    sb.typed_roundtrip([("u32", 7), ("str", "hello")], p)
    with open(p, "r+b") as stream:
        stream.truncate(10)  # cuts the string body short
    with open(p, "rb") as stream:
        reader = TypedReader(stream)
        assert reader.read_u32() == 7
        with pytest.raises(sb.StreamTruncatedError):
            reader.read_str()
    # callers watching for plain end-of-file see the same failure
    with open(p, "rb") as stream:
        reader = TypedReader(stream)
        reader.read_u32()
        with pytest.raises(EOFError):
            reader.read_str()


_VALUE_STRATEGY = st.one_of(
    st.tuples(st.just("u32"), st.integers(min_value=0, max_value=2**32 - 1)),
    st.tuples(st.just("i64"), st.integers(min_value=-(2**63), max_value=2**63 - 1)),
    st.tuples(
        st.just("f64"),
        st.floats(allow_nan=False, allow_infinity=True, width=64),
    ),
    st.tuples(st.just("str"), st.text(max_size=40)),
)


@given(values=st.lists(_VALUE_STRATEGY, max_size=60))
@settings(max_examples=100, deadline=None)
def test_typed_roundtrip_identity_property(tmp_path_factory, values):
    """Round trip vs. an independent struct-module rendering of the bytes."""
    path = tmp_path_factory.mktemp("typed") / "t.bin"
    got = sb.typed_roundtrip(list(values), path)
    assert got == list(values)
    expected = bytearray()
    for kind, value in values:
        if kind == "u32":
            expected += struct.pack("<I", value)
        elif kind == "i64":
            expected += struct.pack("<q", value)
        elif kind == "f64":
            expected += struct.pack("<d", value)
        else:
            data = value.encode("utf-8")
            expected += struct.pack("<I", len(data)) + data
    assert path.read_bytes() == bytes(expected)


# -- count_lines ------------------------------------------------------------------

@pytest.mark.parametrize(
    "payload, want",
    [
        (b"", 0),
        (b"\n", 1),
        (b"a", 1),
        (b"a\n", 1),
        (b"a\nb", 2),
        (b"a\r\nb\r\n", 2),
        (b"a\r", 1),
        (b"\n" * 1000, 1000),
    ],
)
def test_count_lines_cases(tmp_path, payload, want):
    p = tmp_path / "t.txt"
    p.write_bytes(payload)
    assert sb.count_lines(p) == want


def test_count_lines_with_terminator_straddling_chunks(tmp_path):
    p = tmp_path / "t.txt"
    chunk = 4096
    p.write_bytes(b"a" * (chunk - 1) + b"\r\n" + b"b")
    assert sb.count_lines(p, chunk=chunk) == 2


def test_count_lines_matches_naive_splitter_on_random_text(tmp_path):
    rng = sb.make_rng(21)
    for case in range(40):
        alphabet = b"ab\r\n"
        payload = bytes(alphabet[i] for i in rng.integers(0, 4, size=int(rng.integers(0, 400))))
        p = tmp_path / f"t{case}.txt"
        p.write_bytes(payload)
        naive = len(payload.split(b"\n")) - (1 if payload.endswith(b"\n") or not payload else 0)
        assert sb.count_lines(p, chunk=7) == naive, payload


# -- sort input file ----------------------------------------------------------------

def test_sort_file_record_layout(tmp_path):
    p = tmp_path / "sort.dat"
    sb.write_sort_file(p, 3, sb.make_rng(137))
    raw = p.read_bytes()
    assert len(raw) == 300
    for i in range(3):
        record = raw[i * 100 : (i + 1) * 100]
        assert record[10:30] == f"{i:020d}".encode("ascii")
        assert record[30:] == b" " * 70


def test_sort_file_keys_differ_across_records(tmp_path):
    p = tmp_path / "sort.dat"
    sb.write_sort_file(p, 50, sb.make_rng(137))
    raw = p.read_bytes()
    keys = {raw[i * 100 : i * 100 + 10] for i in range(50)}
    assert len(keys) > 1


def test_sort_file_deterministic_and_io_block_independent(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    sb.write_sort_file(a, 128, sb.make_rng(137))
    sb.write_sort_file(b, 128, sb.make_rng(137))
    sb.write_sort_file(c, 128, sb.make_rng(137), io_block=100)
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_sort_file_golden_digest(tmp_path):
    p = tmp_path / "sort.dat"
    sb.write_sort_file(p, 128, sb.make_rng(137))
    want = golden_text("sort_seed137_n128.sha256").strip()
    assert hashlib.sha256(p.read_bytes()).hexdigest() == want


def test_sort_file_zero_records(tmp_path):
    p = tmp_path / "sort.dat"
    sb.write_sort_file(p, 0, sb.make_rng(137))
    assert p.stat().st_size == 0


def test_sort_file_length_is_100_per_record(tmp_path):
    p = tmp_path / "sort.dat"
    for count in (1, 41, 4096, 5000):
        sb.write_sort_file(p, count, sb.make_rng(0))
        assert p.stat().st_size == 100 * count
