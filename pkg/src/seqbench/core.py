"""Shared vocabulary: byte sizes, transfer directions, open modes, seeded RNG.

Everything here is small and immutable so other modules can pass these
values around (including across threads) without ceremony.
"""
from __future__ import annotations

import enum

import numpy as np

from .errors import SizeParseError

__all__ = [
    "DEFAULT_SEED",
    "Direction",
    "OpenDisposition",
    "parse_size",
    "format_size",
    "make_rng",
    "split_rng",
]

U64_MAX = (1 << 64) - 1

# Binary multipliers.  K, M and G mean 2**10, 2**20 and 2**30 here, matching
# the power-of-two request sizes the benchmarks sweep over.
SUFFIXES = {"K": 1 << 10, "M": 1 << 20, "G": 1 << 30}

#: Seed every tool uses unless told otherwise.
DEFAULT_SEED = 137


class Direction(enum.Enum):
    """Which way bytes move relative to the file."""

    READ = "read"
    WRITE = "write"


class OpenDisposition(enum.Enum):
    """What opening a path should do about existing or missing files.

    OPEN            the file must already exist; contents are kept.
    CREATE          always start from an empty file, creating it if needed.
    CREATE_NEW      create; fail if the path already exists.
    OPEN_OR_CREATE  keep an existing file, create an empty one otherwise.
    APPEND          like OPEN_OR_CREATE but positioned at end of file.
    TRUNCATE        the file must already exist; contents are discarded.
    """

    OPEN = "open"
    CREATE = "create"
    CREATE_NEW = "create_new"
    OPEN_OR_CREATE = "open_or_create"
    APPEND = "append"
    TRUNCATE = "truncate"


def parse_size(text: str) -> int:
    """Parse a byte count like ``1048576``, ``64K``, ``100m`` or ``1G``.

    Suffixes are case-insensitive and binary (K = 1024).  Anything else,
    including signs, fractions, whitespace and values past 2**64 - 1,
    raises SizeParseError.
    """
    if not isinstance(text, str):
        raise SizeParseError(f"size must be a string, got {type(text).__name__}")
    if not text:
        raise SizeParseError("empty size string")
    body, multiplier = text, 1
    last = text[-1]
    if not last.isdigit():
        upper = last.upper()
        if upper not in SUFFIXES:
            raise SizeParseError(f"unknown size suffix {last!r} in {text!r}")
        body, multiplier = text[:-1], SUFFIXES[upper]
    if not body or not (body.isascii() and body.isdigit()):
        raise SizeParseError(f"malformed size {text!r}")
    value = int(body) * multiplier
    if value > U64_MAX:
        raise SizeParseError(f"size {text!r} does not fit in 64 bits")
    return value


def format_size(size: int) -> str:
    """Render a byte count with the largest suffix that divides it evenly.

    The output round-trips through parse_size.  Zero renders as ``0``.
    """
    if not isinstance(size, int) or isinstance(size, bool):
        raise TypeError(f"size must be an int, got {type(size).__name__}")
    if size < 0:
        raise ValueError(f"size may not be negative: {size}")
    if size > U64_MAX:
        raise ValueError(f"size {size} does not fit in 64 bits")
    if size == 0:
        return "0"
    for suffix in ("G", "M", "K"):
        multiplier = SUFFIXES[suffix]
        if size % multiplier == 0:
            return f"{size // multiplier}{suffix}"
    return str(size)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Deterministic random generator for a (seed, stream) pair.

    Built on a counter-based bit generator keyed by both numbers, so the
    same pair gives the same draws on every platform and every run, and
    distinct streams under one seed are statistically independent.  A
    stream must be owned by exactly one consumer at a time; hand each
    worker its own via split_rng rather than sharing a generator.
    """
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative")
    key = np.array([seed & U64_MAX, stream & U64_MAX], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def split_rng(seed: int, count: int, first_stream: int = 1) -> list[np.random.Generator]:
    """Fan a seed out into ``count`` independent generators."""
    if count < 0:
        raise ValueError("count must be non-negative")
    return [make_rng(seed, stream) for stream in range(first_stream, first_stream + count)]
