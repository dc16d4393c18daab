"""Free-space fragmentation generator: create/delete churn over a volume.

Fresh filesystems hand out beautifully contiguous files, which makes
allocation-sensitive measurements look better than any aged machine would.
This module manufactures age: it fills a directory tree with random-size
files until the volume reaches a fill percentage, deletes a random subset
down to a keep percentage, and repeats.  The surviving files pin scattered
regions of the disk so the free space between them is shredded into small
holes.

Everything is driven by one seeded generator, so a (seed, config) pair
replays the exact same create/delete history, file for file and byte for
byte.  Event logs are therefore byte-identical across runs.

Two sizing modes:

* volume mode (default): percentages refer to the real capacity of the
  volume holding ``root``.  Occupancy is the space used when the run
  started plus the bytes this run is holding live.
* quota mode (``capacity_limit``): percentages refer to a stated byte
  budget, so the same churn can run inside a small corner of a big disk.
  Exceeding the quota behaves like a full device.
"""
from __future__ import annotations

import errno
import itertools
import math
import os
import shutil
from dataclasses import dataclass
from pathlib import Path, PurePosixPath

from .core import DEFAULT_SEED, make_rng

__all__ = [
    "FragConfig",
    "TreePlan",
    "PhaseBoundary",
    "FragReport",
    "plan_directory_tree",
    "run_cycles",
]

_WRITE_CHUNK = 1 << 20
_FILL_BYTE = 0x66


@dataclass(frozen=True)
class FragConfig:
    """Knobs for one aging run; defaults match the companion CLI tool.

    ``max_cycles`` of 0 means run until interrupted.  ``event_log`` names
    a file that receives one ``C|D <relative-path> <bytes>`` line per
    create/delete as it happens.
    """

    root: Path
    max_files: int = 100_000
    min_file: int = 1 << 20
    max_file: int = 256 << 20
    files_per_cycle: int = 1000
    max_files_per_dir: int = 100
    max_subdirs: int = 10
    max_cycles: int = 0
    keep_pct: int = 5
    fill_pct: int = 70
    seed: int = DEFAULT_SEED
    capacity_limit: int | None = None
    event_log: Path | None = None

    def __post_init__(self):
        object.__setattr__(self, "root", Path(self.root))
        if self.event_log is not None:
            object.__setattr__(self, "event_log", Path(self.event_log))
        if not 1 <= self.keep_pct < self.fill_pct <= 99:
            raise ValueError(
                "percentages must satisfy 1 <= keep < fill <= 99, "
                f"got keep={self.keep_pct} fill={self.fill_pct}"
            )
        if self.min_file < 1:
            raise ValueError(f"minimum file size must be at least 1, got {self.min_file}")
        if self.min_file > self.max_file:
            raise ValueError(
                f"minimum file size {self.min_file} exceeds maximum {self.max_file}"
            )
        for name in ("max_files", "files_per_cycle", "max_files_per_dir", "max_subdirs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.max_cycles < 0:
            raise ValueError(f"max_cycles may not be negative, got {self.max_cycles}")
        if self.seed < 0:
            raise ValueError(f"seed may not be negative, got {self.seed}")
        if self.capacity_limit is not None and self.capacity_limit < 1:
            raise ValueError(f"capacity limit must be positive, got {self.capacity_limit}")

    @classmethod
    def scaled(cls, root: Path, capacity_limit: int, **overrides) -> "FragConfig":
        """Desk-scale preset: file sizes shrunk in proportion to a quota.

        Keeps the default shape (hundreds of files of mixed sizes) inside
        ``capacity_limit`` bytes, and bounds the run at two cycles so a
        smoke run terminates on its own.
        """
        max_file = min(max(capacity_limit // 64, 64 * 1024), 256 << 20)
        min_file = max(max_file // 16, 4096)
        settings = dict(
            max_file=max_file,
            min_file=min(min_file, max_file),
            max_cycles=2,
            capacity_limit=capacity_limit,
        )
        settings.update(overrides)
        return cls(root=root, **settings)


@dataclass(frozen=True)
class TreePlan:
    """Where files will go: leaf directories sized to hold every slot.

    ``depth`` counts directory levels including the root itself, and
    ``slots`` is the number of minimum-size files a full run might need,
    so leaf_count * max_files_per_dir >= slots always holds.
    """

    leaves: tuple[PurePosixPath, ...]
    depth: int
    slots: int

    @property
    def leaf_count(self) -> int:
        return len(self.leaves)


@dataclass(frozen=True)
class PhaseBoundary:
    """Occupancy snapshot when a fill or purge phase ended."""

    cycle: int
    phase: str  # "fill" or "purge"
    occupancy: int
    target: int


@dataclass(frozen=True)
class FragReport:
    capacity: int
    base_used: int
    created_files: int
    deleted_files: int
    bytes_written: int
    bytes_deleted: int
    cycles_run: int
    boundaries: tuple[PhaseBoundary, ...]
    events: tuple[str, ...]
    survivors: tuple[tuple[str, int], ...]
    notes: tuple[str, ...] = ()

    @property
    def live_bytes(self) -> int:
        return self.bytes_written - self.bytes_deleted

    @property
    def final_fill_pct(self) -> float:
        return 100.0 * (self.base_used + self.live_bytes) / self.capacity


def plan_directory_tree(cfg: FragConfig, volume_capacity: int | None = None) -> TreePlan:
    """Lay out enough leaf directories for the worst-case file population.

    Worst case is the fill target reached entirely with minimum-size
    files.  Leaves hold at most ``max_files_per_dir`` files; interior
    levels fan out ``max_subdirs`` wide, as many levels as needed.
    """
    if volume_capacity is None:
        volume_capacity = cfg.capacity_limit or shutil.disk_usage(cfg.root).total
    slots = math.ceil(volume_capacity * cfg.fill_pct / 100 / cfg.min_file)
    slots = min(max(slots, 1), cfg.max_files)
    leaf_count = math.ceil(slots / cfg.max_files_per_dir)
    if leaf_count == 1:
        return TreePlan((PurePosixPath("."),), 1, slots)
    levels = 1
    while cfg.max_subdirs**levels < leaf_count:
        levels += 1
    width = len(str(cfg.max_subdirs - 1))
    leaves = []
    for index in range(leaf_count):
        parts = []
        remainder = index
        for _ in range(levels):
            remainder, digit = divmod(remainder, cfg.max_subdirs)
            parts.append(f"d{digit:0{width}d}")
        leaves.append(PurePosixPath(*reversed(parts)))
    return TreePlan(tuple(leaves), levels + 1, slots)


def _write_file(path: Path, size: int) -> None:
    """Write ``size`` pattern bytes; on a full disk, leave nothing behind."""
    chunk = bytes([_FILL_BYTE]) * min(_WRITE_CHUNK, max(size, 1))
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_EXCL, 0o666)
    try:
        remaining = size
        while remaining > 0:
            step = min(len(chunk), remaining)
            os.write(fd, chunk[:step] if step != len(chunk) else chunk)
            remaining -= step
    except OSError:
        os.close(fd)
        try:
            os.unlink(path)
        except OSError:
            pass
        raise
    os.close(fd)


def run_cycles(cfg: FragConfig) -> FragReport:
    """Run fill/purge cycles under ``cfg.root`` and report what happened.

    Each cycle creates files of uniform random size in [min_file,
    max_file] until the fill target, the per-cycle file budget, the total
    file cap or the directory tree binds, placing each file in the
    currently least-loaded leaf.  After a sync (files must reach the
    allocator before deletions can carve holes), a uniform random subset
    is deleted until occupancy drops to the keep target.  A full disk is
    absorbed by moving to the purge phase early; anything else (such as a
    permission error) aborts with the original exception.
    """
    root = cfg.root
    root.mkdir(parents=True, exist_ok=True)
    if cfg.capacity_limit is not None:
        capacity, base_used = cfg.capacity_limit, 0
    else:
        usage = shutil.disk_usage(root)
        capacity, base_used = usage.total, usage.used
    fill_target = capacity * cfg.fill_pct // 100
    keep_target = capacity * cfg.keep_pct // 100

    plan = plan_directory_tree(cfg, capacity)
    for leaf in plan.leaves:
        (root / leaf).mkdir(parents=True, exist_ok=True)

    rng = make_rng(cfg.seed)
    live_sizes: dict[str, int] = {}
    live_order: list[str] = []
    leaf_loads = [0] * plan.leaf_count
    leaf_of: dict[str, int] = {}

    events: list[str] = []
    notes: list[str] = []
    boundaries: list[PhaseBoundary] = []
    created = deleted = 0
    bytes_written = bytes_deleted = 0
    serial = 0
    log_stream = open(cfg.event_log, "w") if cfg.event_log is not None else None

    def occupancy() -> int:
        return base_used + bytes_written - bytes_deleted

    def record(event: str) -> None:
        events.append(event)
        if log_stream is not None:
            log_stream.write(event + "\n")

    try:
        cycles = range(1, cfg.max_cycles + 1) if cfg.max_cycles else itertools.count(1)
        cycles_run = 0
        for cycle in cycles:
            cycles_run = cycle
            created_this_cycle = 0
            while (
                occupancy() < fill_target
                and created_this_cycle < cfg.files_per_cycle
                and len(live_order) < cfg.max_files
            ):
                size = int(rng.integers(cfg.min_file, cfg.max_file, endpoint=True))
                if cfg.capacity_limit is not None and occupancy() + size > capacity:
                    notes.append(f"cycle {cycle}: quota full, purging early")
                    break
                load = min(leaf_loads)
                if load >= cfg.max_files_per_dir:
                    notes.append(f"cycle {cycle}: directory tree full, purging early")
                    break
                leaf_index = leaf_loads.index(load)
                rel = str(plan.leaves[leaf_index] / f"f{serial:08d}.dat")
                serial += 1
                try:
                    _write_file(root / rel, size)
                except OSError as exc:
                    if exc.errno == errno.ENOSPC:
                        notes.append(f"cycle {cycle}: volume full, purging early")
                        break
                    raise
                live_sizes[rel] = size
                live_order.append(rel)
                leaf_loads[leaf_index] += 1
                leaf_of[rel] = leaf_index
                created += 1
                created_this_cycle += 1
                bytes_written += size
                record(f"C {rel} {size}")
            boundaries.append(PhaseBoundary(cycle, "fill", occupancy(), fill_target))
            os.sync()
            while occupancy() > keep_target and live_order:
                pick = int(rng.integers(0, len(live_order)))
                rel = live_order[pick]
                live_order[pick] = live_order[-1]
                live_order.pop()
                size = live_sizes.pop(rel)
                os.unlink(root / rel)
                leaf_loads[leaf_of.pop(rel)] -= 1
                deleted += 1
                bytes_deleted += size
                record(f"D {rel} {size}")
            boundaries.append(PhaseBoundary(cycle, "purge", occupancy(), keep_target))
    except KeyboardInterrupt:
        # An unbounded run (max_cycles 0) ends by interrupt; report what
        # was done rather than explode.
        notes.append("interrupted, stopping after partial cycle")
    finally:
        if log_stream is not None:
            log_stream.close()

    survivors = tuple(sorted(live_sizes.items()))
    return FragReport(
        capacity=capacity,
        base_used=base_used,
        created_files=created,
        deleted_files=deleted,
        bytes_written=bytes_written,
        bytes_deleted=bytes_deleted,
        cycles_run=cycles_run,
        boundaries=tuple(boundaries),
        events=tuple(events),
        survivors=survivors,
        notes=tuple(notes),
    )
