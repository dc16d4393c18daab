"""Overlapped file copy driven by a fixed ring of buffers.

A ring of ``depth`` block buffers keeps up to ``depth`` requests in flight
across the source and destination files combined.  Slot i owns the block
offsets i*B, (i+depth)*B, ... in order.  The coordinator harvests completed
reads in offset order, runs the per-buffer hook, and issues the write; each
write completion immediately issues its slot's next read.  An explicit
outstanding-request counter, not polling, decides when the copy is done,
and the final block is transferred at its exact length rather than rounded
up to the block size.
"""
from __future__ import annotations

import os
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .errors import CopyAbortedError

__all__ = [
    "DEFAULT_BLOCK",
    "DEFAULT_DEPTH",
    "SlotState",
    "RingSlot",
    "CopyReport",
    "plan_schedule",
    "process_hook",
    "copy_file",
]

DEFAULT_BLOCK = 1 << 20  # bytes per request
DEFAULT_DEPTH = 4  # simultaneous in-flight requests


class SlotState(Enum):
    IDLE = "idle"
    READING = "reading"
    READY = "ready"
    WRITING = "writing"


@dataclass
class RingSlot:
    """One buffer of the ring and what it is currently doing."""

    index: int
    buffer: bytearray
    offset: int = 0
    valid_length: int = 0
    state: SlotState = SlotState.IDLE


@dataclass(frozen=True)
class CopyReport:
    """Accounting for one copy: request counts, bytes, wall time, overlap."""

    bytes_copied: int
    read_requests: int
    write_requests: int
    wall_time: float
    peak_outstanding: int


def plan_schedule(file_size: int, block: int, depth: int) -> list[tuple[int, int, int]]:
    """Lay out the copy as (slot, offset, length) triples in offset order.

    The triples tile [0, file_size) exactly: offsets rise by ``block``,
    every length is ``block`` except a possibly shorter final one, and the
    slot for a request is (offset // block) mod depth.  A zero-size file
    yields an empty schedule.
    """
    if block < 1:
        raise ValueError(f"block must be at least 1 byte, got {block}")
    if depth < 1:
        raise ValueError(f"depth must be at least 1, got {depth}")
    if file_size < 0:
        raise ValueError(f"file size may not be negative, got {file_size}")
    schedule = []
    for index, offset in enumerate(range(0, file_size, block)):
        schedule.append((index % depth, offset, min(block, file_size - offset)))
    return schedule


def process_hook(block: memoryview) -> None:
    """Default per-buffer processing step: look at nothing, change nothing."""


def _pread_full(fd: int, view: memoryview, offset: int, length: int) -> int:
    """Read until ``length`` bytes arrive or the file ends early."""
    done = 0
    while done < length:
        got = os.preadv(fd, [view[done:length]], offset + done)
        if got == 0:
            break
        done += got
    return done


def _pwrite_full(fd: int, view: memoryview, offset: int, length: int) -> None:
    done = 0
    while done < length:
        done += os.pwritev(fd, [view[done:length]], offset + done)


def copy_file(
    src: str | os.PathLike,
    dst: str | os.PathLike,
    block: int = DEFAULT_BLOCK,
    depth: int = DEFAULT_DEPTH,
    hook: Callable[[memoryview], None] = process_hook,
) -> CopyReport:
    """Copy ``src`` to a brand new ``dst`` with overlapped transfers.

    The destination must not exist (FileExistsError if it does, and the
    existing file is left alone); a missing source raises
    FileNotFoundError.  ``hook`` sees each block read-only, between its
    read completing and its write being issued, in file order.  Any
    failure mid-copy, including a hook exception, aborts the copy, deletes
    the partial destination, and raises CopyAbortedError carrying a
    CopyReport of the progress made.
    """
    started = time.perf_counter()
    src_fd = os.open(os.fspath(src), os.O_RDONLY)
    try:
        dst_fd = os.open(os.fspath(dst), os.O_WRONLY | os.O_CREAT | os.O_EXCL, 0o666)
    except BaseException:
        os.close(src_fd)
        raise
    failed = True
    try:
        size = os.fstat(src_fd).st_size
        schedule = plan_schedule(size, block, depth)
        report = _run_ring(src_fd, dst_fd, schedule, block, depth, hook, started)
        failed = False
        return report
    finally:
        os.close(src_fd)
        os.close(dst_fd)
        if failed:
            try:
                os.unlink(dst)
            except OSError:
                pass


def _run_ring(src_fd, dst_fd, schedule, block, depth, hook, started) -> CopyReport:
    if not schedule:
        return CopyReport(0, 0, 0, time.perf_counter() - started, 0)

    queues = [deque() for _ in range(depth)]
    for slot_index, offset, length in schedule:
        queues[slot_index].append((offset, length))
    slots = [RingSlot(i, bytearray(block)) for i in range(depth)]

    lock = threading.Lock()
    read_done = [threading.Event() for _ in range(depth)]
    read_futures: list = [None] * depth
    state = {
        "busy": 0,
        "peak": 0,
        "error": None,
        "bytes_written": 0,
        "reads_harvested": 0,
        "writes_completed": 0,
        "writes_pending": 0,
        "all_writes_submitted": False,
    }
    drained = threading.Event()

    def fail(exc, *, locked: bool) -> None:
        if not locked:
            with lock:
                fail(exc, locked=True)
            return
        if state["error"] is None:
            state["error"] = exc
        for event in read_done:
            event.set()
        drained.set()

    pool = ThreadPoolExecutor(max_workers=depth)

    def read_task(slot: RingSlot) -> int:
        return _pread_full(src_fd, memoryview(slot.buffer), slot.offset, slot.valid_length)

    def write_task(slot: RingSlot) -> None:
        _pwrite_full(dst_fd, memoryview(slot.buffer), slot.offset, slot.valid_length)

    def issue_read(slot: RingSlot):
        # Lock held.  Returns the future; the caller must attach the
        # completion callback after releasing the lock, because a future
        # that is already done runs its callback inline and read_finished
        # takes the lock itself.
        offset, length = queues[slot.index].popleft()
        slot.offset, slot.valid_length, slot.state = offset, length, SlotState.READING
        return pool.submit(read_task, slot)

    def wire_read(slot: RingSlot, future) -> None:
        # Lock must NOT be held here.
        future.add_done_callback(lambda f, s=slot: read_finished(s, f))

    def read_finished(slot: RingSlot, future) -> None:
        with lock:
            read_futures[slot.index] = future
            if future.exception() is None:
                slot.state = SlotState.READY
        read_done[slot.index].set()

    def write_finished(slot: RingSlot, future) -> None:
        next_read = None
        with lock:
            exc = future.exception()
            if exc is not None:
                fail(exc, locked=True)
                return
            state["bytes_written"] += slot.valid_length
            state["writes_completed"] += 1
            state["writes_pending"] -= 1
            slot.state = SlotState.IDLE
            if queues[slot.index] and state["error"] is None:
                next_read = issue_read(slot)  # the slot stays busy, no dip
            else:
                state["busy"] -= 1
            if state["all_writes_submitted"] and state["writes_pending"] == 0:
                drained.set()
        if next_read is not None:
            wire_read(slot, next_read)

    initial_reads = []
    with lock:
        for slot in slots:
            if queues[slot.index]:
                state["busy"] += 1
                initial_reads.append((slot, issue_read(slot)))
        state["peak"] = state["busy"]
    for slot, future in initial_reads:
        wire_read(slot, future)

    completed_cleanly = True
    for slot_index, offset, length in schedule:
        slot = slots[slot_index]
        event = read_done[slot_index]
        event.wait()
        with lock:
            if state["error"] is not None:
                completed_cleanly = False
                break
            future = read_futures[slot_index]
            read_futures[slot_index] = None
            event.clear()
        exc = future.exception()
        if exc is not None:
            fail(exc, locked=False)
            completed_cleanly = False
            break
        got = future.result()
        if got != length:
            fail(
                OSError(
                    f"source shrank mid-copy: wanted {length} bytes at offset {offset}, got {got}"
                ),
                locked=False,
            )
            completed_cleanly = False
            break
        try:
            hook(memoryview(slot.buffer)[:length].toreadonly())
        except BaseException as hook_exc:
            fail(hook_exc, locked=False)
            completed_cleanly = False
            break
        with lock:
            state["reads_harvested"] += 1
            slot.state = SlotState.WRITING
            state["writes_pending"] += 1
            future = pool.submit(write_task, slot)
        future.add_done_callback(lambda f, s=slot: write_finished(s, f))

    if completed_cleanly:
        with lock:
            state["all_writes_submitted"] = True
            if state["writes_pending"] == 0:
                drained.set()
        drained.wait()
    pool.shutdown(wait=True)

    with lock:
        error = state["error"]
        report = CopyReport(
            bytes_copied=state["bytes_written"],
            read_requests=state["reads_harvested"],
            write_requests=state["writes_completed"],
            wall_time=time.perf_counter() - started,
            peak_outstanding=state["peak"],
        )
    if error is not None:
        raise CopyAbortedError(f"copy aborted: {error}", report) from error
    return report
