"""Disposable loopback scratch volumes for filesystem experiments.

Fragmentation and allocation measurements contaminate whatever volume they
run on, and measurements on a shared root volume inherit all of its noise.
This module builds a throwaway ext4 filesystem in an image file (in RAM
when /dev/shm has room, so device latency drops out of the numbers),
loop-mounts it, and tears everything down afterward.

Linux-only and needs root plus mkfs.ext4; volume_support_problem reports
why the host cannot do it, so callers can skip cleanly.
"""
from __future__ import annotations

import os
import shutil
import subprocess
import tempfile
import time
from contextlib import contextmanager
from pathlib import Path

from . import _platform
from .errors import VolumeUnsupportedError

__all__ = ["volume_support_problem", "scratch_volume"]

_MKFS_DIRS = ("/sbin", "/usr/sbin", "/usr/local/sbin")


def _find_mkfs() -> str | None:
    found = shutil.which("mkfs.ext4")
    if found:
        return found
    for directory in _MKFS_DIRS:
        candidate = Path(directory) / "mkfs.ext4"
        if candidate.exists():
            return str(candidate)
    return None


def volume_support_problem() -> str | None:
    """Why scratch_volume would fail here, or None if it should work."""
    if not _platform.IS_LINUX:
        return "loopback scratch volumes need Linux"
    if os.geteuid() != 0:
        return "mounting loopback volumes needs root"
    if _find_mkfs() is None:
        return "mkfs.ext4 not found"
    if shutil.which("mount") is None or shutil.which("umount") is None:
        return "mount/umount not found"
    if not os.path.exists("/dev/loop-control"):
        return "kernel has no loop device support"
    return None


def _run(command: list[str]) -> None:
    result = subprocess.run(command, capture_output=True, text=True)
    if result.returncode != 0:
        raise VolumeUnsupportedError(
            f"{command[0]} failed ({result.returncode}): {result.stderr.strip()[:300]}"
        )


def _image_directory(size_bytes: int) -> str:
    shm = Path("/dev/shm")
    try:
        if shm.is_dir() and shutil.disk_usage(shm).free > size_bytes * 1.1:
            return str(shm)
    except OSError:
        pass
    return tempfile.gettempdir()


@contextmanager
def scratch_volume(size_bytes: int, *, eager_allocation: bool = True):
    """Yield the mount point of a fresh ext4 volume of ``size_bytes``.

    With ``eager_allocation`` the filesystem is mounted so that blocks are
    allocated when a write is issued instead of deferred to writeback.
    Deferred (delayed) allocation batches and hides exactly the per-write
    allocation work that file-extension experiments exist to measure, so
    eager is the default here.

    The backing image lives in /dev/shm when it fits, which takes device
    latency out of whatever is measured on the volume.  Everything is
    removed on exit, even on error.
    """
    if size_bytes < 16 << 20:
        raise ValueError(f"volume size must be at least 16 MiB, got {size_bytes}")
    problem = volume_support_problem()
    if problem is not None:
        raise VolumeUnsupportedError(problem)
    mkfs = _find_mkfs()
    fd, image = tempfile.mkstemp(prefix="seqbench_vol_", suffix=".img", dir=_image_directory(size_bytes))
    mount_point = None
    mounted = False
    try:
        os.ftruncate(fd, size_bytes)
        os.close(fd)
        fd = None
        _run([mkfs, "-q", "-F", image])
        mount_point = tempfile.mkdtemp(prefix="seqbench_mnt_")
        options = "loop,nodelalloc" if eager_allocation else "loop"
        _run(["mount", "-o", options, image, mount_point])
        mounted = True
        yield Path(mount_point)
    finally:
        if fd is not None:
            os.close(fd)
        if mounted:
            for attempt in ("umount", "lazy"):
                result = subprocess.run(
                    ["umount"] + (["-l"] if attempt == "lazy" else []) + [mount_point],
                    capture_output=True,
                )
                if result.returncode == 0:
                    break
                time.sleep(0.2)
        if mount_point is not None:
            try:
                os.rmdir(mount_point)
            except OSError:
                pass
        try:
            os.unlink(image)
        except OSError:
            pass
