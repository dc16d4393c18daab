"""
Opening files the six ways and moving bytes
===========================================

Every benchmark in this package goes through the same handle type, so
this walk-through starts at the bottom: create a file, write into it,
read it back, and see what the six open dispositions do to an existing
file.
"""
import tempfile
from pathlib import Path

from seqbench import Direction, FlushLevel, OpenDisposition, count_extents, open_file

root = Path(tempfile.mkdtemp(prefix="seqbench_demo_"))
path = root / "walkthrough.dat"

# CREATE truncates or creates; the handle tracks position and length.
with open_file(path, OpenDisposition.CREATE, Direction.WRITE) as handle:
    payload = b"0123456789abcdef" * 4096  # 64 KiB
    handle.write_block(payload)
    print(f"wrote {handle.position} bytes, file length {handle.length}")

    # Flushing has tiers: drain our buffer, or push the OS cache too.
    handle.flush(FlushLevel.APPLICATION_BUFFERS)
    handle.flush(FlushLevel.OPERATING_SYSTEM_CACHE)

    # Preallocation sets the length without writing a byte.  Writes into
    # the reserved region then skip the allocation work, which is the
    # whole trick behind the extension benchmark.
    handle.preallocate(1 << 20)
    print(f"preallocated to {handle.length} bytes "
          f"in {count_extents(handle)} extent(s)")

# OPEN with READ is the only combination that yields a read-only handle.
with open_file(path, OpenDisposition.OPEN, Direction.READ) as handle:
    buffer = bytearray(16)
    got = handle.read_block(buffer)
    print(f"first {got} bytes back: {bytes(buffer)!r}")

# The six dispositions against a file that already exists:
#   OPEN           opens, keeps content        (error when missing)
#   CREATE         truncates to empty          (creates when missing)
#   CREATE_NEW     refuses to touch it         (creates when missing)
#   OPEN_OR_CREATE opens, keeps content        (creates when missing)
#   APPEND         opens positioned at the end (creates when missing)
#   TRUNCATE       truncates to empty          (error when missing)
for disposition in OpenDisposition:
    try:
        with open_file(path, disposition, Direction.WRITE) as handle:
            print(f"{disposition.name:<14} -> length {handle.length}, "
                  f"position {handle.position}")
    except FileExistsError:
        print(f"{disposition.name:<14} -> refused: file already exists")
    path.write_bytes(b"three")  # restore for the next row

path.unlink()
root.rmdir()
