"""
Aging a filesystem and timing file extension on it
==================================================

Fresh filesystems lay files out contiguously, so extension looks cheap.
The aging tool manufactures a lived-in state: cycles of creating random
sized files to a fill target and deleting down to a keep target leave
free space scattered.  On a volume aged that way, growing a file block
by block pays for allocation on every write, and preallocating the
final size first visibly wins.

The aging pass below runs inside a quota in a temp directory, which is
enough to show the mechanics.  The timing comparison needs a real
scratch filesystem so allocation cost is not hidden by the host volume;
scratch_volume provides one when the environment allows loop mounts.
"""
import statistics
import tempfile
from pathlib import Path

from seqbench import (
    ExtensionMode,
    FragConfig,
    measure_extension,
    run_cycles,
    scratch_volume,
    volume_support_problem,
)

root = Path(tempfile.mkdtemp(prefix="seqbench_demo_"))

# Scaled mode shrinks the default shape (hundreds of mixed-size files)
# into a 64 MiB quota and bounds the run at two fill/purge cycles.
report = run_cycles(FragConfig.scaled(root / "aged", capacity_limit=64 << 20, seed=137))
print(f"{report.created_files} files created, {report.deleted_files} deleted, "
      f"{report.cycles_run} cycles")
print(f"{report.live_bytes:,} bytes survive ({report.final_fill_pct:.1f}% of quota)")
for boundary in report.boundaries:
    print(f"  cycle {boundary.cycle} {boundary.phase:>5}: "
          f"{boundary.occupancy:,} of {boundary.target:,} target bytes")

problem = volume_support_problem()
if problem:
    print(f"\nskipping the timing comparison: {problem}")
else:
    # Age a dedicated 1 GiB volume hard (fill 90%, keep 50%, small files),
    # then time extending a 128 MiB file on it, both ways, five times each.
    print("\naging a scratch volume, then timing extension both ways ...")
    with scratch_volume(1 << 30) as mount:
        run_cycles(FragConfig(root=mount / "age", min_file=64 << 10,
                              max_file=256 << 10, files_per_cycle=10_000,
                              max_cycles=2, fill_pct=90, keep_pct=50))
        target = mount / "extend.dat"
        rates = {mode: [] for mode in ExtensionMode}
        for _ in range(5):
            for mode in rates:
                result = measure_extension(target, 128 << 20, 256 << 10, mode, trials=1)
                rates[mode].append(result.mb_per_sec)
                target.unlink()
        for mode, samples in rates.items():
            print(f"  {mode.name.lower():>12}: median "
                  f"{statistics.median(samples):.0f} MB/s")
