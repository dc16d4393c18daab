"""Shared fixtures: golden-file access and direct-I/O availability."""
from pathlib import Path

import pytest

import seqbench as sb

GOLDEN = Path(__file__).parent / "golden"


def golden_text(name: str) -> str:
    return (GOLDEN / name).read_text()


def golden_bytes(name: str) -> bytes:
    return (GOLDEN / name).read_bytes()


@pytest.fixture(scope="session")
def direct_ok(tmp_path_factory) -> bool:
    """Whether the pytest temp filesystem accepts cache-bypass opens."""
    probe_dir = tmp_path_factory.mktemp("direct_probe")
    return sb.supports_direct_io(probe_dir)


@pytest.fixture
def need_direct(direct_ok):
    if not direct_ok:
        pytest.skip("temp filesystem does not support direct I/O")
