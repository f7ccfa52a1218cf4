"""Shared fixtures: canned host listings and an acceptance announcer."""

from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def safe_host_text() -> str:
    return (FIXTURES / "safe_host.txt").read_text()


@pytest.fixture(scope="session")
def sandbox_host_text() -> str:
    return (FIXTURES / "sandbox_host.txt").read_text()


@pytest.fixture
def announce(capsys):
    """Print a PASS/FAIL line that survives pytest's capture.

    Usage: announce("criterion 1", ok) returns ok so the caller can
    still assert on it.
    """
    def _announce(name: str, ok: bool) -> bool:
        with capsys.disabled():
            print(f"[{'PASS' if ok else 'FAIL'}] {name}", flush=True)
        return ok
    return _announce
