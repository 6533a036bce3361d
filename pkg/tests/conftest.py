from __future__ import annotations

import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tabembed.errors import FetchError  # noqa: E402


def load_or_skip(name: str):
    """Load a dataset from the cache (or network); skip unit tests when unavailable."""
    from tabembed.dataset import load_dataset

    try:
        return load_dataset(name)
    except FetchError as exc:
        pytest.skip(f"{name} not available: {exc}")


@pytest.fixture
def isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("TABEMBED_CACHE_DIR", str(tmp_path / "cache"))
    monkeypatch.setenv("TABEMBED_OFFLINE", "1")
    return tmp_path / "cache"


def pytest_report_header(config):
    return f"tabembed cache: {os.environ.get('TABEMBED_CACHE_DIR', '~/.cache/tabembed')}"


_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion; the lines are repeated in the terminal summary."""

    def record(name: str, passed: bool, detail: str = "") -> bool:
        line = f"{'PASS' if passed else 'FAIL'}  {name}" + (f"  [{detail}]" if detail else "")
        print(line)
        _CRITERIA.append(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
