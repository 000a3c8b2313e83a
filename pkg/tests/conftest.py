from __future__ import annotations

import numpy as np
import pytest

from horizon_mapf import GridMap, parse_map


def grid_from(*rows: str) -> GridMap:
    """Build a map from rows of ``.`` (free) and ``@`` (blocked)."""
    text = f"type octile\nheight {len(rows)}\nwidth {len(rows[0])}\nmap\n" + "\n".join(rows)
    return parse_map(text)


def open_grid(width: int, height: int | None = None) -> GridMap:
    height = width if height is None else height
    return GridMap(width, height, np.ones((height, width), dtype=bool))


def random_grid(rng: np.random.Generator, width: int, height: int, ratio: float) -> GridMap:
    return GridMap(width, height, rng.random((height, width)) >= ratio)


@pytest.fixture
def open3() -> GridMap:
    return open_grid(3)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Collect one status line per acceptance criterion for the run summary."""

    def report(line: str) -> None:
        print(line)
        _ACCEPTANCE_LINES.append(line)

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
