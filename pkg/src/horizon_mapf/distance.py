"""Exact goal-distance fields by backward breadth-first search."""

from __future__ import annotations

from collections import deque
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .grid import GridMap

UNREACHABLE = None
"""Returned by :func:`dist` for cells with no path to the goal.

``None`` refuses arithmetic, so accidentally adding to it raises instead of
producing a plausible-looking number.
"""

# internal marker inside the int32 arrays; never escapes through dist()
_NO_PATH = -1


@dataclass(frozen=True, eq=False)
class DistanceTable:
    """Shortest-path lengths (in timesteps) from every cell to ``goal``.

    ``values`` holds ``-1`` for blocked or disconnected cells; use :func:`dist`
    or :meth:`get` for sentinel-safe lookups.
    """

    goal: int
    values: np.ndarray

    def get(self, v: int) -> int | None:
        d = int(self.values[v])
        return UNREACHABLE if d == _NO_PATH else d

    def reachable(self, v: int) -> bool:
        return self.values[v] != _NO_PATH


def build_distance_table(grid: GridMap, goal: int) -> DistanceTable:
    """Backward BFS from ``goal`` over the 4-connected passable cells."""
    if not grid.is_passable(goal):
        raise ValueError(f"goal {tuple(grid.xy(goal))} is not a passable cell")
    values = np.full(grid.size, _NO_PATH, dtype=np.int32)
    values[goal] = 0
    queue = deque([goal])
    adjacent = grid.adjacent
    while queue:
        u = queue.popleft()
        du = values[u] + 1
        for w in adjacent(u):
            if values[w] == _NO_PATH:
                values[w] = du
                queue.append(w)
    values.flags.writeable = False
    return DistanceTable(goal, values)


def dist(table: DistanceTable, v: int) -> int | None:
    """Stored distance at ``v``, or :data:`UNREACHABLE`."""
    return table.get(v)


class DistanceCache:
    """One table per distinct goal, shared by every agent heading there."""

    def __init__(self, grid: GridMap) -> None:
        self.grid = grid
        self._tables: dict[int, DistanceTable] = {}

    def __getitem__(self, goal: int) -> DistanceTable:
        table = self._tables.get(goal)
        if table is None:
            table = self._tables[goal] = build_distance_table(self.grid, goal)
        return table

    def __len__(self) -> int:
        return len(self._tables)

    def prefetch(self, goals: Iterable[int], executor: Executor | None = None) -> None:
        missing = sorted(set(goals) - self._tables.keys())
        if executor is None:
            tables = [build_distance_table(self.grid, g) for g in missing]
        else:
            tables = list(executor.map(lambda g: build_distance_table(self.grid, g), missing))
        self._tables.update(zip(missing, tables))

    def tables_for(self, goals: Iterable[int]) -> list[DistanceTable]:
        return [self[g] for g in goals]
