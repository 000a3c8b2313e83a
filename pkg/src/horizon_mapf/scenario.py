"""MovingAI ``.scen`` files and validated problem instances."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import GridMap, Vertex
from .seeding import SALT_RUN, combine


class ScenarioFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class InstanceError(ValueError):
    """An instance violates a solvability precondition.

    ``agent`` is the index of the offending agent when one can be named.
    """

    def __init__(self, message: str, agent: int | None = None) -> None:
        self.agent = agent
        super().__init__(message if agent is None else f"agent {agent}: {message}")


@dataclass(frozen=True)
class ScenarioEntry:
    bucket: int
    map_name: str
    map_width: int
    map_height: int
    start: Vertex
    goal: Vertex
    reference_length: float


@dataclass(frozen=True, eq=False)
class Instance:
    """A map plus an ordered list of ``(start, goal)`` cell ids."""

    map: GridMap
    starts: tuple[int, ...]
    goals: tuple[int, ...]

    @property
    def num_agents(self) -> int:
        return len(self.starts)

    @property
    def agents(self) -> list[tuple[Vertex, Vertex]]:
        return [(self.map.xy(s), self.map.xy(g)) for s, g in zip(self.starts, self.goals)]


def parse_scen(text: str) -> list[ScenarioEntry]:
    """Parse MovingAI scenario text into entries, preserving file order."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("version"):
        raise ScenarioFormatError("first line must start with 'version'", 1)
    entries = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        fields = raw.rstrip("\r\n").split("\t")
        if len(fields) != 9:
            raise ScenarioFormatError(f"expected 9 tab-separated fields, got {len(fields)}", lineno)
        try:
            bucket, width, height, sx, sy, gx, gy = (
                int(fields[i]) for i in (0, 2, 3, 4, 5, 6, 7)
            )
            length = float(fields[8])
        except ValueError:
            raise ScenarioFormatError(f"non-numeric field in {raw!r}", lineno) from None
        for name, x, y in (("start", sx, sy), ("goal", gx, gy)):
            if not (0 <= x < width and 0 <= y < height):
                raise ScenarioFormatError(f"{name} ({x},{y}) outside {width}x{height}", lineno)
        entries.append(
            ScenarioEntry(bucket, fields[1], width, height, Vertex(sx, sy), Vertex(gx, gy), length)
        )
    return entries


def format_scen(entries: list[ScenarioEntry]) -> str:
    out = ["version 1"]
    for e in entries:
        out.append(
            "\t".join(
                str(v)
                for v in (
                    e.bucket,
                    e.map_name,
                    e.map_width,
                    e.map_height,
                    e.start.x,
                    e.start.y,
                    e.goal.x,
                    e.goal.y,
                    repr(float(e.reference_length)),
                )
            )
        )
    return "\n".join(out) + "\n"


def load_scen(path: str | Path) -> list[ScenarioEntry]:
    return parse_scen(Path(path).read_text())


def component_labels(grid: GridMap) -> np.ndarray:
    """Connected-component label per cell (``-1`` for blocked cells)."""
    labels = np.full(grid.size, -1, dtype=np.int64)
    passable = grid.passable.ravel()
    label = 0
    for root in range(grid.size):
        if not passable[root] or labels[root] >= 0:
            continue
        labels[root] = label
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w in grid.adjacent(u):
                if labels[w] < 0:
                    labels[w] = label
                    queue.append(w)
        label += 1
    return labels


def build_instance(
    grid: GridMap,
    entries: list[ScenarioEntry],
    n: int,
    seed: int | None = None,
) -> Instance:
    """Select ``n`` agents from ``entries`` and check they form a solvable instance.

    With ``seed=None`` the first ``n`` entries are used (the usual benchmark
    protocol). With an integer seed, ``n`` entries are drawn without replacement
    and kept in file order.

    Raises:
        InstanceError: if ``n`` exceeds the entries, a start or goal is blocked
            or out of bounds, starts or goals repeat, or a goal is unreachable.
    """
    if n < 1:
        raise InstanceError(f"agent count must be positive, got {n}")
    if n > len(entries):
        raise InstanceError(f"requested {n} agents but the scenario has {len(entries)} entries")
    if seed is None:
        chosen = entries[:n]
    else:
        rng = np.random.default_rng(combine(SALT_RUN, seed))
        idx = np.sort(rng.choice(len(entries), size=n, replace=False))
        chosen = [entries[i] for i in idx]

    starts, goals = [], []
    for i, e in enumerate(chosen):
        for name, v in (("start", e.start), ("goal", e.goal)):
            if not grid.in_bounds(v.x, v.y):
                raise InstanceError(f"{name} {tuple(v)} is outside the map", i)
            if not grid.passable[v.y, v.x]:
                raise InstanceError(f"{name} {tuple(v)} is blocked", i)
        starts.append(grid.cell(*e.start))
        goals.append(grid.cell(*e.goal))

    for name, cells in (("start", starts), ("goal", goals)):
        seen: dict[int, int] = {}
        for i, c in enumerate(cells):
            if c in seen:
                raise InstanceError(
                    f"{name} {tuple(grid.xy(c))} duplicates agent {seen[c]}'s {name}", i
                )
            seen[c] = i

    labels = component_labels(grid)
    for i, (s, g) in enumerate(zip(starts, goals)):
        if labels[s] != labels[g]:
            raise InstanceError(
                f"goal {tuple(grid.xy(g))} is unreachable from start {tuple(grid.xy(s))}", i
            )
    return Instance(grid, tuple(starts), tuple(goals))
