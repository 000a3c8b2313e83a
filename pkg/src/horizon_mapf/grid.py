"""Grid maps in the MovingAI ``.map`` format and their 4-connected graph.

Cells are addressed two ways: as :class:`Vertex` ``(x, y)`` pairs at the I/O
boundary and as integer cell ids ``y * width + x`` everywhere inside the
planners. :meth:`GridMap.cell` and :meth:`GridMap.xy` convert between them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

PASSABLE_CHARS = frozenset(".G")
BLOCKED_CHARS = frozenset("@OTSW")

# up, right, down, left
DIRECTIONS = ((0, -1), (1, 0), (0, 1), (-1, 0))


class MapFormatError(ValueError):
    """Raised when map text does not follow the MovingAI format."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class Vertex(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True, eq=False)
class GridMap:
    """Immutable 4-connected grid.

    Attributes:
        width: Number of columns.
        height: Number of rows.
        passable: Boolean array of shape ``(height, width)``.
        name: Optional label, e.g. the map file stem.
    """

    width: int
    height: int
    passable: np.ndarray
    name: str = ""
    _adjacency: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    _moves: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("map dimensions must be positive")
        grid = np.asarray(self.passable, dtype=bool)
        if grid.shape != (self.height, self.width):
            raise ValueError(
                f"passable has shape {grid.shape}, expected {(self.height, self.width)}"
            )
        grid = grid.copy()
        grid.flags.writeable = False
        object.__setattr__(self, "passable", grid)

        adjacency = []
        flat = grid.ravel()
        for c in range(self.size):
            if not flat[c]:
                adjacency.append(())
                continue
            y, x = divmod(c, self.width)
            out = []
            for dx, dy in DIRECTIONS:
                nx, ny = x + dx, y + dy
                if 0 <= nx < self.width and 0 <= ny < self.height and grid[ny, nx]:
                    out.append(ny * self.width + nx)
            adjacency.append(tuple(out))
        object.__setattr__(self, "_adjacency", tuple(adjacency))

        # stay + up to four moves per cell, padded with the cell itself
        moves = np.empty((self.size, 5), dtype=np.int64)
        for c, adj in enumerate(adjacency):
            row = (c,) + adj
            moves[c] = row + (c,) * (5 - len(row))
        moves.flags.writeable = False
        object.__setattr__(self, "_moves", moves)

    @property
    def size(self) -> int:
        return self.width * self.height

    @property
    def num_passable(self) -> int:
        return int(self.passable.sum())

    def cell(self, x: int, y: int) -> int:
        return y * self.width + x

    def xy(self, cell: int) -> Vertex:
        y, x = divmod(int(cell), self.width)
        return Vertex(x, y)

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def is_passable(self, cell: int) -> bool:
        return 0 <= cell < self.size and bool(self.passable.flat[cell])

    def adjacent(self, cell: int) -> tuple[int, ...]:
        """Passable neighbours of ``cell`` in up/right/down/left order."""
        return self._adjacency[cell]

    @property
    def move_table(self) -> np.ndarray:
        """``(size, 5)`` array: column 0 is the cell itself, then its neighbours.

        Rows with fewer than four neighbours are padded with the cell id, so
        every row can be used directly as a candidate set for one timestep.
        """
        return self._moves

    def passable_cells(self) -> np.ndarray:
        return np.flatnonzero(self.passable.ravel())


def neighbors(grid: GridMap, v: int) -> list[int]:
    """Passable in-bounds neighbours of cell ``v`` in up, right, down, left order."""
    return list(grid.adjacent(v))


def parse_map(text: str, name: str = "") -> GridMap:
    """Parse MovingAI ``.map`` text.

    The header is ``type <t>``, ``height N``, ``width M``, ``map``, followed by
    ``N`` rows of ``M`` characters. ``.`` and ``G`` are passable; ``@``, ``O``,
    ``T``, ``S`` and ``W`` are blocked.

    Raises:
        MapFormatError: on a malformed header, wrong row count or length, or an
            unknown cell character. The error carries the 1-based line number.
    """
    lines = text.splitlines()

    def header(idx: int, key: str) -> str:
        if idx >= len(lines):
            raise MapFormatError(f"missing '{key}' header", idx + 1)
        parts = lines[idx].split()
        if not parts or parts[0] != key:
            raise MapFormatError(f"expected '{key}' header, got {lines[idx]!r}", idx + 1)
        return " ".join(parts[1:])

    header(0, "type")

    def dimension(idx: int, key: str) -> int:
        value = header(idx, key)
        try:
            n = int(value)
        except ValueError:
            raise MapFormatError(f"'{key}' must be an integer, got {value!r}", idx + 1) from None
        if n < 1:
            raise MapFormatError(f"'{key}' must be positive", idx + 1)
        return n

    height = dimension(1, "height")
    width = dimension(2, "width")
    if header(3, "map") != "":
        raise MapFormatError("unexpected text after 'map'", 4)

    rows = lines[4:]
    # tolerate trailing blank lines only
    while rows and not rows[-1].strip():
        rows.pop()
    if len(rows) != height:
        raise MapFormatError(f"expected {height} grid rows, found {len(rows)}", 4 + len(rows))

    grid = np.zeros((height, width), dtype=bool)
    for y, row in enumerate(rows):
        lineno = 5 + y
        row = row.rstrip("\r\n")
        if len(row) != width:
            raise MapFormatError(f"row {y} has length {len(row)}, expected {width}", lineno)
        for x, ch in enumerate(row):
            if ch in PASSABLE_CHARS:
                grid[y, x] = True
            elif ch not in BLOCKED_CHARS:
                raise MapFormatError(f"unknown cell character {ch!r} at column {x}", lineno)
    return GridMap(width, height, grid, name=name)


def format_map(grid: GridMap) -> str:
    """Serialize ``grid`` back to MovingAI text (``.`` passable, ``@`` blocked)."""
    out = ["type octile", f"height {grid.height}", f"width {grid.width}", "map"]
    for row in grid.passable:
        out.append("".join("." if p else "@" for p in row))
    return "\n".join(out) + "\n"


def load_map(path: str | Path) -> GridMap:
    path = Path(path)
    return parse_map(path.read_text(), name=path.stem)
