"""Single-agent horizon planning.

Two planners live here. :func:`plan_individual` descends the goal-distance
field greedily with seeded tie-breaking among equally good successors.
:func:`plan_individual_avoiding` runs a bounded space-time A* that respects the
reservations left by already finalized agents.

Timestep conventions: a path has ``H + 1`` cells, index 0 being the current
position. A move ``u -> v`` that ends at index ``t`` is said to happen *at*
timestep ``t``; vertex and edge reservations both use that arrival index.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .distance import DistanceTable
from .grid import GridMap
from .seeding import tie_key, tie_keys


@dataclass(frozen=True)
class HorizonPath:
    agent: int
    vertices: tuple[int, ...]

    @property
    def horizon(self) -> int:
        return len(self.vertices) - 1

    def __getitem__(self, t: int) -> int:
        return self.vertices[t]


class _NoPath:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NO_PATH"

    def __bool__(self) -> bool:
        return False


NO_PATH = _NoPath()
"""Returned by :func:`plan_individual_avoiding` when every H-step path is blocked."""


@dataclass
class ReservationTable:
    """Space-time cells and directed moves claimed by finalized agents.

    ``vertices`` holds ``(cell, t)``; ``edges`` holds ``(u, v, t)`` for a move
    from ``u`` arriving at ``v`` at timestep ``t``. Only ``1 <= t <= H`` is
    stored; beyond the horizon finalized agents are treated as absent.
    """

    vertices: set[tuple[int, int]] = field(default_factory=set)
    edges: set[tuple[int, int, int]] = field(default_factory=set)

    def add_path(self, cells: tuple[int, ...] | list[int]) -> None:
        for t in range(1, len(cells)):
            u, v = cells[t - 1], cells[t]
            self.vertices.add((v, t))
            if u != v:
                self.edges.add((u, v, t))

    def vertex_reserved(self, v: int, t: int) -> bool:
        return (v, t) in self.vertices

    def move_blocked(self, u: int, v: int, t: int) -> bool:
        """True if moving ``u -> v`` at ``t`` lands on or swaps with a reservation."""
        if (v, t) in self.vertices:
            return True
        return u != v and ((v, u, t) in self.edges or (u, v, t) in self.edges)

    def __len__(self) -> int:
        return len(self.vertices)


def _check_start(table: DistanceTable, current: int, horizon: int) -> None:
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if not table.reachable(current):
        raise ValueError(f"cell {current} cannot reach goal {table.goal}")


def plan_individual(
    grid: GridMap,
    current: int,
    table: DistanceTable,
    horizon: int,
    seed: int | None,
    agent: int = 0,
) -> HorizonPath:
    """Greedy ``horizon``-step descent of ``table`` from ``current``.

    Each step moves to the candidate in ``{stay} + neighbours`` with the
    smallest distance. Ties are ranked by :func:`tie_key` under ``seed``; with
    ``seed=None`` the first candidate in stay/up/right/down/left order wins.
    """
    _check_start(table, current, horizon)
    d = table.values
    path = [current]
    v = current
    for _ in range(horizon):
        if d[v] == 0:
            path.append(v)
            continue
        best = v
        best_key = (int(d[v]), 0 if seed is None else tie_key(seed, v))
        for u in grid.adjacent(v):
            key = (int(d[u]), 0 if seed is None else tie_key(seed, u))
            if key < best_key:
                best, best_key = u, key
        v = best
        path.append(v)
    return HorizonPath(agent, tuple(path))


def plan_individual_batch(
    grid: GridMap,
    currents: np.ndarray,
    dist_rows: np.ndarray,
    horizon: int,
    seeds: np.ndarray | None,
) -> np.ndarray:
    """Vectorised :func:`plan_individual` for many agents at once.

    Args:
        currents: ``(n,)`` current cells.
        dist_rows: ``(n, cells)`` distance values, one row per agent's goal.
        seeds: ``(n,)`` uint64 seeds, or ``None`` for fixed-order tie-breaking.

    Returns:
        ``(n, horizon + 1)`` int array of cells.
    """
    n = len(currents)
    moves = grid.move_table
    out = np.empty((n, horizon + 1), dtype=np.int64)
    pos = np.asarray(currents, dtype=np.int64)
    out[:, 0] = pos
    rows = np.arange(n)[:, None]
    seeds_col = None if seeds is None else np.asarray(seeds, dtype=np.uint64)[:, None]
    # candidate position as a final tie-break reproduces the scalar loop's
    # first-wins rule (stay first, then up/right/down/left)
    order = np.arange(5, dtype=np.uint64)
    never = np.uint64(np.iinfo(np.uint64).max)
    for t in range(1, horizon + 1):
        cand = moves[pos]
        d = dist_rows[rows, cand]
        keys = order[None, :] if seeds_col is None else tie_keys(seeds_col, cand)
        # padding repeats the stay cell, so it can never beat a real neighbour
        masked = np.where(d == d.min(axis=1, keepdims=True), keys, never)
        best = cand[np.arange(n), masked.argmin(axis=1)]
        pos = np.where(d[:, 0] == 0, pos, best)
        out[:, t] = pos
    return out


def plan_individual_avoiding(
    grid: GridMap,
    current: int,
    table: DistanceTable,
    horizon: int,
    reservations: ReservationTable,
    seed: int | None,
    agent: int = 0,
) -> HorizonPath | _NoPath:
    """Best reservation-respecting ``horizon``-step path, or :data:`NO_PATH`.

    The search runs over ``(cell, t)`` states. A step ``v -> u`` costs
    ``1 + dist(u) - dist(v)`` (0 for progress, 1 for a wait, 2 for a step
    back), so an H-step path costs ``H + dist(end) - dist(start)``: minimising
    cost minimises the distance left at the horizon end. Ties go to deeper
    states first, then to the seeded key.
    """
    _check_start(table, current, horizon)
    d = table.values
    H = horizon

    def h(v: int, t: int) -> int:
        rest = H - t - int(d[v])
        return rest if rest > 0 else 0

    def key(v: int) -> int:
        return 0 if seed is None else tie_key(seed, v)

    start = (current, 0)
    g_best = {start: 0}
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    heap = [(h(current, 0), 0, key(current), current, 0)]
    closed: set[tuple[int, int]] = set()
    while heap:
        f, neg_t, _, v, t = heapq.heappop(heap)
        state = (v, t)
        if state in closed:
            continue
        closed.add(state)
        if t == H:
            cells = [v]
            while state != start:
                state = parent[state]
                cells.append(state[0])
            return HorizonPath(agent, tuple(reversed(cells)))
        g = g_best[state]
        dv = int(d[v])
        nt = t + 1
        for u in (v, *grid.adjacent(v)):
            if reservations.move_blocked(v, u, nt):
                continue
            nxt = (u, nt)
            if nxt in closed:
                continue
            ng = g + 1 + int(d[u]) - dv
            if ng < g_best.get(nxt, ng + 1):
                g_best[nxt] = ng
                parent[nxt] = state
                heapq.heappush(heap, (ng + h(u, nt), -nt, key(u), u, nt))
    return NO_PATH
