"""Joint horizon replanning of agent groups with windowed PIBT.

PIBT assigns one timestep at a time: agents pick their best free cell in
priority order, and an agent whose preferred cell is occupied by a
lower-priority, still-unassigned agent lends it its priority so the occupant
moves first. Here it is run for ``H`` consecutive steps, and finalized agents'
reservations act as immovable blockers. When an agent is boxed in by those
reservations the step fails and :func:`resolve_congestion` grows the group by
de-finalizing nearby agents.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .distance import DistanceTable
from .grid import GridMap
from .grouping import Group, dilate, reachable_masks
from .individual import HorizonPath, ReservationTable
from .seeding import SALT_PRIORITY, combine, tie_key, unit_float


@dataclass(frozen=True)
class PriorityState:
    """PIBT priorities: larger ``elapsed`` first, then larger ``tie_key``.

    ``elapsed[i]`` counts committed steps since agent ``i`` last stood on its
    goal; ``tie_key[i]`` in ``[0, 1)`` is re-drawn every engine step.
    """

    elapsed: np.ndarray
    tie_key: np.ndarray

    def value(self, agent: int) -> tuple[int, float]:
        return int(self.elapsed[agent]), float(self.tie_key[agent])

    def order(self, agents: Sequence[int]) -> list[int]:
        """``agents`` from highest to lowest priority."""
        return sorted(agents, key=lambda a: (-self.elapsed[a], -self.tie_key[a], a))


def _draw_tie_keys(n: int, global_seed: int, timestep: int) -> np.ndarray:
    return np.array(
        [unit_float(combine(SALT_PRIORITY, global_seed, a, timestep)) for a in range(n)]
    )


def initial_priorities(n: int, global_seed: int) -> PriorityState:
    return PriorityState(np.zeros(n, dtype=np.int64), _draw_tie_keys(n, global_seed, 0))


def update_priorities(
    priorities: PriorityState,
    positions: Sequence[int],
    goals: Sequence[int],
    global_seed: int,
    timestep: int,
) -> PriorityState:
    """Reset ``elapsed`` for agents on their goal, increment it for the rest."""
    at_goal = np.asarray(positions) == np.asarray(goals)
    elapsed = np.where(at_goal, 0, priorities.elapsed + 1)
    return PriorityState(elapsed, _draw_tie_keys(len(elapsed), global_seed, timestep))


@dataclass(frozen=True)
class StepFailure:
    agent: int


@dataclass(frozen=True)
class GroupFailure:
    timestep: int
    agent: int


@dataclass(frozen=True)
class GroupPlan:
    group: Group
    paths: dict[int, HorizonPath]


class _Stuck(Exception):
    def __init__(self, agent: int) -> None:
        self.agent = agent


def pibt_step(
    grid: GridMap,
    members: Sequence[int],
    current: Mapping[int, int],
    reservations: ReservationTable,
    t: int,
    tables: Mapping[int, DistanceTable],
    seeds: Mapping[int, int | None],
) -> dict[int, int] | StepFailure:
    """One PIBT assignment for ``members`` (highest priority first).

    ``t`` is the timestep being assigned, used to look up reservations. Each
    agent tries ``{stay} + neighbours`` by ascending goal distance, seeded
    tie-break. A candidate is skipped if a finalized agent holds it at ``t``
    or is swapping through it, if another member has already claimed it, or
    if taking it would swap with the member standing there. An unassigned
    member standing on the chosen cell inherits the priority and plans first;
    if it cannot move, the caller backtracks to its next candidate and the
    occupant stays put.

    Returns the next cell per member, or :class:`StepFailure` naming a member
    that can neither move nor stay because of reservations.
    """
    occupant = {current[a]: a for a in members}
    nxt: dict[int, int] = {}
    claimed: dict[int, int] = {}
    adjacent = grid.adjacent

    def candidates(a: int) -> list[int]:
        v = current[a]
        d = tables[a].values
        seed = seeds.get(a)
        cands = (v, *adjacent(v))
        if seed is None:
            return sorted(cands, key=lambda u: d[u])
        return sorted(cands, key=lambda u: (d[u], tie_key(seed, u)))

    def can_stay(a: int) -> bool:
        v = current[a]
        return v not in claimed and (v, t) not in reservations.vertices

    def assign(a: int, u: int) -> None:
        nxt[a] = u
        claimed[u] = a

    def plan(i: int) -> bool:
        v = current[i]
        for u in candidates(i):
            if u in claimed or reservations.move_blocked(v, u, t):
                continue
            j = occupant.get(u)
            if j is not None and j != i and nxt.get(j) == v:
                continue
            assign(i, u)
            if j is None or j == i or j in nxt:
                return True
            if plan(j):
                return True
            # j could not vacate u: it stays there and i looks elsewhere
            del nxt[i], claimed[u]
            if j not in nxt:
                if not can_stay(j):
                    raise _Stuck(j)
                assign(j, u)
        return False

    try:
        for a in members:
            if a in nxt:
                continue
            if not plan(a):
                if not can_stay(a):
                    raise _Stuck(a)
                assign(a, current[a])
    except _Stuck as stuck:
        return StepFailure(stuck.agent)
    return nxt


def replan_group(
    grid: GridMap,
    group: Group,
    positions: Mapping[int, int] | Sequence[int],
    reservations: ReservationTable,
    tables: Mapping[int, DistanceTable],
    priorities: PriorityState,
    horizon: int,
    seeds: Mapping[int, int | None],
) -> GroupPlan | GroupFailure:
    """Run :func:`pibt_step` for ``t = 1..horizon`` over the group.

    Priorities evolve inside the window the same way they do between engine
    steps (``elapsed`` resets on reaching the goal), with tie keys fixed. Each
    agent keeps one tie-break seed for the whole window, so a lone agent gets
    exactly its greedy path.
    """
    members = list(group.members)
    current = {a: int(positions[a]) for a in members}
    elapsed = {a: int(priorities.elapsed[a]) for a in members}
    ties = {a: float(priorities.tie_key[a]) for a in members}
    trails = {a: [current[a]] for a in members}
    goals = {a: tables[a].goal for a in members}
    for t in range(1, horizon + 1):
        order = sorted(members, key=lambda a: (-elapsed[a], -ties[a], a))
        result = pibt_step(grid, order, current, reservations, t, tables, seeds)
        if isinstance(result, StepFailure):
            return GroupFailure(t, result.agent)
        current = result
        for a in members:
            trails[a].append(current[a])
            elapsed[a] = 0 if current[a] == goals[a] else elapsed[a] + 1
    return GroupPlan(group, {a: HorizonPath(a, tuple(trails[a])) for a in members})


@dataclass(frozen=True)
class CongestionResolution:
    """Outcome of one :func:`resolve_congestion` call.

    ``attempt`` is the attempt number that absorbed agents; the next failure of
    this group should retry with ``attempt + 1``. ``fallback`` means every
    agent must now be planned as one group without reservations.
    """

    group: Group
    finalized: set[int]
    absorbed: tuple[int, ...]
    attempt: int
    fallback: bool = False


def resolve_congestion(
    grid: GridMap,
    failure: GroupFailure,
    group: Group,
    finalized: set[int],
    paths: Mapping[int, HorizonPath],
    positions: Mapping[int, int] | Sequence[int],
    horizon: int,
    attempt: int,
) -> CongestionResolution:
    """De-finalize agents whose reservations touch the inflated group footprint.

    Attempt ``k`` inflates the footprint by ``k - 1`` BFS steps. If no finalized
    agent's reserved cells fall inside, the radius keeps growing; once it stops
    covering new cells (or nothing is finalized) the result is the all-agent
    fallback.
    """
    if attempt < 1:
        raise ValueError("attempt must be >= 1")
    del failure  # the culprit always lies inside the footprint; kept for callers' logs
    candidates = sorted(finalized)
    if candidates:
        reserved = np.array([paths[a].vertices[1 : horizon + 1] for a in candidates])
    radius = attempt - 1
    area = dilate(grid, group.footprint, radius)
    while candidates:
        hit = area[reserved].any(axis=1)
        if hit.any():
            absorbed = tuple(a for a, h in zip(candidates, hit) if h)
            extra = reachable_masks(grid, [int(positions[a]) for a in absorbed], horizon)
            footprint = group.footprint | extra.any(axis=0)
            members = tuple(sorted(group.members + absorbed))
            return CongestionResolution(
                Group(members, footprint), finalized - set(absorbed), absorbed, radius + 1
            )
        grown = dilate(grid, area, 1)
        if np.array_equal(grown, area):
            break
        area = grown
        radius += 1
    return CongestionResolution(group, set(finalized), (), radius + 1, fallback=True)
