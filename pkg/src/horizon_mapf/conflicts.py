"""Space-time conflict detection by hashing and the finalized/active split."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .individual import HorizonPath, ReservationTable


class ConflictKind(enum.Enum):
    VERTEX = "vertex"
    EDGE = "edge"


@dataclass(frozen=True)
class Conflict:
    """A collision between two agents at timestep ``t``.

    ``agents`` is sorted ascending. ``location`` is ``(v,)`` for a vertex
    conflict and ``(u, v)`` with ``u < v`` for an edge (swap) conflict.
    """

    kind: ConflictKind
    agents: tuple[int, int]
    timestep: int
    location: tuple[int, ...]

    def sort_key(self) -> tuple:
        return (self.timestep, self.agents, self.kind.value, self.location)


def detect_conflicts(paths: Sequence[HorizonPath]) -> set[Conflict]:
    """All vertex and swap conflicts among ``paths`` at timesteps ``1..H``.

    Cost is linear in the number of path cells: occupants are bucketed by
    ``(cell, t)`` and moves by ``(undirected edge, t)``; only buckets holding
    more than one agent are expanded into pairs.
    """
    if not paths:
        return set()
    H = paths[0].horizon
    for p in paths:
        if p.horizon != H:
            raise ValueError(
                f"agent {p.agent} has horizon {p.horizon}, expected {H} for all paths"
            )

    at: dict[tuple[int, int], list[int]] = {}
    moves: dict[tuple[int, int, int], list[tuple[int, bool]]] = {}
    for p in paths:
        cells = p.vertices
        a = p.agent
        for t in range(1, H + 1):
            v = cells[t]
            bucket = at.get((v, t))
            if bucket is None:
                at[(v, t)] = [a]
            else:
                bucket.append(a)
            u = cells[t - 1]
            if u != v:
                lo, hi = (u, v) if u < v else (v, u)
                moves.setdefault((lo, hi, t), []).append((a, u == lo))

    found: set[Conflict] = set()
    for (v, t), agents in at.items():
        if len(agents) > 1:
            for i, j in combinations(sorted(agents), 2):
                found.add(Conflict(ConflictKind.VERTEX, (i, j), t, (v,)))
    for (lo, hi, t), travellers in moves.items():
        if len(travellers) > 1:
            for (i, fwd_i), (j, fwd_j) in combinations(travellers, 2):
                if fwd_i != fwd_j:
                    pair = (i, j) if i < j else (j, i)
                    found.add(Conflict(ConflictKind.EDGE, pair, t, (lo, hi)))
    return found


def conflicting_agents(conflicts: Iterable[Conflict]) -> set[int]:
    out: set[int] = set()
    for c in conflicts:
        out.update(c.agents)
    return out


def split_finalized(
    paths: Sequence[HorizonPath], conflicts: Iterable[Conflict]
) -> tuple[set[int], set[int]]:
    """Partition agents into ``(finalized, active)``: conflict-free vs. the rest."""
    active = conflicting_agents(conflicts)
    finalized = {p.agent for p in paths} - active
    return finalized, active


def reservations_of(
    paths: Sequence[HorizonPath] | dict[int, HorizonPath], finalized: Iterable[int]
) -> ReservationTable:
    """Reservations for every timestep ``1..H`` of each finalized agent's path."""
    by_agent = paths if isinstance(paths, dict) else {p.agent: p for p in paths}
    table = ReservationTable()
    for a in finalized:
        table.add_path(by_agent[a].vertices)
    return table
