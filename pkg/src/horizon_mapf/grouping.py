"""Conflict- and reachability-driven grouping of active agents."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import ndimage

from .conflicts import Conflict
from .grid import GridMap

_CROSS = ndimage.generate_binary_structure(2, 1)
_CROSS_3D = np.zeros((3, 3, 3), dtype=bool)
_CROSS_3D[1] = _CROSS  # dilate within each layer, never across the stack axis


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path halving and union by size."""

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def components(self) -> list[list[int]]:
        """Members of each set, sets ordered by their smallest element."""
        buckets: dict[int, list[int]] = {}
        for a in range(len(self.parent)):
            buckets.setdefault(self.find(a), []).append(a)
        return sorted(buckets.values(), key=lambda m: m[0])


@dataclass(frozen=True, eq=False)
class Group:
    """Agents replanned jointly.

    ``footprint`` is a boolean mask over map cells: the union of the members'
    horizon-limited reachable sets.
    """

    members: tuple[int, ...]
    footprint: np.ndarray

    @property
    def cells(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.footprint).tolist())

    def __len__(self) -> int:
        return len(self.members)

    def __repr__(self) -> str:
        return f"Group(members={list(self.members)}, footprint={int(self.footprint.sum())} cells)"


def reachable_set(grid: GridMap, v: int, horizon: int) -> set[int]:
    """Passable cells within ``horizon`` moves of ``v`` on the static map."""
    depth = {v: 0}
    queue = deque([v])
    while queue:
        u = queue.popleft()
        du = depth[u]
        if du == horizon:
            continue
        for w in grid.adjacent(u):
            if w not in depth:
                depth[w] = du + 1
                queue.append(w)
    return set(depth)


def dilate(grid: GridMap, masks: np.ndarray, steps: int) -> np.ndarray:
    """Grow flat cell masks by ``steps`` BFS layers through passable cells.

    ``masks`` is ``(cells,)`` or ``(k, cells)``; the result has the same shape.
    """
    masks = np.asarray(masks, dtype=bool)
    if steps <= 0:
        return masks.copy()
    shape = (grid.height, grid.width)
    if masks.ndim == 1:
        out = ndimage.binary_dilation(
            masks.reshape(shape), _CROSS, iterations=steps, mask=grid.passable
        )
        return out.ravel()
    stack = masks.reshape((-1,) + shape)
    out = ndimage.binary_dilation(
        stack, _CROSS_3D, iterations=steps, mask=np.broadcast_to(grid.passable, stack.shape)
    )
    return out.reshape(masks.shape)


def reachable_masks(grid: GridMap, cells: Sequence[int], horizon: int) -> np.ndarray:
    """``(len(cells), grid.size)`` masks of each start's horizon-limited reachable set."""
    seeds = np.zeros((len(cells), grid.size), dtype=bool)
    if len(cells):
        seeds[np.arange(len(cells)), np.asarray(cells)] = True
    return dilate(grid, seeds, horizon)


def _overlap_unions(masks: np.ndarray, uf: UnionFind) -> None:
    """Union every pair of rows whose masks share a cell.

    Each covered cell is attributed to the first row covering it and every other
    covering row is linked to that row: one pass over the nonzero entries, the
    array analogue of a cell -> group hash map.
    """
    if masks.shape[0] < 2:
        return
    covered = masks.any(axis=0)
    first = masks.argmax(axis=0)
    rows, cols = np.nonzero(masks[:, covered])
    owners = first[covered][cols]
    links = np.unique(np.stack([rows, owners], axis=1)[rows != owners], axis=0)
    for a, b in links.tolist():
        uf.union(a, b)


def form_groups(
    active: Iterable[int],
    conflicts: Iterable[Conflict],
    positions: Mapping[int, int] | Sequence[int],
    grid: GridMap,
    horizon: int,
) -> list[Group]:
    """Close the active agents under conflicts and footprint overlap.

    Agents sharing a conflict are merged first; groups whose footprints share
    any cell are then merged until all footprints are pairwise disjoint. Since
    a group's footprint is the union of its members', this fixpoint equals the
    connected components of the agent-level overlap graph, computed in one
    union-find pass. Groups are returned ordered by smallest member id.
    """
    agents = sorted(active)
    if not agents:
        return []
    index = {a: i for i, a in enumerate(agents)}
    masks = reachable_masks(grid, [int(positions[a]) for a in agents], horizon)
    uf = UnionFind(len(agents))
    for c in conflicts:
        uf.union(index[c.agents[0]], index[c.agents[1]])
    _overlap_unions(masks, uf)
    return [
        Group(tuple(agents[i] for i in comp), masks[comp].any(axis=0))
        for comp in uf.components()
    ]


def merge_overlapping(groups: Sequence[Group]) -> tuple[list[Group], list[list[int]]]:
    """Merge groups until footprints are pairwise disjoint.

    Returns the merged groups (ordered by smallest member) and, for each, the
    indices of the input groups it absorbed.
    """
    if not groups:
        return [], []
    uf = UnionFind(len(groups))
    _overlap_unions(np.stack([g.footprint for g in groups]), uf)
    comps = sorted(uf.components(), key=lambda c: min(min(groups[i].members) for i in c))
    merged = []
    for comp in comps:
        if len(comp) == 1:
            merged.append(groups[comp[0]])
            continue
        members = tuple(sorted(m for i in comp for m in groups[i].members))
        footprint = np.logical_or.reduce([groups[i].footprint for i in comp])
        merged.append(Group(members, footprint))
    return merged, comps
