"""
Conflicts and independent groups
================================

Conflicting agents are collected into groups whose reachable areas within the
horizon do not overlap, so each group can be replanned on its own.
"""

# %%
import numpy as np

from horizon_mapf import HorizonPath, detect_conflicts, form_groups, split_finalized
from horizon_mapf.benchmarks import open_grid

grid = open_grid(12)
c = grid.cell

paths = [
    HorizonPath(0, (c(0, 0), c(1, 0), c(2, 0))),
    HorizonPath(1, (c(2, 0), c(1, 0), c(0, 0))),  # head-on with 0
    HorizonPath(2, (c(5, 5), c(5, 6), c(5, 7))),
    HorizonPath(3, (c(6, 6), c(5, 6), c(4, 6))),  # meets 2 at t=1
    HorizonPath(4, (c(11, 11), c(11, 10), c(11, 9))),  # alone
]

# %%
# Vertex conflicts: two agents on one cell. Edge conflicts: a swap.
for conflict in sorted(detect_conflicts(paths), key=lambda k: k.sort_key()):
    print(conflict)

# %%
conflicts = detect_conflicts(paths)
finalized, active = split_finalized(paths, conflicts)
print("finalized", sorted(finalized), "active", sorted(active))

# %%
# With a short horizon the two pairs stay apart. With a longer one their
# footprints touch and they must be planned together.
positions = np.array([p[0] for p in paths])
for H in (2, 4):
    groups = form_groups(active, conflicts, positions, grid, H)
    print(H, [g.members for g in groups], [len(g.cells) for g in groups])
