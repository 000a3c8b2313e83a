"""
Maps, scenarios and distance tables
===================================

Load the bundled benchmark map, pick an instance from its scenario file and
look at the backward-BFS distance table that every planner uses as its
heuristic.
"""

# %%
# A map is parsed from MovingAI ``.map`` text. ``.`` is free, ``@`` and ``T``
# are blocked. Cells are addressed by integer id ``y * width + x``.
import numpy as np

from horizon_mapf import build_distance_table, build_instance, dist, parse_map
from horizon_mapf.benchmarks import bundled_map, bundled_scenario

small = parse_map("type octile\nheight 3\nwidth 5\nmap\n.....\n.@@@.\n.....\n")
print(small.width, small.height, small.num_passable)
print(small.xy(small.cell(4, 2)))

# %%
# The bundled 64x64 map with 10% obstacles, and 1000 start/goal entries.
grid = bundled_map()
entries = bundled_scenario()
print(grid.name, grid.num_passable, "passable cells,", len(entries), "entries")

# %%
# ``build_instance`` takes the first ``n`` entries, or a seeded random subset.
first = build_instance(grid, entries, 5)
drawn = build_instance(grid, entries, 5, seed=7)
print(first.agents[:2])
print(drawn.agents[:2])

# %%
# A distance table holds the shortest 4-connected distance from every cell to
# one goal. ``dist`` returns ``None`` for unreachable cells.
table = build_distance_table(small, small.cell(4, 0))
print(table.values.reshape(small.height, small.width))
print(dist(table, small.cell(0, 2)), dist(table, small.cell(1, 1)))

# %%
# Distances on the big map. The scenario's reference length is this same
# 4-connected distance.
starts, goals = first.starts, first.goals
lengths = [dist(build_distance_table(grid, g), s) for s, g in zip(starts, goals)]
print(lengths, [e.reference_length for e in entries[:5]])
print("mean over the whole scenario:", np.mean([e.reference_length for e in entries]))
