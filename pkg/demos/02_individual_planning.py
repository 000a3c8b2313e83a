"""
Single-agent horizon planning
=============================

The first two planning stages work per agent: a greedy descent of the distance
table, then a space-time A* that routes around reserved cells.
"""

# %%
from horizon_mapf import (
    NO_PATH,
    ReservationTable,
    build_distance_table,
    parse_map,
    plan_individual,
    plan_individual_avoiding,
)

grid = parse_map("type octile\nheight 3\nwidth 6\nmap\n......\n.@@@@.\n......\n")
start, goal = grid.cell(0, 0), grid.cell(5, 0)
table = build_distance_table(grid, goal)


def show(path):
    return " ".join(f"({x},{y})" for x, y in map(grid.xy, path.vertices))


# %%
# Greedy: always step to the neighbour closest to the goal. Equal distances
# are broken by a seeded hash, so different seeds can pick different routes.
print(show(plan_individual(grid, start, table, horizon=4, seed=1)))
corner = grid.cell(0, 2)  # both ways round the wall are 7 steps
for seed in range(4):
    print(seed, show(plan_individual(grid, corner, table, horizon=4, seed=seed)))

# %%
# Reservations are (cell, timestep) pairs and directed moves held by other
# agents. Here someone occupies (2,0) at t=2, so the planner waits once.
res = ReservationTable()
res.add_path([grid.cell(3, 0), grid.cell(2, 0), grid.cell(2, 0)])
print(show(plan_individual_avoiding(grid, start, table, 4, res, seed=1)))

# %%
# The avoiding planner minimises the distance left at the end of the window.
# With (2,0) blocked for good, waiting next to it beats a detour that would not
# get closer within four steps.
res = ReservationTable()
res.add_path([grid.cell(2, 0)] * 5)
print(show(plan_individual_avoiding(grid, start, table, 4, res, seed=1)))

# %%
# If every option is blocked at some timestep the result is ``NO_PATH``.
res = ReservationTable()
res.add_path([grid.cell(1, 0), grid.cell(0, 0)])
res.add_path([grid.cell(0, 1), grid.cell(0, 1)])
print(plan_individual_avoiding(grid, start, table, 3, res, seed=1) is NO_PATH)
