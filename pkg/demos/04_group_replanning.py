"""
Windowed PIBT and congestion resolution
=======================================

A group is replanned one timestep at a time with priority inheritance. If a
member is boxed in by finalized agents, nearby finalized agents are pulled
into the group.
"""

# %%
import numpy as np

from horizon_mapf import (
    EngineConfig,
    HorizonPath,
    Instance,
    ReservationTable,
    build_distance_table,
    parse_map,
    replan_group,
    resolve_congestion,
    run,
)
from horizon_mapf.grouping import Group, reachable_masks
from horizon_mapf.replanner import GroupFailure, PriorityState

# %%
# Two agents meet head-on in a corridor with one side pocket. Inside one
# window the higher-priority agent pushes the other back towards its dead
# end; across steps the priorities shift and one of them ducks into the
# pocket. How long that takes depends on the seeded tie-breaks.
grid = parse_map("type octile\nheight 2\nwidth 5\nmap\n.....\n@@.@@\n")
swap = Instance(grid, (grid.cell(0, 0), grid.cell(4, 0)), (grid.cell(4, 0), grid.cell(0, 0)))
for seed in range(3):
    result = run(swap, EngineConfig(horizon=3, global_seed=seed))
    pocket = [a for a in range(2) if grid.cell(2, 1) in result.trace.positions[:, a]]
    print(seed, result.metrics.soc, "pocket used by agent", pocket)

# %%
# One window of PIBT for the same pair: agent 0 has the higher priority and
# walks straight on while agent 1 is pushed back.
starts = list(swap.starts)
tables = {a: build_distance_table(grid, g) for a, g in enumerate(swap.goals)}
priorities = PriorityState(np.array([3, 0]), np.array([0.5, 0.5]))
footprint = reachable_masks(grid, starts, 3).any(axis=0)
plan = replan_group(
    grid, Group((0, 1), footprint), starts, ReservationTable(), tables, priorities, 3, {0: 1, 1: 2}
)
for a, path in plan.paths.items():
    print(a, [tuple(grid.xy(v)) for v in path.vertices])

# %%
# A finalized agent's reserved path runs into agent 0's cell, so agent 0 can
# neither stay nor pass it. Replanning fails and congestion resolution
# absorbs the blocker into the group.
grid = parse_map("type octile\nheight 1\nwidth 4\nmap\n....\n")
tables = {0: build_distance_table(grid, 3), 1: build_distance_table(grid, 1)}
parked = HorizonPath(1, (1, 0, 0))
res = ReservationTable()
res.add_path(parked.vertices)
group = Group((0,), reachable_masks(grid, [0], 2).any(axis=0))
prio = PriorityState(np.zeros(2, dtype=int), np.array([0.9, 0.1]))
failure = replan_group(grid, group, [0, 1], res, tables, prio, 2, {0: 1, 1: 2})
print(failure)
assert isinstance(failure, GroupFailure)
fix = resolve_congestion(grid, failure, group, {1}, {1: parked}, [0, 1], 2, attempt=1)
print(fix.group.members, fix.absorbed, fix.finalized)
