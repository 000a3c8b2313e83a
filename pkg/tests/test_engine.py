from itertools import combinations

import numpy as np
import pytest

from horizon_mapf import (
    EngineConfig,
    ExecutionTrace,
    Instance,
    Mode,
    Solver,
    compute_metrics,
    detect_conflicts,
    plan_individual,
    run,
    validate_trace,
)
from horizon_mapf.replanner import initial_priorities

from conftest import grid_from, open_grid


def make(grid, pairs):
    c = grid.cell
    return Instance(grid, tuple(c(*s) for s, _ in pairs), tuple(c(*g) for _, g in pairs))


def step_once(instance, **cfg):
    solver = Solver(instance, EngineConfig(**cfg))
    pos = np.array(instance.starts)
    prio = initial_priorities(instance.num_agents, solver.config.global_seed)
    return solver, solver.plan_step(pos, prio, 0)


def test_single_agent_step_is_greedy():
    g = open_grid(6)
    inst = make(g, [((0, 0), (5, 3))])
    solver, step = step_once(inst, horizon=4, global_seed=2)
    greedy = plan_individual(g, inst.starts[0], solver.tables[0], 4, solver.seeds(0)[0])
    assert step.actions.tolist() == [greedy[1]]
    assert step.stats.groups == 0


def test_disjoint_corridors_all_finalized():
    g = grid_from("......", "@@@@@@", "......")
    inst = make(g, [((0, 0), (5, 0)), ((5, 2), (0, 2))])
    _, step = step_once(inst, horizon=3)
    assert step.stats.finalized_first == 2 and step.stats.groups == 0
    assert step.actions.tolist() == [g.cell(1, 0), g.cell(4, 2)]


def pairwise_ok(prev, nxt, grid):
    for i, j in combinations(range(len(prev)), 2):
        if nxt[i] == nxt[j] or (nxt[i] == prev[j] and nxt[j] == prev[i]):
            return False
    return all(b == a or b in grid.adjacent(a) for a, b in zip(prev, nxt))


def test_corridor_swap_with_pocket():
    g = grid_from(".....", "@@.@@")
    inst = make(g, [((0, 0), (4, 0)), ((4, 0), (0, 0))])
    _, step = step_once(inst, horizon=4)
    assert step.stats.groups == 1 and step.stats.largest_group == 2
    assert detect_conflicts(step.paths) == set()
    for t in range(1, 5):
        prev = [p[t - 1] for p in step.paths]
        nxt = [p[t] for p in step.paths]
        assert pairwise_ok(prev, nxt, g)
    result = run(inst, EngineConfig(horizon=4))
    assert result.metrics.solved
    assert validate_trace(result.trace, g, inst) == []


def test_single_agent_run_is_optimal():
    g = open_grid(8)
    inst = make(g, [((0, 0), (4, 3))])
    for H in (1, 3, 10):
        m = run(inst, EngineConfig(horizon=H)).metrics
        assert (m.solved, m.makespan, m.soc, m.soc_ratio) == (True, 7, 7, 1.0)


def test_crossing_pair_on_open_map():
    g = open_grid(8)
    inst = make(g, [((0, 3), (7, 3)), ((3, 0), (3, 7))])
    r = run(inst, EngineConfig(horizon=5, global_seed=4))
    assert r.metrics.solved and r.metrics.soc >= r.metrics.soc_lower_bound
    assert validate_trace(r.trace, g, inst) == []


def test_online_offline_identical_traces():
    g = open_grid(8)
    rng = np.random.default_rng(0)
    cells = rng.permutation(64)
    inst = Instance(g, tuple(cells[:12].tolist()), tuple(cells[12:24].tolist()))
    on = run(inst, EngineConfig(horizon=4, global_seed=5, mode=Mode.ONLINE))
    off = run(inst, EngineConfig(horizon=4, global_seed=5, mode="offline"))
    assert on.trace.tobytes() == off.trace.tobytes()
    assert on.metrics.tnbe == on.metrics.per_step_planning[0]
    assert off.metrics.tnbe == pytest.approx(sum(off.metrics.per_step_planning))
    assert on.metrics.tnbe <= off.metrics.tnbe


@pytest.mark.parametrize("threads", [1, 4])
def test_thread_count_does_not_change_trace(threads):
    g = open_grid(10)
    rng = np.random.default_rng(1)
    cells = rng.permutation(100)
    inst = Instance(g, tuple(cells[:25].tolist()), tuple(cells[25:50].tolist()))
    base = run(inst, EngineConfig(horizon=5, global_seed=9, thread_count=1))
    other = run(inst, EngineConfig(horizon=5, global_seed=9, thread_count=threads))
    assert base.trace.tobytes() == other.trace.tobytes()


def test_cap_reports_unsolved():
    g = grid_from("." * 12)
    inst = make(g, [((0, 0), (11, 0))])
    r = run(inst, EngineConfig(horizon=3, max_timesteps=1))
    assert not r.metrics.solved
    assert r.trace.num_timesteps == 1
    assert validate_trace(r.trace, g, inst, require_solved=False) == []
    assert validate_trace(r.trace, g, inst)[0].kind == "not-at-goal"


def test_stage2_fixpoint_still_valid():
    g = open_grid(8)
    rng = np.random.default_rng(2)
    cells = rng.permutation(64)
    inst = Instance(g, tuple(cells[:20].tolist()), tuple(cells[20:40].tolist()))
    r = run(inst, EngineConfig(horizon=4, stage2_fixpoint=True, global_seed=1))
    assert r.metrics.solved and validate_trace(r.trace, g, inst) == []


def trace_of(grid, *agents):
    cols = [[grid.cell(x, y) for x, y in a] for a in agents]
    return ExecutionTrace(np.array(cols).T, grid.width)


def test_validate_vertex_violation():
    g = open_grid(4)
    a = [(0, 0), (1, 0), (2, 0)]
    b = [(2, 1), (2, 1), (2, 0)]
    inst = Instance(g, (g.cell(0, 0), g.cell(2, 1)), (g.cell(2, 0), g.cell(2, 0) + 1))
    v = validate_trace(trace_of(g, a, b), g, inst, require_solved=False)
    assert [(x.kind, x.timestep, x.agents) for x in v] == [("vertex", 2, (0, 1))]


def test_validate_diagonal_move():
    g = open_grid(4)
    inst = Instance(g, (g.cell(0, 0),), (g.cell(1, 1),))
    v = validate_trace(trace_of(g, [(0, 0), (1, 1)]), g, inst)
    assert [(x.kind, x.timestep) for x in v] == [("illegal-move", 1)]


def test_validate_swap_and_blocked():
    g = grid_from("...", "..@")
    inst = Instance(g, (0, 1), (1, 0))
    v = validate_trace(trace_of(g, [(0, 0), (1, 0)], [(1, 0), (0, 0)]), g, inst)
    assert [(x.kind, x.timestep, x.agents) for x in v] == [("edge", 1, (0, 1))]
    bad = validate_trace(trace_of(g, [(1, 1), (2, 1)]), g, Instance(g, (4,), (5,)))
    assert "blocked-cell" in {x.kind for x in bad}


def test_travel_time_first_arrival_for_good():
    g = open_grid(8)
    reach = [(0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (5, 0), (5, 0), (5, 0)]
    m = compute_metrics(trace_of(g, reach), [g.cell(5, 0)], [5], [0.1], 0.1)
    assert (m.soc, m.makespan, m.soc_ratio) == (5, 5, 1.0)


def test_travel_time_counts_last_arrival():
    g = open_grid(8)
    leave = [(2, 0), (3, 0), (4, 0), (5, 0), (5, 1), (5, 2), (5, 0), (5, 0)]
    m = compute_metrics(trace_of(g, leave), [g.cell(5, 0)], [3], [0.1], 0.1)
    assert (m.soc, m.makespan) == (6, 6)


def test_three_independent_agents_meet_lower_bound():
    g = open_grid(8)
    inst = make(g, [((0, 0), (2, 0)), ((0, 3), (3, 3)), ((0, 6), (4, 6))])
    m = run(inst, EngineConfig(horizon=3)).metrics
    assert m.soc_lower_bound == 9 and m.soc == 9
