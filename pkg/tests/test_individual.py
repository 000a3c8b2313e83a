import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horizon_mapf import (
    NO_PATH,
    ReservationTable,
    build_distance_table,
    plan_individual,
    plan_individual_avoiding,
    plan_individual_batch,
)
from horizon_mapf.seeding import agent_seed

from conftest import grid_from, open_grid, random_grid


def is_legal(g, cells):
    return all(b == a or b in g.adjacent(a) for a, b in zip(cells, cells[1:]))


def test_at_goal_waits(open3):
    t = build_distance_table(open3, 4)
    assert plan_individual(open3, 4, t, 5, seed=1).vertices == (4,) * 6


def test_corridor_moves_then_waits():
    g = grid_from("....")
    t = build_distance_table(g, 3)
    assert plan_individual(g, 0, t, 5, seed=9).vertices == (0, 1, 2, 3, 3, 3)


def test_open3_both_descents_reachable_and_seed_fixed(open3):
    c = open3.cell
    t = build_distance_table(open3, c(2, 2))
    # both greedy first steps are equally good
    assert t.get(c(1, 0)) == t.get(c(0, 1)) == 3
    firsts = set()
    for s in range(40):
        p = plan_individual(open3, c(0, 0), t, 2, seed=agent_seed(s, 0, 0))
        assert t.get(p[2]) == 2
        assert p == plan_individual(open3, c(0, 0), t, 2, seed=agent_seed(s, 0, 0))
        firsts.add(p[1])
    assert firsts == {c(1, 0), c(0, 1)}


def test_fixed_order_prefers_up_right_down_left(open3):
    c = open3.cell
    t = build_distance_table(open3, c(2, 2))
    assert plan_individual(open3, c(0, 0), t, 1, seed=None)[1] == c(1, 0)


def test_unreachable_start_raises():
    g = grid_from(".@.")
    t = build_distance_table(g, 2)
    with pytest.raises(ValueError):
        plan_individual(g, 0, t, 3, seed=0)


@pytest.mark.parametrize("fixed", [False, True])
def test_batch_matches_scalar(fixed):
    rng = np.random.default_rng(4)
    for _ in range(10):
        g = random_grid(rng, 12, 10, 0.25)
        cells = g.passable_cells()
        goals = rng.choice(cells, 15)
        tables = [build_distance_table(g, int(x)) for x in goals]
        starts = []
        for tb in tables:
            ok = np.flatnonzero(tb.values >= 0)
            starts.append(int(rng.choice(ok)))
        seeds = [agent_seed(7, a, 3) for a in range(15)]
        H = int(rng.integers(1, 9))
        batch = plan_individual_batch(
            g, np.array(starts), np.stack([tb.values for tb in tables]), H,
            None if fixed else np.array(seeds, dtype=np.uint64),
        )
        for a in range(15):
            scalar = plan_individual(g, starts[a], tables[a], H, None if fixed else seeds[a])
            assert tuple(batch[a].tolist()) == scalar.vertices


def test_greedy_prefix_property():
    rng = np.random.default_rng(8)
    for _ in range(30):
        g = random_grid(rng, 10, 10, 0.2)
        goal = int(rng.choice(g.passable_cells()))
        t = build_distance_table(g, goal)
        start = int(rng.choice(np.flatnonzero(t.values >= 0)))
        H = int(rng.integers(1, 12))
        p = plan_individual(g, start, t, H, seed=int(rng.integers(1 << 62)))
        d0 = t.get(start)
        assert len(p.vertices) == H + 1 and is_legal(g, p.vertices)
        moves = sum(a != b for a, b in zip(p.vertices, p.vertices[1:]))
        assert moves == min(d0, H)
        assert t.get(p[H]) == max(0, d0 - H)


def brute_force_best(g, start, table, H, res):
    """Smallest endpoint distance over every reservation-respecting H-step path."""
    best = None
    frontier = {start}
    for t in range(1, H + 1):
        nxt = set()
        for v in frontier:
            for u in (v, *g.adjacent(v)):
                if not res.move_blocked(v, u, t):
                    nxt.add(u)
        frontier = nxt
    for v in frontier:
        d = table.get(v)
        best = d if best is None else min(best, d)
    return best


def respects(path, res):
    cells = path.vertices
    for t in range(1, len(cells)):
        u, v = cells[t - 1], cells[t]
        if (v, t) in res.vertices or (v, u, t) in res.edges or (u != v and (u, v, t) in res.edges):
            return False
    return True


def test_avoiding_without_reservations_matches_greedy():
    rng = np.random.default_rng(2)
    for _ in range(20):
        g = random_grid(rng, 10, 10, 0.2)
        goal = int(rng.choice(g.passable_cells()))
        t = build_distance_table(g, goal)
        start = int(rng.choice(np.flatnonzero(t.values >= 0)))
        H = int(rng.integers(1, 10))
        greedy = plan_individual(g, start, t, H, seed=3)
        avoid = plan_individual_avoiding(g, start, t, H, ReservationTable(), seed=3)
        assert t.get(avoid[H]) == t.get(greedy[H])


def test_corridor_wait_once():
    g = grid_from("...")
    t = build_distance_table(g, 2)
    res = ReservationTable()
    res.vertices.add((1, 1))
    p = plan_individual_avoiding(g, 0, t, 3, res, seed=0)
    assert p.vertices == (0, 0, 1, 2)
    assert brute_force_best(g, 0, t, 3, res) == t.get(p[3]) == 0
    # waiting forever would leave distance 2
    assert t.get(p[3]) < t.get(0)


def test_boxed_in_is_no_path(open3):
    c = open3.cell
    t = build_distance_table(open3, c(2, 2))
    res = ReservationTable()
    for v in (c(1, 1), c(1, 0), c(2, 1), c(1, 2), c(0, 1)):
        res.vertices.add((v, 1))
    assert plan_individual_avoiding(open3, c(1, 1), t, 3, res, seed=0) is NO_PATH


def test_swap_through_finalized_is_forbidden():
    g = grid_from("...")
    t = build_distance_table(g, 2)
    res = ReservationTable()
    res.add_path([1, 0, 0])  # finalized agent moves 1 -> 0 at t=1
    p = plan_individual_avoiding(g, 0, t, 2, res, seed=0)
    assert p is NO_PATH  # can neither stay on 0 nor swap into 1


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_avoiding_is_optimal_and_respects_reservations(seed):
    rng = np.random.default_rng(seed)
    g = random_grid(rng, 6, 6, 0.2)
    free = g.passable_cells()
    if len(free) < 3:
        return
    goal = int(rng.choice(free))
    t = build_distance_table(g, goal)
    reach = np.flatnonzero(t.values >= 0)
    start = int(rng.choice(reach))
    H = int(rng.integers(1, 6))
    res = ReservationTable()
    for _ in range(int(rng.integers(0, 4))):
        walk = [int(rng.choice(free))]
        for _ in range(H):
            v = walk[-1]
            walk.append(int(rng.choice((v, *g.adjacent(v)))))
        res.add_path(walk)
    p = plan_individual_avoiding(g, start, t, H, res, seed=seed)
    best = brute_force_best(g, start, t, H, res)
    if best is None:
        assert p is NO_PATH
    else:
        assert p is not NO_PATH
        assert len(p.vertices) == H + 1 and p[0] == start and is_legal(g, p.vertices)
        assert respects(p, res)
        assert t.get(p[H]) == best
