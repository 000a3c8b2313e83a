"""Receding-horizon solver loop.

Each engine step plans ``H`` timesteps ahead for every agent and commits only
the first move:

1. greedy individual paths for all agents;
2. hash-based conflict detection; conflict-free agents are finalized and the
   rest replan around the finalized reservations;
3. agents still in conflict are grouped by conflicts and overlapping
   reachable sets;
4. each group is replanned with windowed PIBT;
5. failed groups absorb nearby finalized agents and are retried;
6. all paths are merged, checked, and their first step executed.
"""

from __future__ import annotations

import enum
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .conflicts import Conflict, detect_conflicts, reservations_of, split_finalized
from .distance import DistanceCache, DistanceTable
from .grid import GridMap
from .grouping import Group, form_groups, merge_overlapping, reachable_masks
from .individual import (
    NO_PATH,
    HorizonPath,
    plan_individual_avoiding,
    plan_individual_batch,
)
from .replanner import (
    GroupFailure,
    GroupPlan,
    PriorityState,
    initial_priorities,
    replan_group,
    resolve_congestion,
    update_priorities,
)
from .scenario import Instance
from .seeding import agent_seed

log = logging.getLogger(__name__)


class Mode(enum.Enum):
    ONLINE = "online"
    OFFLINE = "offline"


class PlanningError(RuntimeError):
    """A merged plan broke an invariant the pipeline guarantees (a solver bug)."""


@dataclass(frozen=True)
class EngineConfig:
    """Solver settings.

    Attributes:
        horizon: Planning window ``H`` in timesteps.
        global_seed: Root of every tie-breaking decision.
        max_timesteps: Cap on committed steps; ``None`` means
            ``8 * max_i dist(start_i, goal_i)``.
        mode: ``ONLINE`` releases the first action after one step of
            planning; ``OFFLINE`` only after the whole run.
        thread_count: Worker threads for the per-agent and per-group waves.
        stage2_fixpoint: Repeat the finalize/avoid-replan cycle until no agent
            changes side, instead of running it once.
        fixed_order: Break distance ties by fixed neighbour order instead of
            seeded keys (for debugging).
    """

    horizon: int = 10
    global_seed: int = 0
    max_timesteps: int | None = None
    mode: Mode = Mode.ONLINE
    thread_count: int = 1
    stage2_fixpoint: bool = False
    fixed_order: bool = False

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.max_timesteps is not None and self.max_timesteps < 1:
            raise ValueError("max_timesteps must be >= 1")
        if self.thread_count < 1:
            raise ValueError("thread_count must be >= 1")
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", Mode(self.mode.lower()))


@dataclass(frozen=True)
class StepStats:
    finalized_first: int
    finalized_second: int
    groups: int
    largest_group: int
    congestion_rounds: int
    fallback: bool


@dataclass(frozen=True)
class StepResult:
    paths: list[HorizonPath]
    actions: np.ndarray
    wall_time: float
    stats: StepStats


@dataclass(frozen=True, eq=False)
class ExecutionTrace:
    """Committed positions: ``positions[t, i]`` is agent ``i``'s cell at ``t``."""

    positions: np.ndarray
    width: int

    @property
    def num_timesteps(self) -> int:
        return self.positions.shape[0] - 1

    @property
    def num_agents(self) -> int:
        return self.positions.shape[1]

    def xy(self, t: int, agent: int) -> tuple[int, int]:
        y, x = divmod(int(self.positions[t, agent]), self.width)
        return x, y

    def tobytes(self) -> bytes:
        return np.ascontiguousarray(self.positions, dtype=np.int64).tobytes()


@dataclass
class Metrics:
    soc: int
    soc_lower_bound: int
    soc_ratio: float
    makespan: int
    tnbe: float
    per_step_planning: list[float] = field(default_factory=list)
    solved: bool = False


@dataclass(frozen=True)
class RunResult:
    trace: ExecutionTrace
    metrics: Metrics
    step_stats: list[StepStats]


class _Pool:
    """Ordered map over a thread pool, or inline when single-threaded."""

    def __init__(self, threads: int) -> None:
        self.executor = ThreadPoolExecutor(threads) if threads > 1 else None

    def map(self, fn, items):
        if self.executor is None:
            return [fn(x) for x in items]
        return list(self.executor.map(fn, items))

    def close(self) -> None:
        if self.executor is not None:
            self.executor.shutdown()


class Solver:
    """Holds per-instance state (distance tables, pool) across engine steps."""

    def __init__(self, instance: Instance, config: EngineConfig) -> None:
        self.instance = instance
        self.config = config
        self.grid: GridMap = instance.map
        self.goals = np.asarray(instance.goals, dtype=np.int64)
        self.cache = DistanceCache(self.grid)
        self.pool = _Pool(config.thread_count)
        self.cache.prefetch(instance.goals, self.pool.executor)
        self.tables: list[DistanceTable] = self.cache.tables_for(instance.goals)
        self.dist_rows = np.stack([t.values for t in self.tables]).astype(np.int64)

    def close(self) -> None:
        self.pool.close()

    def seeds(self, timestep: int) -> list[int | None]:
        if self.config.fixed_order:
            return [None] * len(self.goals)
        return [agent_seed(self.config.global_seed, a, timestep) for a in range(len(self.goals))]

    def plan_step(
        self, positions: np.ndarray, priorities: PriorityState, timestep: int
    ) -> StepResult:
        """Plan ``H`` steps for everyone and return the merged, conflict-free paths."""
        began = time.perf_counter()
        grid, H = self.grid, self.config.horizon
        n = len(positions)
        seeds = self.seeds(timestep)

        # stage 1: greedy individual paths
        batch_seeds = None if self.config.fixed_order else np.array(seeds, dtype=np.uint64)
        cells = plan_individual_batch(grid, positions, self.dist_rows, H, batch_seeds)
        paths = {a: HorizonPath(a, tuple(row)) for a, row in enumerate(cells.tolist())}

        # stage 2: finalize conflict-free agents, replan the rest around them
        conflicts = detect_conflicts(list(paths.values()))
        finalized, active = split_finalized(list(paths.values()), conflicts)
        finalized_first = len(finalized)
        while active:
            reservations = reservations_of(paths, finalized)
            order = sorted(active)
            replans = self.pool.map(
                lambda a: plan_individual_avoiding(
                    grid, int(positions[a]), self.tables[a], H, reservations, seeds[a], a
                ),
                order,
            )
            stuck = set()
            for a, p in zip(order, replans):
                if p is NO_PATH:
                    stuck.add(a)
                else:
                    paths[a] = p
            conflicts = detect_conflicts([paths[a] for a in order])
            _, still = split_finalized([paths[a] for a in order], conflicts)
            still |= stuck
            newly = active - still
            finalized |= newly
            active = still
            if not (self.config.stage2_fixpoint and newly):
                break
        finalized_second = len(finalized) - finalized_first

        # stage 3-5: group, replan, resolve congestion
        groups: list[Group] = []
        rounds = 0
        fallback = False
        if active:
            conflicts = {c for c in conflicts if set(c.agents) <= active}
            groups = form_groups(active, conflicts, positions, grid, H)
            plans, finalized, rounds, fallback, groups = self._replan_groups(
                groups, finalized, paths, positions, priorities, seeds
            )
            for plan in plans:
                paths.update(plan.paths)

        # stage 6: merge and check
        merged = [paths[a] for a in range(n)]
        leftover = detect_conflicts(merged)
        if leftover:
            sample = sorted(leftover, key=Conflict.sort_key)[:5]
            raise PlanningError(f"merged plan at timestep {timestep} has conflicts: {sample}")
        actions = np.array([p.vertices[1] for p in merged], dtype=np.int64)
        stats = StepStats(
            finalized_first,
            finalized_second,
            len(groups),
            max((len(g) for g in groups), default=0),
            rounds,
            fallback,
        )
        return StepResult(merged, actions, time.perf_counter() - began, stats)

    def _replan_groups(self, groups, finalized, paths, positions, priorities, seeds):
        grid, H = self.grid, self.config.horizon
        seed_of = dict(enumerate(seeds))
        tables = dict(enumerate(self.tables))
        attempts = [1] * len(groups)
        plans: list[GroupPlan | None] = [None] * len(groups)
        pending = list(range(len(groups)))
        rounds = 0
        fallback = False
        n = len(positions)
        while True:
            reservations = reservations_of(paths, finalized)
            results = self.pool.map(
                lambda gi: replan_group(
                    grid,
                    groups[gi],
                    positions,
                    reservations,
                    tables,
                    priorities,
                    H,
                    {a: seed_of[a] for a in groups[gi].members},
                ),
                pending,
            )
            failed = []
            for gi, res in zip(pending, results):
                if isinstance(res, GroupFailure):
                    failed.append((gi, res))
                else:
                    plans[gi] = res
            if not failed:
                break
            rounds += 1

            # single coordinator: absorb finalized agents, then re-merge
            dirty = set()
            for gi, failure in failed:
                out = resolve_congestion(
                    grid, failure, groups[gi], finalized, paths, positions, H, attempts[gi]
                )
                if out.fallback:
                    fallback = True
                    break
                log.debug(
                    "group %s failed at t=%d (agent %d); absorbed %s",
                    groups[gi].members, failure.timestep, failure.agent, out.absorbed,
                )
                groups[gi] = out.group
                finalized = out.finalized
                attempts[gi] = out.attempt + 1
                plans[gi] = None
                dirty.add(gi)
            if fallback:
                everyone = tuple(range(n))
                footprint = reachable_masks(grid, [int(p) for p in positions], H).any(axis=0)
                groups = [Group(everyone, footprint)]
                finalized = set()
                attempts, plans, pending = [1], [None], [0]
                continue

            merged, comps = merge_overlapping(groups)
            new_attempts, new_plans, pending = [], [], []
            for k, comp in enumerate(comps):
                keep = len(comp) == 1 and comp[0] not in dirty
                new_attempts.append(max(attempts[i] for i in comp))
                new_plans.append(plans[comp[0]] if keep else None)
                if not keep:
                    pending.append(k)
            groups, attempts, plans = merged, new_attempts, new_plans
        return [p for p in plans if p is not None], finalized, rounds, fallback, groups

    def run(self) -> RunResult:
        inst, cfg = self.instance, self.config
        n = inst.num_agents
        starts = np.asarray(inst.starts, dtype=np.int64)
        lower = [int(self.dist_rows[a, s]) for a, s in enumerate(starts)]
        cap = cfg.max_timesteps or max(1, 8 * max(lower))
        positions = starts.copy()
        priorities = update_priorities(
            initial_priorities(n, cfg.global_seed), positions, self.goals, cfg.global_seed, 0
        )
        history = [positions]
        step_times: list[float] = []
        stats: list[StepStats] = []
        t = 0
        while t < cap and not np.array_equal(positions, self.goals):
            step = self.plan_step(positions, priorities, t)
            step_times.append(step.wall_time)
            stats.append(step.stats)
            positions = step.actions
            t += 1
            history.append(positions)
            priorities = update_priorities(
                priorities, positions, self.goals, cfg.global_seed, t
            )
        trace = ExecutionTrace(np.stack(history), self.grid.width)
        solved = bool(np.array_equal(positions, self.goals))
        if cfg.mode is Mode.ONLINE:
            tnbe = step_times[0] if step_times else 0.0
        else:
            tnbe = float(sum(step_times))
        metrics = compute_metrics(trace, inst.goals, lower, step_times, tnbe)
        if metrics.solved != solved:
            raise PlanningError("goal check disagrees with metrics")
        return RunResult(trace, metrics, stats)


def run(instance: Instance, config: EngineConfig | None = None) -> RunResult:
    """Solve ``instance`` step by step until every agent is home or the cap hits."""
    solver = Solver(instance, config or EngineConfig())
    try:
        return solver.run()
    finally:
        solver.close()


def default_thread_count() -> int:
    return os.cpu_count() or 1


def compute_metrics(
    trace: ExecutionTrace,
    goals: Sequence[int],
    lower_bounds: Sequence[int],
    step_times: Sequence[float],
    tnbe: float,
) -> Metrics:
    """SOC, makespan and timing summary of a committed trace.

    An agent's travel time is the first timestep after which it never leaves
    its goal again; an agent not on its goal at the end is charged the full
    trace length.
    """
    pos = trace.positions
    T = trace.num_timesteps
    at_goal = pos == np.asarray(goals)[None, :]
    travel = []
    for a in range(pos.shape[1]):
        away = np.flatnonzero(~at_goal[:, a])
        travel.append(0 if away.size == 0 else int(away[-1]) + 1)
    travel = [min(x, T) for x in travel]
    soc = int(sum(travel))
    lb = int(sum(lower_bounds))
    return Metrics(
        soc=soc,
        soc_lower_bound=lb,
        soc_ratio=soc / lb if lb > 0 else 1.0,
        makespan=max(travel, default=0),
        tnbe=float(tnbe),
        per_step_planning=list(step_times),
        solved=bool(at_goal[-1].all()),
    )


@dataclass(frozen=True)
class Violation:
    kind: str
    timestep: int
    agents: tuple[int, ...]
    detail: str = ""


def validate_trace(
    trace: ExecutionTrace, grid: GridMap, instance: Instance, require_solved: bool = True
) -> list[Violation]:
    """Check a trace from scratch; an empty list means it is valid.

    Works on ``(x, y)`` coordinates with array comparisons so it shares nothing
    with the planner's hash-based detector.
    """
    out: list[Violation] = []
    pos = np.asarray(trace.positions, dtype=np.int64)
    n = instance.num_agents
    if pos.ndim != 2 or pos.shape[1] != n or pos.shape[0] < 1:
        return [Violation("shape", 0, (), f"positions shape {pos.shape} for {n} agents")]
    ys, xs = np.divmod(pos, grid.width)

    inside = (pos >= 0) & (pos < grid.size)
    for t, a in zip(*np.nonzero(~inside)):
        out.append(Violation("out-of-bounds", int(t), (int(a),)))
    safe = np.where(inside, pos, 0)
    blocked = inside & ~grid.passable.ravel()[safe]
    for t, a in zip(*np.nonzero(blocked)):
        out.append(Violation("blocked-cell", int(t), (int(a),), f"at {int(xs[t, a]), int(ys[t, a])}"))

    for a in np.flatnonzero(pos[0] != np.asarray(instance.starts)):
        out.append(Violation("wrong-start", 0, (int(a),)))
    if require_solved:
        for a in np.flatnonzero(pos[-1] != np.asarray(instance.goals)):
            out.append(Violation("not-at-goal", trace.num_timesteps, (int(a),)))

    step = np.abs(np.diff(xs, axis=0)) + np.abs(np.diff(ys, axis=0))
    for t, a in zip(*np.nonzero(step > 1)):
        out.append(Violation("illegal-move", int(t) + 1, (int(a),)))

    for t in range(pos.shape[0]):
        row = pos[t]
        order = np.argsort(row, kind="stable")
        s = row[order]
        dup = np.flatnonzero(s[1:] == s[:-1])
        for k in dup:
            out.append(
                Violation("vertex", t, tuple(sorted((int(order[k]), int(order[k + 1])))))
            )
    for t in range(1, pos.shape[0]):
        prev, cur = pos[t - 1], pos[t]
        moved = np.flatnonzero(prev != cur)
        if moved.size < 2:
            continue
        # i swaps with j iff prev[i] == cur[j] and cur[i] == prev[j]
        p, c = prev[moved][:, None], cur[moved][:, None]
        swap = (p == cur[moved][None, :]) & (c == prev[moved][None, :])
        ii, jj = np.nonzero(np.triu(swap, k=1))
        for i, j in zip(ii, jj):
            out.append(Violation("edge", t, (int(moved[i]), int(moved[j]))))
    return out
