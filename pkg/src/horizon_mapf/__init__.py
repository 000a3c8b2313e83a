"""Receding-horizon multi-agent path finding on 4-connected grids."""

from .conflicts import (
    Conflict,
    ConflictKind,
    detect_conflicts,
    reservations_of,
    split_finalized,
)
from .distance import UNREACHABLE, DistanceCache, DistanceTable, build_distance_table, dist
from .engine import (
    EngineConfig,
    ExecutionTrace,
    Metrics,
    Mode,
    PlanningError,
    RunResult,
    Solver,
    Violation,
    compute_metrics,
    run,
    validate_trace,
)
from .grid import GridMap, MapFormatError, Vertex, format_map, load_map, neighbors, parse_map
from .grouping import Group, UnionFind, form_groups, reachable_set
from .individual import (
    NO_PATH,
    HorizonPath,
    ReservationTable,
    plan_individual,
    plan_individual_avoiding,
    plan_individual_batch,
)
from .replanner import (
    GroupFailure,
    GroupPlan,
    PriorityState,
    StepFailure,
    pibt_step,
    replan_group,
    resolve_congestion,
    update_priorities,
)
from .scenario import (
    Instance,
    InstanceError,
    ScenarioEntry,
    ScenarioFormatError,
    build_instance,
    load_scen,
    parse_scen,
)

__version__ = "0.1.0"
