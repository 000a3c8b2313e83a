"""Seeded random benchmark maps/scenarios and the bundled data files.

The bundled ``random-64-64-10`` files were produced by
``make_random_map(64, 64, 0.10, seed=2025)`` and
``make_random_scenario(..., count=1000, seed=2025)``. They mirror the
dimensions and obstacle density of the MovingAI map of the same name, not its
exact cells.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .distance import build_distance_table
from .grid import GridMap, parse_map
from .scenario import ScenarioEntry, component_labels, parse_scen

BUNDLED = ("random-64-64-10",)


def make_random_map(
    width: int, height: int, obstacle_ratio: float, seed: int, name: str = ""
) -> GridMap:
    """Block ``round(ratio * cells)`` uniformly chosen cells."""
    rng = np.random.default_rng(seed)
    size = width * height
    blocked = rng.choice(size, size=int(round(obstacle_ratio * size)), replace=False)
    passable = np.ones(size, dtype=bool)
    passable[blocked] = False
    return GridMap(width, height, passable.reshape(height, width), name=name)


def make_random_scenario(grid: GridMap, count: int, seed: int) -> list[ScenarioEntry]:
    """``count`` start/goal pairs inside the largest connected component.

    Starts are pairwise distinct, as are goals, so any subset forms a valid
    instance. ``reference_length`` is the 4-connected shortest distance.
    """
    labels = component_labels(grid)
    counts = np.bincount(labels[labels >= 0])
    cells = np.flatnonzero(labels == counts.argmax())
    if count > len(cells):
        raise ValueError(f"only {len(cells)} cells in the largest component")
    rng = np.random.default_rng(seed)
    starts = rng.choice(cells, size=count, replace=False)
    goals = rng.choice(cells, size=count, replace=False)
    entries = []
    for s, g in zip(starts.tolist(), goals.tolist()):
        d = int(build_distance_table(grid, g).values[s])
        entries.append(
            ScenarioEntry(
                d // 4, f"{grid.name}.map", grid.width, grid.height,
                grid.xy(s), grid.xy(g), float(d),
            )
        )
    return entries


def _data_path(filename: str) -> Path:
    return Path(str(resources.files("horizon_mapf") / "data" / filename))


def bundled_map(name: str = "random-64-64-10") -> GridMap:
    return parse_map(_data_path(f"{name}.map").read_text(), name=name)


def bundled_scenario(name: str = "random-64-64-10") -> list[ScenarioEntry]:
    return parse_scen(_data_path(f"{name}-random-1.scen").read_text())


def bundled_paths(name: str = "random-64-64-10") -> tuple[Path, Path]:
    return _data_path(f"{name}.map"), _data_path(f"{name}-random-1.scen")


def open_grid(size: int) -> GridMap:
    return GridMap(size, size, np.ones((size, size), dtype=bool), name=f"empty-{size}-{size}")

