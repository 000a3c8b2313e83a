"""Deterministic seed mixing for tie-breaking.

Every random choice in the solver is a pure function of
``(global seed, agent, timestep, candidate cell)``, so results never depend on
call order or thread scheduling. The mixer is the SplitMix64 finalizer.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# stream salts keep the per-purpose key families independent
SALT_AGENT = 0x5EED_A6E7
SALT_PRIORITY = 0x7E1E_B4EA
SALT_RUN = 0xB3AC_0001


def mix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK
    x = ((x ^ (x >> 30)) * _M1) & _MASK
    x = ((x ^ (x >> 27)) * _M2) & _MASK
    return x ^ (x >> 31)


def combine(*parts: int) -> int:
    h = 0
    for p in parts:
        h = mix64(h ^ (p & _MASK))
    return h


def agent_seed(global_seed: int, agent: int, timestep: int) -> int:
    """Per-agent, per-timestep seed."""
    return combine(SALT_AGENT, global_seed, agent, timestep)


def tie_key(seed: int, cell: int) -> int:
    """Pseudo-random 64-bit key ranking ``cell`` among equal-distance candidates."""
    return mix64(seed ^ ((cell * _GOLDEN) & _MASK))


def tie_keys(seeds: np.ndarray, cells: np.ndarray) -> np.ndarray:
    """Vectorised :func:`tie_key`; ``seeds`` broadcasts against ``cells``."""
    s = np.asarray(seeds, dtype=np.uint64)
    c = np.asarray(cells).astype(np.uint64)
    x = s ^ (c * np.uint64(_GOLDEN))
    x = x + np.uint64(_GOLDEN)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_M1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_M2)
    return x ^ (x >> np.uint64(31))


def unit_float(seed: int) -> float:
    """Map a 64-bit key to ``[0, 1)``."""
    return (seed >> 11) * (1.0 / (1 << 53))
