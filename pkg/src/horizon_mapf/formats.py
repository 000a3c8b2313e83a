"""Text formats for single-run results: paths files and metrics files."""

from __future__ import annotations

import re
import time
from pathlib import Path

import numpy as np

from .engine import ExecutionTrace, Metrics

_PATH_LINE = re.compile(r"^agent (\d+):((?: \(-?\d+,-?\d+\))*)\s*$")
_COORD = re.compile(r"\((-?\d+),(-?\d+)\)")


def format_paths(trace: ExecutionTrace) -> str:
    """``agent <id>: (x0,y0) (x1,y1) ... (xT,yT)``, one line per agent."""
    ys, xs = np.divmod(trace.positions, trace.width)
    lines = []
    for a in range(trace.num_agents):
        cells = " ".join(f"({x},{y})" for x, y in zip(xs[:, a].tolist(), ys[:, a].tolist()))
        lines.append(f"agent {a}: {cells}")
    return "\n".join(lines) + "\n"


def parse_paths(text: str, width: int) -> ExecutionTrace:
    """Inverse of :func:`format_paths`; agents must be listed as 0..n-1."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        m = _PATH_LINE.match(line)
        if m is None:
            raise ValueError(f"line {lineno}: not a paths line: {line[:60]!r}")
        if int(m.group(1)) != len(rows):
            raise ValueError(f"line {lineno}: expected agent {len(rows)}, got {m.group(1)}")
        rows.append([int(y) * width + int(x) for x, y in _COORD.findall(m.group(2))])
    if not rows:
        raise ValueError("paths file lists no agents")
    if len({len(r) for r in rows}) != 1:
        raise ValueError("agents have different trace lengths")
    return ExecutionTrace(np.array(rows, dtype=np.int64).T, width)


def timer_resolution() -> float:
    return time.get_clock_info("perf_counter").resolution


def format_metrics(metrics: Metrics, context: dict[str, object] | None = None) -> str:
    """``key = value`` lines; floats use ``repr`` so they round-trip exactly."""
    lines = [
        f"# clock = time.perf_counter (monotonic), resolution = {timer_resolution()!r} s",
    ]
    for key, value in (context or {}).items():
        lines.append(f"{key} = {value}")
    lines += [
        f"solved = {str(metrics.solved).lower()}",
        f"soc = {metrics.soc}",
        f"soc_lower_bound = {metrics.soc_lower_bound}",
        f"soc_ratio = {metrics.soc_ratio!r}",
        f"makespan = {metrics.makespan}",
        f"tnbe = {metrics.tnbe!r}",
        "per_step_planning = " + ",".join(repr(x) for x in metrics.per_step_planning),
    ]
    return "\n".join(lines) + "\n"


def parse_metrics(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def metrics_from_record(record: dict[str, str]) -> Metrics:
    steps = record.get("per_step_planning", "")
    return Metrics(
        soc=int(record["soc"]),
        soc_lower_bound=int(record["soc_lower_bound"]),
        soc_ratio=float(record["soc_ratio"]),
        makespan=int(record["makespan"]),
        tnbe=float(record["tnbe"]),
        per_step_planning=[float(x) for x in steps.split(",") if x],
        solved=record["solved"] == "true",
    )


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
