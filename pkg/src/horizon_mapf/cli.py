"""Command-line entry points: ``solve`` one instance, ``bench`` a sweep.

Exit codes for ``solve``: 0 solved, 2 cap reached before all agents arrived,
1 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import statistics
import sys
from pathlib import Path
from typing import Sequence

from .engine import EngineConfig, Mode, default_thread_count, run
from .formats import format_metrics, format_paths, timer_resolution, write_text
from .grid import MapFormatError, load_map
from .scenario import InstanceError, ScenarioFormatError, build_instance, load_scen
from .seeding import SALT_RUN, combine

log = logging.getLogger("horizon_mapf")

EXIT_SOLVED, EXIT_INPUT, EXIT_UNSOLVED = 0, 1, 2

DETERMINISTIC_COLUMNS = [
    "map", "agents", "horizon", "mode", "run", "seed", "solved",
    "soc", "soc_lower_bound", "soc_ratio", "makespan", "steps", "error",
]
TIMING_COLUMNS = ["tnbe", "step_time_mean", "step_time_median", "step_time_max", "tnbe_ratio"]


class InputError(Exception):
    pass


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _load(map_path: str, scen_path: str):
    try:
        grid = load_map(map_path)
        entries = load_scen(scen_path)
    except OSError as e:
        raise InputError(f"cannot read {e.filename}: {e.strerror}") from None
    except (MapFormatError, ScenarioFormatError) as e:
        raise InputError(str(e)) from None
    return grid, entries


def cmd_solve(args: argparse.Namespace) -> int:
    try:
        grid, entries = _load(args.map, args.scen)
        instance = build_instance(grid, entries, args.agents)
    except (InputError, InstanceError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    config = EngineConfig(
        horizon=args.horizon,
        global_seed=args.seed,
        max_timesteps=args.max_timesteps,
        mode=Mode(args.mode),
        thread_count=args.threads,
        stage2_fixpoint=args.stage2_fixpoint,
        fixed_order=args.fixed_order,
    )
    result = run(instance, config)
    out = Path(args.out)
    context = {
        "map": grid.name,
        "agents": args.agents,
        "horizon": args.horizon,
        "seed": args.seed,
        "mode": config.mode.value,
    }
    write_text(out / "metrics.txt", format_metrics(result.metrics, context))
    write_text(out / "paths.txt", format_paths(result.trace))
    m = result.metrics
    log.info(
        "solved=%s soc=%d lb=%d ratio=%.4f makespan=%d tnbe=%.4fs",
        m.solved, m.soc, m.soc_lower_bound, m.soc_ratio, m.makespan, m.tnbe,
    )
    return EXIT_SOLVED if m.solved else EXIT_UNSOLVED


def run_seed(base_seed: int, run_index: int) -> int:
    return combine(SALT_RUN, base_seed, run_index) >> 33


def bench_rows(args: argparse.Namespace) -> list[dict[str, object]]:
    grid, entries = _load(args.map, args.scen)
    modes = [Mode(m) for m in args.modes]
    rows = []
    for n in args.agents:
        for H in args.horizons:
            for r in range(args.runs):
                seed = run_seed(args.seed, r)
                per_mode = {}
                for mode in modes:
                    row: dict[str, object] = {
                        "map": grid.name, "agents": n, "horizon": H, "mode": mode.value,
                        "run": r, "seed": seed, "error": "",
                    }
                    try:
                        instance = build_instance(grid, entries, n, seed=seed)
                        config = EngineConfig(
                            horizon=H, global_seed=seed, mode=mode, thread_count=args.threads
                        )
                        result = run(instance, config)
                    except Exception as e:  # a failed run is recorded, not fatal
                        row["error"] = f"{type(e).__name__}: {e}".replace("\n", " ")
                        rows.append(row)
                        continue
                    m = result.metrics
                    steps = m.per_step_planning or [0.0]
                    row.update(
                        solved=str(m.solved).lower(), soc=m.soc,
                        soc_lower_bound=m.soc_lower_bound, soc_ratio=repr(m.soc_ratio),
                        makespan=m.makespan, steps=len(m.per_step_planning),
                        tnbe=repr(m.tnbe),
                        step_time_mean=repr(statistics.fmean(steps)),
                        step_time_median=repr(statistics.median(steps)),
                        step_time_max=repr(max(steps)),
                    )
                    per_mode[mode] = (row, m.tnbe)
                    rows.append(row)
                    log.info("%s n=%d H=%d run=%d %s: %s", grid.name, n, H, r, mode.value,
                             "solved" if m.solved else "UNSOLVED")
                if Mode.ONLINE in per_mode and Mode.OFFLINE in per_mode:
                    online, offline = per_mode[Mode.ONLINE][1], per_mode[Mode.OFFLINE][1]
                    ratio = repr(online / offline) if offline > 0 else ""
                    for row, _ in per_mode.values():
                        row["tnbe_ratio"] = ratio
    return rows


def _stats(values: list[float], prefix: str) -> dict[str, str]:
    if not values:
        return {f"{prefix}_mean": "", f"{prefix}_median": "", f"{prefix}_std": ""}
    return {
        f"{prefix}_mean": repr(statistics.fmean(values)),
        f"{prefix}_median": repr(statistics.median(values)),
        f"{prefix}_std": repr(statistics.pstdev(values)),
    }


def aggregate(rows: list[dict[str, object]], timing: bool) -> list[dict[str, object]]:
    """Per (map, agents, horizon, mode) summaries recomputable from ``rows``.

    Statistics cover runs that finished without error; ``std`` is the
    population standard deviation. Step-time statistics summarise each run's
    median step time.
    """
    keys: list[tuple] = []
    buckets: dict[tuple, list[dict[str, object]]] = {}
    for row in rows:
        key = (row["map"], row["agents"], row["horizon"], row["mode"])
        if key not in buckets:
            keys.append(key)
            buckets[key] = []
        buckets[key].append(row)
    out = []
    for key in keys:
        group = buckets[key]
        ok = [r for r in group if not r["error"]]
        summary: dict[str, object] = dict(zip(("map", "agents", "horizon", "mode"), key))
        summary["runs"] = len(group)
        summary["errors"] = len(group) - len(ok)
        summary["success_rate"] = repr(
            sum(r["solved"] == "true" for r in ok) / len(group)
        )
        summary.update(_stats([float(r["soc_ratio"]) for r in ok], "soc_ratio"))
        if timing:
            summary.update(_stats([float(r["tnbe"]) for r in ok], "tnbe"))
            summary.update(_stats([float(r["step_time_median"]) for r in ok], "step_time"))
            ratios = [float(r["tnbe_ratio"]) for r in ok if r.get("tnbe_ratio")]
            summary.update(_stats(ratios, "tnbe_ratio"))
        out.append(summary)
    return out


def _csv(rows: list[dict[str, object]], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: row.get(c, "") for c in columns})
    return buf.getvalue()


def aggregate_path(out: Path) -> Path:
    return out.with_name(out.stem + "_aggregate" + (out.suffix or ".csv"))


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        rows = bench_rows(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    timing = not args.omit_timing
    columns = DETERMINISTIC_COLUMNS + (TIMING_COLUMNS if timing else [])
    out = Path(args.out)
    write_text(out, _csv(rows, columns))
    summary = aggregate(rows, timing)
    agg_columns = list(summary[0].keys()) if summary else []
    write_text(aggregate_path(out), _csv(summary, agg_columns))
    if timing:
        log.info("timer resolution %r s", timer_resolution())
    return EXIT_SOLVED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="horizon-mapf", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one instance and write metrics + paths")
    solve.add_argument("--map", required=True)
    solve.add_argument("--scen", required=True)
    solve.add_argument("--agents", type=_positive, required=True)
    solve.add_argument("--horizon", type=_positive, default=10)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--mode", choices=[m.value for m in Mode], default="online")
    solve.add_argument("--threads", type=_positive, default=default_thread_count())
    solve.add_argument("--max-timesteps", type=_positive, default=None)
    solve.add_argument("--out", required=True, help="output directory")
    solve.add_argument("--fixed-order", action="store_true",
                       help="break distance ties by neighbour order instead of seeded keys")
    solve.add_argument("--stage2-fixpoint", action="store_true")
    solve.set_defaults(func=cmd_solve)

    bench = sub.add_parser("bench", help="run a seeded sweep and write CSV results")
    bench.add_argument("--map", required=True)
    bench.add_argument("--scen", required=True)
    bench.add_argument("--agents", type=_positive, nargs="+", required=True)
    bench.add_argument("--horizons", type=_positive, nargs="+", required=True)
    bench.add_argument("--runs", type=_positive, default=1)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--modes", nargs="+", choices=[m.value for m in Mode],
                       default=["online", "offline"])
    bench.add_argument("--threads", type=_positive, default=default_thread_count())
    bench.add_argument("--out", required=True, help="CSV path; aggregates go next to it")
    bench.add_argument("--omit-timing", action="store_true",
                       help="drop wall-clock columns so reruns are byte-identical")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_SOLVED
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
