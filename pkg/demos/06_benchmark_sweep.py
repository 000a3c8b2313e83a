"""
A small benchmark sweep
=======================

The ``bench`` command runs seeded instances for every agent count, horizon
and mode and writes per-run rows plus an aggregate table. It is called here
through ``main`` so the sweep stays inside Python.
"""

# %%
import csv
import tempfile
from pathlib import Path

from horizon_mapf.benchmarks import bundled_paths
from horizon_mapf.cli import main

map_path, scen_path = bundled_paths()
out = Path(tempfile.mkdtemp()) / "sweep.csv"
code = main([
    "bench", "--map", str(map_path), "--scen", str(scen_path),
    "--agents", "25", "50", "--horizons", "5", "10", "--runs", "2",
    "--out", str(out),
])
print("exit", code)

# %%
with open(out.with_name("sweep_aggregate.csv"), newline="") as f:
    for row in csv.DictReader(f):
        print(row["agents"], row["horizon"], row["mode"], row["success_rate"],
              row["soc_ratio_mean"][:6], row["tnbe_median"][:8])

# %%
# Without the timing columns two sweeps produce identical bytes.
again = out.with_name("again.csv")
for target in (out, again):
    main(["bench", "--map", str(map_path), "--scen", str(scen_path), "--agents", "25",
          "--horizons", "5", "--runs", "2", "--omit-timing", "--out", str(target)])
print(out.read_bytes() == again.read_bytes())
