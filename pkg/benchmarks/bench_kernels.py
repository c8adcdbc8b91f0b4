"""Benchmark the hot kernels on the numba backend against the pure-numpy
fallback (selected via TYCLAB_NUMBA=0).

Each workload runs in a fresh subprocess per backend so the env flag is
honored at import time; one warm-up call is excluded from the timing.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""
import argparse
import json
import os
import subprocess
import sys

_WORKLOADS = {
    "ode_settle": """
spec = ModelSpec(ModelKind.CLASSIC3, DimensionlessParams(r=17.8125))
cfg = IntegratorConfig(t_end=50.0, sample_dt=0.01)
run = lambda: integrate(spec, (0.3, 0.3, 2.5), cfg)
""",
    "ode_blowup": """
spec = ModelSpec(ModelKind.CLASSIC3, DimensionlessParams(r=17.8125))
cfg = IntegratorConfig(t_end=5.0)
run = lambda: integrate(spec, (0.4, 0.4, 2.5), cfg)
""",
    "pde_dirichlet_blowup": """
spec = ModelSpec(ModelKind.CLASSIC3,
                 DimensionlessParams(r=17.8125, diffusion=0.01), spatial=True)
grid = SpatialGrid(199, BoundaryCondition.DIRICHLET)
fields = np.stack([parabola_profile(grid), parabola_profile(grid),
                   supermale_parabola_profile(grid, 3.0)])
cfg = IntegratorConfig(t_end=5.0)
run = lambda: integrate_pde(spec, fields, grid, cfg)
""",
    "threshold_s_star": """
spec = ModelSpec(ModelKind.CLASSIC3, DimensionlessParams(r=17.8125))
run = lambda: find_threshold(spec, 0.3, "s0", Boundary.REGION_1_2, (0.0, 2.0))
""",
}

_TEMPLATE = """
import json, time
import numpy as np
from tyclab import (backend, Boundary, BoundaryCondition, DimensionlessParams,
                    IntegratorConfig, ModelKind, ModelSpec, SpatialGrid,
                    find_threshold, integrate, integrate_pde)
from tyclab.pde import parabola_profile, supermale_parabola_profile
{setup}
run()  # warm-up (JIT compile on the numba path)
times = []
for _ in range({repeats}):
    t0 = time.perf_counter()
    run()
    times.append(time.perf_counter() - t0)
print(json.dumps({{"backend": backend.backend_name(), "median": sorted(times)[len(times)//2]}}))
"""


def run_workload(name: str, numba_flag: str, repeats: int) -> dict:
    code = _TEMPLATE.format(setup=_WORKLOADS[name], repeats=repeats)
    env = dict(os.environ, TYCLAB_NUMBA=numba_flag)
    r = subprocess.run([sys.executable, "-c", code], capture_output=True,
                       text=True, env=env)
    if r.returncode != 0:
        raise RuntimeError(f"{name} failed:\n{r.stderr}")
    return json.loads(r.stdout.splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    print(f"{'workload':<24} {'numba (s)':>12} {'numpy (s)':>12} {'speedup':>9}")
    for name in _WORKLOADS:
        fast = run_workload(name, "1", args.repeats)
        slow = run_workload(name, "0", args.repeats)
        if fast["backend"] != "numba":
            print(f"{name:<24} numba unavailable; numpy median "
                  f"{slow['median']:.4f}s")
            continue
        speedup = slow["median"] / fast["median"]
        print(f"{name:<24} {fast['median']:>12.4f} {slow['median']:>12.4f} "
              f"{speedup:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
