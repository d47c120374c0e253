"""Timing comparison of the jit and pure-numpy kernel backends.

Runs the same seeded workloads in two subprocesses, one per backend (the
MCBALANCE_NUMBA flag is read at import time), and prints a side-by-side
table. Jit compilation time is excluded by a warmup pass inside each
subprocess; the traces are digest-checked so the comparison is apples to
apples.
"""
from __future__ import annotations

import json
import os
import subprocess
import sys

WORKER = r"""
import hashlib, json, os, time
import numpy as np
from mcbalance.samplers import ProposalSpec, run_chain
from mcbalance.targets import FunnelSpec, FunnelTarget, simulate_changepoint, ChangepointTarget

def timed(target, proposal, init, n, seed, warmup=50):
    rng = np.random.default_rng(seed)
    run_chain(target, init, proposal, warmup, rng)  # compile + warm caches
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    trace = run_chain(target, init, proposal, n, rng)
    dt = time.perf_counter() - t0
    digest = hashlib.sha256(trace.states.tobytes()).hexdigest()[:16]
    return dt, digest

results = {}
funnel = FunnelTarget(FunnelSpec())
start = funnel.start_state()
results["funnel truncnorm sweep x2000"] = timed(
    funnel, ProposalSpec(kind="truncnorm", sigma=1.0, updates_per_iter=10), start, 2000, 1)
results["funnel slice sweep x500"] = timed(
    funnel, ProposalSpec(kind="slice", interval=1.0, updates_per_iter=10), start, 500, 2)
cp = ChangepointTarget(simulate_changepoint(3), width=0.1)
cinit = np.array([100, 100], dtype=np.int64)
results["changepoint cube x20000"] = timed(
    cp, ProposalSpec(kind="cube", width=4.0), cinit, 20000, 3)
from mcbalance._jit import backend_name
print(json.dumps({"backend": backend_name(), "results": {k: v for k, v in results.items()}}))
"""


def run_backend(flag: str) -> dict:
    env = dict(os.environ, MCBALANCE_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", WORKER], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    numpy_run = run_backend("0")
    numba_run = run_backend("1")
    print(f"{'workload':40s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s}")
    for name, (t_np, d_np) in numpy_run["results"].items():
        t_nb, d_nb = numba_run["results"][name]
        mark = "" if d_np == d_nb else "  TRACE MISMATCH"
        print(f"{name:40s} {t_np:10.3f} {t_nb:10.3f} {t_np / t_nb:8.1f}x{mark}")
        if d_np != d_nb:
            return 1
    print("traces bit-identical across backends")
    return 0


if __name__ == "__main__":
    sys.exit(main())
