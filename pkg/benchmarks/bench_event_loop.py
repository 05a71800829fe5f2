"""Throughput comparison of the compiled and pure-numpy event loops.

Runs the same trace through both backends and reports events per second.
The first compiled run includes JIT compilation, so it is warmed separately.

Usage: python benchmarks/bench_event_loop.py [--arrival-rate R] [--horizon H] [--repeats N]
"""

import argparse
import time

from qkdadmit import Dist, WorkloadSpec, generate_trace, run
from qkdadmit._kernels import NUMBA_AVAILABLE
from qkdadmit.cli import build_topology


def time_backend(topo, trace, backend, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        metrics, _ = run(topo, trace, "best_fit", 3, 7, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, metrics


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--arrival-rate", type=float, default=8.0)
    parser.add_argument("--horizon", type=float, default=4000.0)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    topo = build_topology(
        {"kind": "grid", "rows": 4, "cols": 4, "skr": 40.0, "edge_every": 4, "cpu": 6.0}
    )
    spec = WorkloadSpec(
        arrival_rate=args.arrival_rate,
        mean_holding=1.0,
        key_rate_dist=Dist.uniform(1.0, 5.0),
        cpu_dist=Dist.uniform(0.3, 1.5),
        horizon=args.horizon,
        seed=7,
    )
    trace = generate_trace(topo, spec)
    n_events = 2 * trace.n
    print(f"trace: {trace.n} requests ({n_events} events), grid 4x4, best_fit, k=3")

    py_time, py_metrics = time_backend(topo, trace, "python", args.repeats)
    print(f"python: {py_time:.3f}s  ({n_events / py_time:,.0f} events/s)")

    if not NUMBA_AVAILABLE:
        print("numba: not installed, skipping")
        return

    t0 = time.perf_counter()
    _, warm_metrics = time_backend(topo, trace, "numba", 1)
    print(f"numba first call (includes compile): {time.perf_counter() - t0:.3f}s")
    nb_time, nb_metrics = time_backend(topo, trace, "numba", args.repeats)
    print(f"numba:  {nb_time:.3f}s  ({n_events / nb_time:,.0f} events/s)")
    print(f"speedup: {py_time / nb_time:.1f}x")

    assert py_metrics == nb_metrics == warm_metrics, "backends disagree"
    print("backends agree on every metric")


if __name__ == "__main__":
    main()
