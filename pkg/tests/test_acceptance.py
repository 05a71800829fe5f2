"""End-to-end acceptance checks, one printed verdict line per criterion."""

import json
import time

import numpy as np
import pytest

from qkdadmit import (
    AppRequest,
    Assignment,
    AttachmentDist,
    Dist,
    EdgeNode,
    EventTrace,
    OfflineInstance,
    PolicyId,
    QkdLink,
    QkdTopology,
    WorkloadSpec,
    k_shortest_paths,
    new_state,
    offline_optimum,
    replicate,
    run,
)
from qkdadmit.cli import build_topology, main

from util import all_simple_paths, random_requests, random_topology


def report(ok: bool, name: str, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


def test_erlang_b_blocking():
    """Unit loss system: measured blocking matches rho/(1+rho) within 0.01."""
    t0 = time.perf_counter()
    topo = QkdTopology(nodes=(0, 1), links=(QkdLink(0, 1, 1.0),), edges=(EdgeNode(1, 1.0),))
    rows = []
    for rho in (0.5, 1.0, 2.0):
        spec = WorkloadSpec(
            arrival_rate=rho,
            mean_holding=1.0,
            key_rate_dist=Dist.deterministic(1.0),
            cpu_dist=Dist.deterministic(1.0),
            horizon=2e5,
            seed=1000,
            attachment_dist=AttachmentDist.fixed(0),
        )
        metrics = replicate(topo, spec, "greedy_first_fit", 1, 20)
        blocking = 1.0 - float(np.mean([m.acceptance_ratio for m in metrics]))
        target = rho / (1.0 + rho)
        rows.append((rho, blocking, target, abs(blocking - target)))
    elapsed = time.perf_counter() - t0
    ok = all(err <= 0.01 for *_, err in rows) and elapsed < 60.0
    detail = " ".join(f"rho={r:g}:{b:.4f}(target {t:.4f})" for r, b, t, _ in rows)
    report(ok, "erlang-b blocking", f"{detail} elapsed={elapsed:.1f}s (budget 60s)")
    for _, _, _, err in rows:
        assert err <= 0.01
    assert elapsed < 60.0


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_oracle_dominance():
    """No online policy ever beats the offline optimum on 200 random instances."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240901)
    violations = 0
    checked = 0
    for _ in range(200):
        topo = random_topology(rng, max_nodes=6)
        reqs = random_requests(rng, topo, max_requests=8)
        optimum, _ = offline_optimum(OfflineInstance(topo, reqs, k=0))
        horizon = max((r.arrival + r.holding for r in reqs), default=1.0)
        trace = EventTrace.from_requests(reqs, horizon=horizon)
        for policy in PolicyId:
            m, _ = run(topo, trace, policy, 3, 11, warmup_fraction=0.0)
            checked += 1
            if m.accepted > optimum:
                violations += 1
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < 300.0
    report(
        ok,
        "oracle dominance",
        f"200 instances x {len(PolicyId)} policies ({checked} runs), "
        f"violations={violations} elapsed={elapsed:.1f}s (budget 300s)",
    )
    assert violations == 0
    assert elapsed < 300.0


def test_reservation_conservation_em():
    """1e6 random reserve/release ops never drift residual bookkeeping past 1e-9."""
    topo = QkdTopology(
        nodes=(0, 1, 2),
        links=(QkdLink(0, 1, 8.0), QkdLink(1, 2, 8.0), QkdLink(0, 2, 8.0)),
        edges=(EdgeNode(1, 6.0), EdgeNode(2, 6.0)),
    )
    cands = (
        (0, 1, (0, 1)),
        (0, 1, (0, 2, 1)),
        (0, 2, (0, 2)),
        (0, 2, (0, 1, 2)),
        (1, 1, (1,)),
        (2, 2, (2,)),
    )
    rng = np.random.default_rng(5150)
    n_ops = 1_000_000
    coin = rng.random(n_ops)
    key = rng.uniform(0.1, 1.5, n_ops)
    cpu = rng.uniform(0.1, 1.5, n_ops)
    pick = rng.integers(0, len(cands), n_ops)
    state = new_state(topo)
    active = []
    next_id = 0
    worst = 0.0
    reserves = 0
    for i in range(n_ops):
        if coin[i] < 0.55 or not active:
            a, e, p = cands[pick[i]]
            req = AppRequest(next_id, 0.0, a, key[i], cpu[i], 1.0)
            if state.feasible(req, e, p):
                state.reserve(Assignment.for_request(req, e, p))
                active.append(next_id)
                next_id += 1
                reserves += 1
        else:
            j = int(coin[i] * 1e6) % len(active)
            state.release(active.pop(j))
        err = state.conservation_error()
        if err > worst:
            worst = err
    for rid in active:
        state.release(rid)
    drained = max(
        max(abs(state.residual_skr[l.pair] - l.skr) for l in topo.links),
        max(abs(state.residual_cpu[e.location] - e.cpu) for e in topo.edges),
    )
    ok = worst <= 1e-9 and drained <= 1e-9
    report(
        ok,
        "reservation conservation",
        f"{n_ops} ops ({reserves} reserves), worst drift={worst:.2e}, "
        f"post-drain gap={drained:.2e} (tolerance 1e-9)",
    )
    assert worst <= 1e-9
    assert drained <= 1e-9


def test_pathfinding_matches_brute_force():
    """k-shortest enumeration agrees with exhaustive DFS on 500 random graphs."""
    rng = np.random.default_rng(31337)
    mismatches = 0
    compared = 0
    for _ in range(500):
        topo = random_topology(rng, max_nodes=8)
        origin = int(rng.integers(0, topo.n_nodes))
        target = int(rng.integers(0, topo.n_nodes))
        full = all_simple_paths(topo, origin, target)
        for k in (1, 3, 8):
            got = k_shortest_paths(topo, origin, target, k)
            compared += 1
            if got.paths != tuple(full[:k]):
                mismatches += 1
    ok = mismatches == 0
    report(
        ok,
        "pathfinding oracle",
        f"500 graphs x k in (1,3,8) = {compared} comparisons, mismatches={mismatches}",
    )
    assert mismatches == 0


def test_policy_ordering_under_cpu_scarcity():
    """Slack packing never loses materially to random choice when CPU binds."""
    topo = build_topology(
        {"kind": "grid", "rows": 4, "cols": 4, "skr": 1e6, "edge_every": 4, "cpu": 2.0}
    )
    rows = []
    ok = True
    for lam in (4.0, 8.0, 16.0):
        spec = WorkloadSpec(
            arrival_rate=lam,
            mean_holding=1.0,
            key_rate_dist=Dist.uniform(1.0, 5.0),
            cpu_dist=Dist.uniform(0.5, 1.5),
            horizon=400.0,
            seed=42000,
        )
        means = {}
        for policy in ("best_fit", "random_fit"):
            metrics = replicate(topo, spec, policy, 3, 20, base_seed=42000)
            means[policy] = float(np.mean([m.acceptance_ratio for m in metrics]))
        gap = means["best_fit"] - means["random_fit"]
        ok = ok and gap >= -0.02
        rows.append(f"lam={lam:g}:best={means['best_fit']:.4f},random={means['random_fit']:.4f}")
    report(ok, "policy ordering", " ".join(rows) + " (allowed slack 0.02)")
    assert ok


def test_experiment_reruns_are_byte_identical(tmp_path):
    """One config, two executions, identical runs.csv bytes."""
    config = {
        "topology": {"kind": "grid", "rows": 3, "cols": 3, "skr": 4.0, "edge_every": 3, "cpu": 3.0},
        "workload": {
            "arrival_rate": 3.0,
            "mean_holding": 1.0,
            "key_rate_dist": {"dist": "uniform", "low": 0.5, "high": 2.0},
            "cpu_dist": {"dist": "exponential", "mean": 0.8},
            "horizon": 120.0,
            "seed": 77,
        },
        "policies": ["greedy_first_fit", "best_fit", "load_balance", "random_fit"],
        "k": 3,
        "n_runs": 3,
        "sweep": {"param": "arrival_rate", "values": [2.0, 6.0]},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    assert main(["--config", str(path), "--output", str(tmp_path / "o1")]) == 0
    assert main(["--config", str(path), "--output", str(tmp_path / "o2")]) == 0
    a = (tmp_path / "o1" / "runs.csv").read_bytes()
    b = (tmp_path / "o2" / "runs.csv").read_bytes()
    rows = len(a.splitlines()) - 1
    ok = a == b
    report(ok, "deterministic reruns", f"runs.csv identical across executions ({rows} rows)")
    assert ok
