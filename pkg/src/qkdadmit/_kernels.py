"""Event-loop kernel: the hot inner loop of a simulation run.

The loop is written once, against flat numpy arrays, and runs in two modes:
``EVENT_LOOP_PY`` is the plain-Python reference and ``EVENT_LOOP_JIT`` its
numba-compiled twin (built when numba imports). Both execute the identical
source with IEEE semantics (no fastmath), and numba draws from a shared
``np.random.Generator`` bit-for-bit like numpy, so the two modes produce
identical runs. Mode selection: the ``QKDADMIT_NUMBA`` environment variable
(unset or truthy -> numba when available, "0"/"false"/"no"/"off" -> pure
Python), or an explicit backend argument.
"""

from __future__ import annotations

import os

import numpy as np

from .model import CAP_EPS

POLICY_FIRST_FIT = 0
POLICY_BEST_FIT = 1
POLICY_LOAD_BALANCE = 2
POLICY_RANDOM_FIT = 3

EVENT_ARRIVAL = 1
EVENT_DEPARTURE = 0

ERR_NONE = 0
ERR_CONSERVATION = 1
ERR_END_STATE = 2


def _event_loop(
    ev_time,
    ev_kind,
    ev_req,
    req_attach,
    req_key,
    req_cpu,
    node_cand_start,
    cand_edge_idx,
    cand_link_start,
    cand_links,
    link_cap,
    edge_cap,
    policy_code,
    w_cpu,
    w_key,
    rng,
    horizon,
    warmup_time,
    check_every,
):
    n_req = req_attach.shape[0]
    n_links = link_cap.shape[0]
    n_edges = edge_cap.shape[0]

    residual_link = link_cap.copy()
    residual_edge = edge_cap.copy()
    chosen = np.full(n_req, -1, np.int64)
    active_list = np.empty(n_req, np.int64)
    active_pos = np.full(n_req, -1, np.int64)
    n_active = 0
    scratch = np.empty(cand_edge_idx.shape[0] + 1, np.int64)
    used_link = np.empty(n_links, np.float64)
    used_edge = np.empty(n_edges, np.float64)

    def cand_ok(ci, r, c):
        if c > residual_edge[cand_edge_idx[ci]] + CAP_EPS:
            return False
        for j in range(cand_link_start[ci], cand_link_start[ci + 1]):
            if r > residual_link[cand_links[j]] + CAP_EPS:
                return False
        return True

    def cand_score(ci, r, c):
        # must mirror policies.slack_score exactly, term order included
        e = cand_edge_idx[ci]
        cpu_term = (residual_edge[e] - c) / edge_cap[e]
        key_term = 0.0
        first = True
        for j in range(cand_link_start[ci], cand_link_start[ci + 1]):
            li = cand_links[j]
            term = (residual_link[li] - r) / link_cap[li]
            if first or term < key_term:
                key_term = term
                first = False
        return w_cpu * cpu_term + w_key * key_term

    key_total = 0.0  # sum over active of key_rate * hops
    cpu_total = 0.0
    key_integral = 0.0
    cpu_integral = 0.0
    offered = 0
    accepted = 0
    hops_sum = 0
    t_prev = 0.0
    err_code = ERR_NONE
    err_event = -1

    for ev in range(ev_time.shape[0]):
        t = ev_time[ev]
        lo = t_prev if t_prev > warmup_time else warmup_time
        hi = t if t < horizon else horizon
        if hi > lo:
            key_integral += key_total * (hi - lo)
            cpu_integral += cpu_total * (hi - lo)
        t_prev = t

        req = ev_req[ev]
        if ev_kind[ev] == EVENT_DEPARTURE:
            cand = chosen[req]
            if cand >= 0 and active_pos[req] >= 0:
                e = cand_edge_idx[cand]
                residual_edge[e] += req_cpu[req]
                for j in range(cand_link_start[cand], cand_link_start[cand + 1]):
                    residual_link[cand_links[j]] += req_key[req]
                hops = cand_link_start[cand + 1] - cand_link_start[cand]
                key_total -= req_key[req] * hops
                cpu_total -= req_cpu[req]
                pos = active_pos[req]
                last = active_list[n_active - 1]
                active_list[pos] = last
                active_pos[last] = pos
                active_pos[req] = -1
                n_active -= 1
        else:
            counted = t >= warmup_time
            if counted:
                offered += 1
            a = req_attach[req]
            c0 = node_cand_start[a]
            c1 = node_cand_start[a + 1]
            r = req_key[req]
            c = req_cpu[req]
            pick = -1
            if policy_code == POLICY_FIRST_FIT:
                for ci in range(c0, c1):
                    if cand_ok(ci, r, c):
                        pick = ci
                        break
            elif policy_code == POLICY_RANDOM_FIT:
                m = 0
                for ci in range(c0, c1):
                    if cand_ok(ci, r, c):
                        scratch[m] = ci
                        m += 1
                if m > 0:
                    u = rng.random()
                    idx = int(u * m)
                    if idx >= m:
                        idx = m - 1
                    pick = scratch[idx]
            else:
                best_score = 0.0
                for ci in range(c0, c1):
                    if not cand_ok(ci, r, c):
                        continue
                    s = cand_score(ci, r, c)
                    if pick < 0:
                        pick = ci
                        best_score = s
                    elif policy_code == POLICY_BEST_FIT:
                        if s < best_score:
                            pick = ci
                            best_score = s
                    else:
                        if s > best_score:
                            pick = ci
                            best_score = s
            if pick >= 0:
                e = cand_edge_idx[pick]
                residual_edge[e] -= c
                for j in range(cand_link_start[pick], cand_link_start[pick + 1]):
                    residual_link[cand_links[j]] -= r
                hops = cand_link_start[pick + 1] - cand_link_start[pick]
                key_total += r * hops
                cpu_total += c
                chosen[req] = pick
                active_list[n_active] = req
                active_pos[req] = n_active
                n_active += 1
                if counted:
                    accepted += 1
                    hops_sum += hops

        if check_every > 0 and (ev + 1) % check_every == 0:
            for i in range(n_links):
                used_link[i] = 0.0
            for i in range(n_edges):
                used_edge[i] = 0.0
            for i in range(n_active):
                req_i = active_list[i]
                cand = chosen[req_i]
                used_edge[cand_edge_idx[cand]] += req_cpu[req_i]
                for j in range(cand_link_start[cand], cand_link_start[cand + 1]):
                    used_link[cand_links[j]] += req_key[req_i]
            for i in range(n_links):
                if abs(link_cap[i] - used_link[i] - residual_link[i]) > CAP_EPS:
                    err_code = ERR_CONSERVATION
                    err_event = ev
                    break
            if err_code == ERR_NONE:
                for i in range(n_edges):
                    if abs(edge_cap[i] - used_edge[i] - residual_edge[i]) > CAP_EPS:
                        err_code = ERR_CONSERVATION
                        err_event = ev
                        break
            if err_code != ERR_NONE:
                break

    if err_code == ERR_NONE:
        lo = t_prev if t_prev > warmup_time else warmup_time
        if horizon > lo:
            key_integral += key_total * (horizon - lo)
            cpu_integral += cpu_total * (horizon - lo)
        # every arrival has a matching departure, so the drained state must
        # sit exactly back at capacity
        for i in range(n_links):
            if abs(residual_link[i] - link_cap[i]) > CAP_EPS:
                err_code = ERR_END_STATE
        for i in range(n_edges):
            if abs(residual_edge[i] - edge_cap[i]) > CAP_EPS:
                err_code = ERR_END_STATE

    return (
        chosen,
        offered,
        accepted,
        hops_sum,
        key_integral,
        cpu_integral,
        err_code,
        err_event,
    )


EVENT_LOOP_PY = _event_loop

try:
    from numba import njit

    EVENT_LOOP_JIT = njit(cache=True)(_event_loop)
    NUMBA_AVAILABLE = True
except ImportError:
    EVENT_LOOP_JIT = None
    NUMBA_AVAILABLE = False


def env_wants_numba() -> bool:
    return os.environ.get("QKDADMIT_NUMBA", "1").strip().lower() not in (
        "0",
        "false",
        "no",
        "off",
    )


def resolve_backend(backend: str | None = None) -> str:
    """Map an explicit or environment-selected backend name to a usable one."""
    if backend is None:
        backend = "numba" if (NUMBA_AVAILABLE and env_wants_numba()) else "python"
    if backend not in ("numba", "python"):
        raise ValueError(f"unknown backend {backend!r}; use 'numba' or 'python'")
    if backend == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend


def event_loop_for(backend: str | None = None):
    """The event-loop callable for a backend ('numba', 'python', or None=auto)."""
    return EVENT_LOOP_JIT if resolve_backend(backend) == "numba" else EVENT_LOOP_PY
