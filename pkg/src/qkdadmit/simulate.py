"""Workload generation and discrete-event simulation runs.

A run is: draw a request trace from a :class:`WorkloadSpec`, replay its
arrival and departure events in time order (departures first on ties, then
lower request id), let the policy decide each arrival online, and aggregate
metrics over the measured window ``[warmup, horizon)``. Trace randomness and
policy randomness come from separate streams derived from the run seed, so
every policy sees the identical trace and reruns are reproducible to the
byte.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, replace
from functools import cached_property, lru_cache
from typing import Iterator, NamedTuple

import numpy as np

from . import _kernels
from ._kernels import ERR_CONSERVATION, ERR_END_STATE, event_loop_for
from .model import AppRequest, QkdTopology
from .paths import enumerate_candidates
from .policies import PolicyId

_TINY = np.finfo(np.float64).tiny
_MAX_SEED = 2**64 - 1

# disjoint rng stream labels derived from the run seed
_TRACE_STREAM = int.from_bytes(b"trace", "little")
_POLICY_STREAM = int.from_bytes(b"policy", "little")

_POLICY_CODES = {
    PolicyId.GREEDY_FIRST_FIT: _kernels.POLICY_FIRST_FIT,
    PolicyId.BEST_FIT: _kernels.POLICY_BEST_FIT,
    PolicyId.LOAD_BALANCE: _kernels.POLICY_LOAD_BALANCE,
    PolicyId.RANDOM_FIT: _kernels.POLICY_RANDOM_FIT,
}


def _check_positive(value: float, what: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{what} must be finite and > 0, got {value}")
    return value


def _check_seed(seed: int, what: str = "seed") -> int:
    seed = int(seed)
    if not 0 <= seed <= _MAX_SEED:
        raise ValueError(f"{what} must be a 64-bit unsigned integer, got {seed}")
    return seed


@dataclass(frozen=True)
class Dist:
    """Positive scalar distribution for per-request demands.

    Construct through :meth:`deterministic`, :meth:`uniform`, or
    :meth:`exponential`; exponential draws are clamped away from zero so
    demands stay strictly positive.
    """

    kind: str
    p0: float
    p1: float = 0.0

    @classmethod
    def deterministic(cls, value: float) -> "Dist":
        return cls("deterministic", _check_positive(value, "deterministic value"))

    @classmethod
    def uniform(cls, low: float, high: float) -> "Dist":
        low = _check_positive(low, "uniform low")
        high = _check_positive(high, "uniform high")
        if high < low:
            raise ValueError(f"uniform bounds out of order: [{low}, {high}]")
        return cls("uniform", low, high)

    @classmethod
    def exponential(cls, mean: float) -> "Dist":
        return cls("exponential", _check_positive(mean, "exponential mean"))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "deterministic":
            return np.full(n, self.p0)
        if self.kind == "uniform":
            return rng.uniform(self.p0, self.p1, n)
        return np.maximum(rng.exponential(self.p0, n), _TINY)


@dataclass(frozen=True)
class AttachmentDist:
    """Where arrivals attach: uniform over all nodes, one fixed node, or weighted."""

    kind: str = "uniform"
    node: int = 0
    weights: tuple[float, ...] = ()

    @classmethod
    def uniform(cls) -> "AttachmentDist":
        return cls("uniform")

    @classmethod
    def fixed(cls, node: int) -> "AttachmentDist":
        if node < 0:
            raise ValueError(f"attachment node must be >= 0, got {node}")
        return cls("fixed", node=int(node))

    @classmethod
    def weighted(cls, weights) -> "AttachmentDist":
        w = tuple(float(x) for x in weights)
        if not w or any(x < 0 or not np.isfinite(x) for x in w) or sum(w) <= 0:
            raise ValueError("weights must be non-negative with a positive sum")
        return cls("weighted", weights=w)

    def sample(self, rng: np.random.Generator, n: int, n_nodes: int) -> np.ndarray:
        if self.kind == "uniform":
            return rng.integers(0, n_nodes, n)
        if self.kind == "fixed":
            if self.node >= n_nodes:
                raise ValueError(f"fixed attachment node {self.node} not in [0, {n_nodes})")
            return np.full(n, self.node, np.int64)
        if len(self.weights) != n_nodes:
            raise ValueError(f"{len(self.weights)} attachment weights for {n_nodes} nodes")
        p = np.asarray(self.weights)
        return rng.choice(n_nodes, size=n, p=p / p.sum())


@dataclass(frozen=True)
class WorkloadSpec:
    """Parameters of one synthetic arrival process."""

    arrival_rate: float
    mean_holding: float
    key_rate_dist: Dist
    cpu_dist: Dist
    horizon: float
    seed: int
    attachment_dist: AttachmentDist = AttachmentDist("uniform")

    def __post_init__(self):
        _check_positive(self.arrival_rate, "arrival_rate")
        _check_positive(self.mean_holding, "mean_holding")
        if not np.isfinite(self.horizon) or self.horizon < 0:
            raise ValueError(f"horizon must be finite and >= 0, got {self.horizon}")
        _check_seed(self.seed)


class EventKind(enum.IntEnum):
    DEPARTURE = _kernels.EVENT_DEPARTURE
    ARRIVAL = _kernels.EVENT_ARRIVAL


class Event(NamedTuple):
    time: float
    kind: EventKind
    request_id: int


@dataclass(frozen=True)
class EventTrace:
    """Struct-of-arrays request trace for one run.

    Arrays are aligned by position and ordered by request id; arrival times
    must be nondecreasing in that order. Arrival/departure events derive from
    the trace on demand, sorted by (time, departures-before-arrivals, id).
    """

    horizon: float
    ids: np.ndarray
    arrival: np.ndarray
    attachment: np.ndarray
    key_rate: np.ndarray
    cpu: np.ndarray
    holding: np.ndarray

    def __post_init__(self):
        for name, dtype in (
            ("ids", np.int64),
            ("arrival", np.float64),
            ("attachment", np.int64),
            ("key_rate", np.float64),
            ("cpu", np.float64),
            ("holding", np.float64),
        ):
            arr = np.array(getattr(self, name), dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.ids.size
        for name in ("arrival", "attachment", "key_rate", "cpu", "holding"):
            if getattr(self, name).size != n:
                raise ValueError(f"{name} has {getattr(self, name).size} entries for {n} ids")
        if not np.isfinite(self.horizon) or self.horizon < 0:
            raise ValueError(f"horizon must be finite and >= 0, got {self.horizon}")
        if n == 0:
            return
        if self.ids[0] < 0 or np.any(np.diff(self.ids) <= 0):
            raise ValueError("ids must be >= 0 and strictly increasing")
        if self.arrival[0] < 0 or np.any(np.diff(self.arrival) < 0):
            raise ValueError("arrival times must be >= 0 and nondecreasing in id order")
        if not np.all(np.isfinite(self.arrival)):
            raise ValueError("arrival times must be finite")
        for name in ("key_rate", "cpu", "holding"):
            arr = getattr(self, name)
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise ValueError(f"{name} values must be finite and > 0")

    @property
    def n(self) -> int:
        return self.ids.size

    @classmethod
    def from_requests(cls, requests, horizon: float | None = None) -> "EventTrace":
        reqs = sorted(requests, key=lambda r: r.id)
        if horizon is None:
            horizon = max((r.arrival + r.holding for r in reqs), default=0.0)
        return cls(
            horizon=float(horizon),
            ids=np.array([r.id for r in reqs], np.int64),
            arrival=np.array([r.arrival for r in reqs]),
            attachment=np.array([r.attachment for r in reqs], np.int64),
            key_rate=np.array([r.key_rate for r in reqs]),
            cpu=np.array([r.cpu for r in reqs]),
            holding=np.array([r.holding for r in reqs]),
        )

    @cached_property
    def event_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(times, kinds, request positions) in processing order."""
        n = self.n
        times = np.concatenate([self.arrival, self.arrival + self.holding])
        kinds = np.concatenate(
            [np.full(n, EventKind.ARRIVAL.value, np.int64), np.full(n, EventKind.DEPARTURE.value, np.int64)]
        )
        pos = np.concatenate([np.arange(n, dtype=np.int64)] * 2)
        tie = np.concatenate([self.ids, self.ids])
        order = np.lexsort((tie, kinds, times))
        return times[order], kinds[order], pos[order]

    def request(self, i: int) -> AppRequest:
        return AppRequest(
            id=int(self.ids[i]),
            arrival=float(self.arrival[i]),
            attachment=int(self.attachment[i]),
            key_rate=float(self.key_rate[i]),
            cpu=float(self.cpu[i]),
            holding=float(self.holding[i]),
        )

    def requests(self) -> Iterator[AppRequest]:
        return (self.request(i) for i in range(self.n))

    def events(self) -> Iterator[Event]:
        times, kinds, pos = self.event_arrays
        return (
            Event(float(times[i]), EventKind(int(kinds[i])), int(self.ids[pos[i]]))
            for i in range(times.size)
        )


def trace_stream(seed: int) -> np.random.Generator:
    """The rng stream trace generation uses for this run seed."""
    return np.random.default_rng(np.random.SeedSequence([_check_seed(seed), _TRACE_STREAM]))


def policy_stream(seed: int) -> np.random.Generator:
    """The rng stream a run hands to its policy (only random_fit draws)."""
    return np.random.default_rng(np.random.SeedSequence([_check_seed(seed), _POLICY_STREAM]))


def generate_trace(topology: QkdTopology, spec: WorkloadSpec) -> EventTrace:
    """Draw one request trace: Poisson arrivals, exponential holdings.

    The draw order is pinned (count, arrival times, holdings, key rates,
    cpu demands, attachments), so a given (topology, spec) always produces
    the identical trace regardless of policy or backend.
    """
    rng = trace_stream(spec.seed)
    n = int(rng.poisson(spec.arrival_rate * spec.horizon))
    times = np.sort(rng.uniform(0.0, spec.horizon, n))
    holdings = np.maximum(rng.exponential(spec.mean_holding, n), _TINY)
    keys = spec.key_rate_dist.sample(rng, n)
    cpus = spec.cpu_dist.sample(rng, n)
    attach = spec.attachment_dist.sample(rng, n, topology.n_nodes)
    return EventTrace(
        horizon=float(spec.horizon),
        ids=np.arange(n, dtype=np.int64),
        arrival=times,
        attachment=attach,
        key_rate=keys,
        cpu=cpus,
        holding=holdings,
    )


@dataclass(frozen=True, eq=False)
class _CandidateTables:
    """Flat array form of every attachment's candidate list, kernel-ready."""

    node_cand_start: np.ndarray
    cand_edge_idx: np.ndarray
    cand_edge_node: np.ndarray
    cand_link_start: np.ndarray
    cand_links: np.ndarray
    cand_paths: tuple[tuple[int, ...], ...]
    link_cap: np.ndarray
    edge_cap: np.ndarray


@lru_cache(maxsize=32)
def _compile_tables(topology: QkdTopology, k: int) -> _CandidateTables:
    link_row = {link.pair: i for i, link in enumerate(topology.links)}
    edge_row = {edge.location: i for i, edge in enumerate(topology.edges)}
    node_start = [0]
    edge_idx: list[int] = []
    edge_node: list[int] = []
    link_start = [0]
    links_flat: list[int] = []
    paths: list[tuple[int, ...]] = []
    for node in topology.nodes:
        for edge, path in enumerate_candidates(topology, node, k):
            edge_idx.append(edge_row[edge])
            edge_node.append(edge)
            for u, v in zip(path, path[1:]):
                links_flat.append(link_row[(u, v) if u < v else (v, u)])
            link_start.append(len(links_flat))
            paths.append(path)
        node_start.append(len(edge_idx))
    return _CandidateTables(
        node_cand_start=np.asarray(node_start, np.int64),
        cand_edge_idx=np.asarray(edge_idx, np.int64),
        cand_edge_node=np.asarray(edge_node, np.int64),
        cand_link_start=np.asarray(link_start, np.int64),
        cand_links=np.asarray(links_flat, np.int64),
        cand_paths=tuple(paths),
        link_cap=np.asarray([l.skr for l in topology.links], np.float64),
        edge_cap=np.asarray([e.cpu for e in topology.edges], np.float64),
    )


@dataclass(frozen=True)
class RunMetrics:
    """Aggregates of one run over the measured window [warmup, horizon)."""

    offered: int
    accepted: int
    acceptance_ratio: float
    carried_key_rate: float
    cpu_utilization: float
    skr_utilization: float
    mean_path_hops: float


@dataclass(frozen=True)
class LogEntry:
    request_id: int
    accepted: bool
    edge: int | None
    path: tuple[int, ...] | None


class RequestLog:
    """Per-request outcome of one run, in request id order."""

    def __init__(self, ids: np.ndarray, chosen: np.ndarray, tables: _CandidateTables):
        self._ids = ids
        self._chosen = chosen
        self._tables = tables

    def __len__(self) -> int:
        return self._ids.size

    def entry(self, i: int) -> LogEntry:
        cand = int(self._chosen[i])
        if cand < 0:
            return LogEntry(int(self._ids[i]), False, None, None)
        return LogEntry(
            int(self._ids[i]),
            True,
            int(self._tables.cand_edge_node[cand]),
            self._tables.cand_paths[cand],
        )

    def __iter__(self) -> Iterator[LogEntry]:
        return (self.entry(i) for i in range(len(self)))

    @property
    def accepted_mask(self) -> np.ndarray:
        return self._chosen >= 0


def run(
    topology: QkdTopology,
    trace: EventTrace,
    policy: PolicyId | str,
    k: int,
    seed: int,
    warmup_fraction: float = 0.1,
    score_weights: tuple[float, float] = (1.0, 1.0),
    check_every: int = 1000,
    backend: str | None = None,
) -> tuple[RunMetrics, RequestLog]:
    """Simulate one policy over one trace and aggregate metrics.

    ``seed`` feeds the policy's private rng stream; the trace carries its own
    randomness, so all policies compared on the same trace see identical
    arrivals. ``check_every`` controls how often reservation conservation is
    re-verified from scratch inside the loop (0 disables). ``backend``
    selects the event-loop implementation ('numba', 'python', or None for
    the QKDADMIT_NUMBA environment default).
    """
    if isinstance(policy, str):
        policy = PolicyId.parse(policy)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not 0.0 <= warmup_fraction < 1.0:
        raise ValueError(f"warmup_fraction must be in [0, 1), got {warmup_fraction}")
    _check_seed(seed)
    if trace.n and (trace.attachment.min() < 0 or trace.attachment.max() >= topology.n_nodes):
        raise ValueError("trace attaches requests outside the topology's nodes")
    if not topology.is_connected:
        warnings.warn(
            "topology is not connected; requests attached off an edge node's "
            "component can never be served",
            RuntimeWarning,
            stacklevel=2,
        )

    tables = _compile_tables(topology, k)
    times, kinds, reqpos = trace.event_arrays
    warmup_time = trace.horizon * warmup_fraction
    loop = event_loop_for(backend)
    chosen, offered, accepted, hops_sum, key_int, cpu_int, err, err_ev = loop(
        times,
        kinds,
        reqpos,
        trace.attachment,
        trace.key_rate,
        trace.cpu,
        tables.node_cand_start,
        tables.cand_edge_idx,
        tables.cand_link_start,
        tables.cand_links,
        tables.link_cap,
        tables.edge_cap,
        _POLICY_CODES[policy],
        float(score_weights[0]),
        float(score_weights[1]),
        policy_stream(seed),
        float(trace.horizon),
        float(warmup_time),
        int(check_every),
    )
    if err == ERR_CONSERVATION:
        raise RuntimeError(f"reservation conservation breached at event {err_ev}")
    if err == ERR_END_STATE:
        raise RuntimeError("residuals did not return to capacity after the trace drained")

    span = trace.horizon - warmup_time
    total_cpu = float(tables.edge_cap.sum())
    total_skr = float(tables.link_cap.sum())
    if span > 0:
        carried = key_int / span
        cpu_util = cpu_int / (span * total_cpu) if total_cpu > 0 else 0.0
        skr_util = key_int / (span * total_skr) if total_skr > 0 else 0.0
    else:
        carried = cpu_util = skr_util = 0.0
    metrics = RunMetrics(
        offered=int(offered),
        accepted=int(accepted),
        acceptance_ratio=float(accepted) / offered if offered else 1.0,
        carried_key_rate=carried,
        cpu_utilization=cpu_util,
        skr_utilization=skr_util,
        mean_path_hops=float(hops_sum) / accepted if accepted else 0.0,
    )
    return metrics, RequestLog(trace.ids, chosen, tables)


def replicate(
    topology: QkdTopology,
    spec: WorkloadSpec,
    policy: PolicyId | str,
    k: int,
    n_runs: int,
    base_seed: int | None = None,
    warmup_fraction: float = 0.1,
    score_weights: tuple[float, float] = (1.0, 1.0),
    check_every: int = 1000,
    backend: str | None = None,
) -> list[RunMetrics]:
    """Run ``n_runs`` independent replicates; replicate i uses seed base_seed+i."""
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs}")
    if base_seed is None:
        base_seed = spec.seed
    out = []
    for i in range(n_runs):
        s = replace(spec, seed=_check_seed(base_seed + i, "replicate seed"))
        trace = generate_trace(topology, s)
        metrics, _ = run(
            topology,
            trace,
            policy,
            k,
            s.seed,
            warmup_fraction=warmup_fraction,
            score_weights=score_weights,
            check_every=check_every,
            backend=backend,
        )
        out.append(metrics)
    return out
