"""Network model: topology, requests, assignments, and the reservation ledger.

A topology is a simple undirected graph of QKD nodes. Each link produces
secret key at a fixed sustainable rate (bits/s); some nodes host an edge
compute facility with finite CPU capacity. An admitted request reserves its
full key-rate demand on every link of its path (trusted-relay model: the key
is re-encrypted hop by hop) and its full CPU demand on the serving edge node,
for the whole holding time. There is no partial service.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

# Additive tolerance for floating-point capacity comparisons. Residuals drift
# by a few ulps under reserve/release cycles, so boundary-exact demands must
# not be rejected for rounding reasons.
CAP_EPS = 1e-9


def _check_finite_nonneg(value: float, what: str) -> None:
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"{what} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class QkdLink:
    """Undirected QKD link with a secret-key rate in bits/s.

    Endpoints are normalized so ``a < b``.
    """

    a: int
    b: int
    skr: float

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"link endpoints must differ, got self-loop at {self.a}")
        if self.a > self.b:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)
        _check_finite_nonneg(self.skr, f"skr of link ({self.a},{self.b})")

    @property
    def pair(self) -> tuple[int, int]:
        return (self.a, self.b)


@dataclass(frozen=True)
class EdgeNode:
    """Compute facility co-located with a QKD node."""

    location: int
    cpu: float

    def __post_init__(self):
        _check_finite_nonneg(self.cpu, f"cpu of edge node at {self.location}")


@dataclass(frozen=True)
class QkdTopology:
    """Simple graph of QKD nodes with links and co-located edge nodes.

    Node ids must be dense in ``[0, n_nodes)``. The graph may be
    disconnected (the simulator warns), but at least one edge node must
    exist.
    """

    nodes: tuple[int, ...]
    links: tuple[QkdLink, ...]
    edges: tuple[EdgeNode, ...]

    def __post_init__(self):
        nodes = tuple(sorted(self.nodes))
        if not nodes:
            raise ValueError("topology has no nodes")
        if nodes != tuple(range(len(nodes))):
            raise ValueError("node ids must be dense in [0, N)")
        object.__setattr__(self, "nodes", nodes)

        links = tuple(sorted(self.links, key=lambda l: l.pair))
        seen_pairs = set()
        for link in links:
            if link.a not in self.node_set or link.b not in self.node_set:
                raise ValueError(f"link ({link.a},{link.b}) references unknown node")
            if link.pair in seen_pairs:
                raise ValueError(f"duplicate link between {link.a} and {link.b}")
            seen_pairs.add(link.pair)
        object.__setattr__(self, "links", links)

        edges = tuple(sorted(self.edges, key=lambda e: e.location))
        if not edges:
            raise ValueError("topology has no edge nodes")
        seen_locs = set()
        for edge in edges:
            if edge.location not in self.node_set:
                raise ValueError(f"edge node at unknown node {edge.location}")
            if edge.location in seen_locs:
                raise ValueError(f"duplicate edge node at {edge.location}")
            seen_locs.add(edge.location)
        object.__setattr__(self, "edges", edges)

    @cached_property
    def node_set(self) -> frozenset[int]:
        return frozenset(self.nodes)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @cached_property
    def link_by_pair(self) -> dict[tuple[int, int], QkdLink]:
        return {l.pair: l for l in self.links}

    @cached_property
    def edge_by_location(self) -> dict[int, EdgeNode]:
        return {e.location: e for e in self.edges}

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        nbrs: dict[int, list[int]] = {n: [] for n in self.nodes}
        for l in self.links:
            nbrs[l.a].append(l.b)
            nbrs[l.b].append(l.a)
        return {n: tuple(sorted(v)) for n, v in nbrs.items()}

    def link_between(self, a: int, b: int) -> QkdLink | None:
        return self.link_by_pair.get((a, b) if a < b else (b, a))

    @cached_property
    def is_connected(self) -> bool:
        seen = {self.nodes[0]}
        stack = [self.nodes[0]]
        while stack:
            for nbr in self.adjacency[stack.pop()]:
                if nbr not in seen:
                    seen.add(nbr)
                    stack.append(nbr)
        return len(seen) == self.n_nodes

    def scaled(self, skr_scale: float = 1.0, cpu_scale: float = 1.0) -> "QkdTopology":
        """Same graph with all link rates and/or CPU capacities multiplied."""
        if skr_scale <= 0 or cpu_scale <= 0:
            raise ValueError("scale factors must be positive")
        return QkdTopology(
            nodes=self.nodes,
            links=tuple(QkdLink(l.a, l.b, l.skr * skr_scale) for l in self.links),
            edges=tuple(EdgeNode(e.location, e.cpu * cpu_scale) for e in self.edges),
        )


@dataclass(frozen=True)
class AppRequest:
    """One online arrival: where it attaches, what it demands, how long it stays."""

    id: int
    arrival: float
    attachment: int
    key_rate: float
    cpu: float
    holding: float

    def __post_init__(self):
        if self.id < 0:
            raise ValueError(f"request id must be >= 0, got {self.id}")
        if self.arrival < 0 or not math.isfinite(self.arrival):
            raise ValueError(f"request {self.id}: arrival must be finite and >= 0")
        for name in ("key_rate", "cpu", "holding"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ValueError(f"request {self.id}: {name} must be finite and > 0")


@dataclass(frozen=True)
class Assignment:
    """Joint (edge node, path) choice for one admitted request.

    The path runs from the request's attachment to the serving edge node and
    must be simple. A request served where it attaches uses the degenerate
    path ``(node,)`` and reserves no key rate anywhere.
    """

    request: int
    edge: int
    path: tuple[int, ...]
    reserved_key_rate: float
    reserved_cpu: float

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(self.path))

    @classmethod
    def for_request(cls, request: AppRequest, edge: int, path: tuple[int, ...]) -> "Assignment":
        return cls(
            request=request.id,
            edge=edge,
            path=tuple(path),
            reserved_key_rate=request.key_rate,
            reserved_cpu=request.cpu,
        )

    @property
    def hops(self) -> int:
        return len(self.path) - 1


def validate_path(topology: QkdTopology, attachment: int, edge: int, path) -> tuple[int, ...]:
    """Check that ``path`` is a structurally valid attachment-to-edge path.

    Raises ValueError naming the problem; returns the path as a tuple.
    Capacity is not considered here.
    """
    path = tuple(path)
    if edge not in topology.edge_by_location:
        raise ValueError(f"no edge node at {edge}")
    if not path:
        raise ValueError("path is empty")
    if path[0] != attachment:
        raise ValueError(f"path starts at {path[0]}, expected attachment {attachment}")
    if path[-1] != edge:
        raise ValueError(f"path ends at {path[-1]}, expected edge {edge}")
    if attachment == edge and len(path) != 1:
        raise ValueError("co-located request must use the single-node path")
    if len(set(path)) != len(path):
        raise ValueError("path repeats a node")
    for u, v in zip(path, path[1:]):
        if topology.link_between(u, v) is None:
            raise ValueError(f"no link between {u} and {v}")
    return path


class NetworkState:
    """Residual capacities plus the set of active assignments.

    The state is a plain value owned by one simulation run; ``reserve`` and
    ``release`` mutate it in place. Residuals always equal capacity minus the
    sum of active reservations (up to float tolerance), which
    :meth:`assert_conserved` re-checks from scratch.
    """

    def __init__(self, topology: QkdTopology):
        self.topology = topology
        self.residual_skr: dict[tuple[int, int], float] = {
            l.pair: l.skr for l in topology.links
        }
        self.residual_cpu: dict[int, float] = {
            e.location: e.cpu for e in topology.edges
        }
        self.active: dict[int, Assignment] = {}

    def copy(self) -> "NetworkState":
        dup = NetworkState.__new__(NetworkState)
        dup.topology = self.topology
        dup.residual_skr = dict(self.residual_skr)
        dup.residual_cpu = dict(self.residual_cpu)
        dup.active = dict(self.active)
        return dup

    def _capacity_ok(self, edge: int, path: tuple[int, ...], key_rate: float, cpu: float) -> bool:
        if cpu > self.residual_cpu[edge] + CAP_EPS:
            return False
        for u, v in zip(path, path[1:]):
            pair = (u, v) if u < v else (v, u)
            if key_rate > self.residual_skr[pair] + CAP_EPS:
                return False
        return True

    def feasible(self, request: AppRequest, edge: int, path) -> bool:
        """True iff the request's demands fit the residuals on (edge, path).

        A structurally invalid path raises instead of returning False, so
        caller bugs are not mistaken for capacity rejections.
        """
        path = validate_path(self.topology, request.attachment, edge, path)
        return self._capacity_ok(edge, path, request.key_rate, request.cpu)

    def reserve(self, assignment: Assignment) -> None:
        """Debit the assignment's reservations and mark it active."""
        if assignment.request in self.active:
            raise ValueError(f"request {assignment.request} already active")
        path = validate_path(
            self.topology, assignment.path[0], assignment.edge, assignment.path
        )
        if not self._capacity_ok(
            assignment.edge, path, assignment.reserved_key_rate, assignment.reserved_cpu
        ):
            raise ValueError(
                f"assignment for request {assignment.request} is infeasible"
            )
        self.residual_cpu[assignment.edge] -= assignment.reserved_cpu
        for u, v in zip(path, path[1:]):
            pair = (u, v) if u < v else (v, u)
            self.residual_skr[pair] -= assignment.reserved_key_rate
        self.active[assignment.request] = assignment

    def release(self, request_id: int) -> Assignment:
        """Credit back the reservations of an active assignment and drop it."""
        if request_id not in self.active:
            raise KeyError(f"request {request_id} is not active")
        assignment = self.active.pop(request_id)
        self.residual_cpu[assignment.edge] += assignment.reserved_cpu
        for u, v in zip(assignment.path, assignment.path[1:]):
            pair = (u, v) if u < v else (v, u)
            self.residual_skr[pair] += assignment.reserved_key_rate
        return assignment

    def conservation_error(self) -> float:
        """Largest |capacity - active reservations - residual| over all resources."""
        worst = 0.0
        used_skr: dict[tuple[int, int], float] = {p: 0.0 for p in self.residual_skr}
        used_cpu: dict[int, float] = {e: 0.0 for e in self.residual_cpu}
        for asg in self.active.values():
            used_cpu[asg.edge] += asg.reserved_cpu
            for u, v in zip(asg.path, asg.path[1:]):
                pair = (u, v) if u < v else (v, u)
                used_skr[pair] += asg.reserved_key_rate
        for link in self.topology.links:
            worst = max(
                worst, abs(link.skr - used_skr[link.pair] - self.residual_skr[link.pair])
            )
        for edge in self.topology.edges:
            worst = max(
                worst,
                abs(edge.cpu - used_cpu[edge.location] - self.residual_cpu[edge.location]),
            )
        return worst

    def assert_conserved(self, tol: float = CAP_EPS) -> None:
        err = self.conservation_error()
        if err > tol:
            raise RuntimeError(f"conservation violated by {err:.3e}")


def new_state(topology: QkdTopology) -> NetworkState:
    """Fresh state with residuals at full capacity and nothing active."""
    return NetworkState(topology)
