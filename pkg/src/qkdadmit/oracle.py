"""Offline brute-force optimum for small instances.

With the full request list known in advance, the search maximizes how many
requests could be admitted simultaneously by a clairvoyant scheduler, over
all subsets and all joint (edge, path) choices. The result upper-bounds what
any online policy can accept on the same instance. Exponential in the number
of requests, hence the hard instance-size cap.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import AppRequest, Assignment, CAP_EPS, QkdTopology
from .paths import _ordered_simple_paths, enumerate_candidates

ORACLE_LIMIT = 12


@dataclass(frozen=True)
class OfflineInstance:
    """A full lookahead instance: topology, all requests, candidate-path budget.

    ``k=0`` means every simple path is a candidate, making the optimum
    independent of any policy's path budget.
    """

    topology: QkdTopology
    requests: tuple[AppRequest, ...]
    k: int = 0

    def __post_init__(self):
        reqs = tuple(sorted(self.requests, key=lambda r: r.id))
        if len(reqs) > ORACLE_LIMIT:
            raise ValueError(
                f"instance exceeds oracle limit ({len(reqs)} > {ORACLE_LIMIT} requests)"
            )
        ids = [r.id for r in reqs]
        if len(set(ids)) != len(ids):
            raise ValueError("request ids must be unique")
        if self.k < 0:
            raise ValueError(f"k must be >= 0, got {self.k}")
        object.__setattr__(self, "requests", reqs)


def _all_path_candidates(topology: QkdTopology, attachment: int) -> tuple:
    ranked = []
    for edge in topology.edges:
        for path in _ordered_simple_paths(topology, attachment, edge.location):
            ranked.append((len(path) - 1, edge.location, path))
    ranked.sort()
    return tuple((edge, path) for _, edge, path in ranked)


def _usable(topology: QkdTopology, request: AppRequest, edge: int, path) -> bool:
    # a candidate the request could not use even on an idle network is dead
    if request.cpu > topology.edge_by_location[edge].cpu + CAP_EPS:
        return False
    for u, v in zip(path, path[1:]):
        pair = (u, v) if u < v else (v, u)
        if request.key_rate > topology.link_by_pair[pair].skr + CAP_EPS:
            return False
    return True


def _fits(topology: QkdTopology, accepted, request: AppRequest, edge: int, path) -> bool:
    """Can the candidate join the accepted set without a capacity breach?

    Reserved amounts are piecewise constant, so it is enough to check at the
    interval boundaries that fall inside the request's own occupancy span.
    """
    lo = request.arrival
    hi = request.arrival + request.holding
    checkpoints = {lo}
    for other, _, _ in accepted:
        for t in (other.arrival, other.arrival + other.holding):
            if lo < t < hi:
                checkpoints.add(t)
    path_pairs = [(u, v) if u < v else (v, u) for u, v in zip(path, path[1:])]
    for t in checkpoints:
        cpu_used = request.cpu
        key_used = dict.fromkeys(path_pairs, request.key_rate)
        for other, other_edge, other_path in accepted:
            if not other.arrival <= t < other.arrival + other.holding:
                continue
            if other_edge == edge:
                cpu_used += other.cpu
            for u, v in zip(other_path, other_path[1:]):
                pair = (u, v) if u < v else (v, u)
                if pair in key_used:
                    key_used[pair] += other.key_rate
        if cpu_used > topology.edge_by_location[edge].cpu + CAP_EPS:
            return False
        for pair, used in key_used.items():
            if used > topology.link_by_pair[pair].skr + CAP_EPS:
                return False
    return True


def offline_optimum(
    instance: OfflineInstance, weights=None
) -> tuple[int | float, tuple[Assignment, ...]]:
    """Exhaustive search for the best admissible subset.

    Returns ``(max_accepted, witness)`` where the witness assignments achieve
    the optimum. The search tries requests in id order, acceptance before
    rejection and candidates in (hops, edge, path) order, pruning branches
    that cannot strictly beat the incumbent; the first optimum found
    therefore has the lexicographically smallest accepted id-set. ``weights``
    optionally scores each request (aligned with the instance's id-sorted
    requests); by default every request counts 1 and the returned value is
    the accepted count.
    """
    topology = instance.topology
    requests = instance.requests
    n = len(requests)
    if weights is None:
        w = [1.0] * n
    else:
        w = [float(x) for x in weights]
        if len(w) != n:
            raise ValueError(f"{len(w)} weights for {n} requests")
        if any(x < 0 for x in w):
            raise ValueError("weights must be >= 0")

    candidates = []
    for r in requests:
        if instance.k == 0:
            cands = _all_path_candidates(topology, r.attachment)
        else:
            cands = enumerate_candidates(topology, r.attachment, instance.k)
        candidates.append([(e, p) for e, p in cands if _usable(topology, r, e, p)])

    remaining = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        remaining[i] = remaining[i + 1] + w[i]

    best_value = -1.0
    best_witness: list = []
    accepted: list = []

    def search(i: int, value: float) -> None:
        nonlocal best_value, best_witness
        if value + remaining[i] <= best_value:
            return
        if i == n:
            if value > best_value:
                best_value = value
                best_witness = list(accepted)
            return
        r = requests[i]
        for edge, path in candidates[i]:
            if _fits(topology, accepted, r, edge, path):
                accepted.append((r, edge, path))
                search(i + 1, value + w[i])
                accepted.pop()
        search(i + 1, value)

    search(0, 0.0)

    witness = tuple(Assignment.for_request(r, edge, path) for r, edge, path in best_witness)
    if weights is None:
        return len(witness), witness
    return best_value, witness
