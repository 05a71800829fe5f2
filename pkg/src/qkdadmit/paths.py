"""Candidate path enumeration: k loopless shortest paths and joint candidates.

Hop count is the path metric: every traversed link reserves the same key
rate, so fewer hops means less total key consumption. Ties are broken by the
lexicographic order of the node sequence, which makes every listing below
fully deterministic.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from .model import AppRequest, NetworkState, QkdTopology


@dataclass(frozen=True)
class PathSet:
    """Loopless paths from origin to target, sorted by (hops, node sequence)."""

    origin: int
    target: int
    paths: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.paths)


def _bfs_hops(topology: QkdTopology, target: int) -> dict[int, int]:
    dist = {target: 0}
    queue = deque([target])
    while queue:
        node = queue.popleft()
        for nbr in topology.adjacency[node]:
            if nbr not in dist:
                dist[nbr] = dist[node] + 1
                queue.append(nbr)
    return dist


def _ordered_simple_paths(
    topology: QkdTopology, origin: int, target: int
) -> Iterator[tuple[int, ...]]:
    """Yield every simple origin-to-target path in (hops, lexicographic) order.

    Best-first search over partial simple paths. Each partial path is scored
    with hops so far plus the hop distance from its tip to the target
    (admissible and consistent, so scores never decrease along extensions),
    and the heap breaks score ties by the node sequence itself. A sequence
    strictly precedes all of its own extensions, so the first completed path
    popped is always the (hops, lex)-smallest one remaining.
    """
    if origin == target:
        yield (origin,)
        return
    to_target = _bfs_hops(topology, target)
    if origin not in to_target:
        return
    heap: list[tuple[int, tuple[int, ...]]] = [(to_target[origin], (origin,))]
    while heap:
        score, path = heapq.heappop(heap)
        tip = path[-1]
        if tip == target:
            yield path
            continue
        hops = len(path) - 1
        for nbr in topology.adjacency[tip]:
            if nbr in path or nbr not in to_target:
                continue
            heapq.heappush(heap, (hops + 1 + to_target[nbr], path + (nbr,)))


def k_shortest_paths(topology: QkdTopology, origin: int, target: int, k: int) -> PathSet:
    """The k fewest-hop loopless paths between two nodes, or fewer if fewer exist.

    Raises for unknown node ids or k < 1. An origin equal to the target
    yields the single trivial path.
    """
    if origin not in topology.node_set:
        raise ValueError(f"unknown origin node {origin}")
    if target not in topology.node_set:
        raise ValueError(f"unknown target node {target}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    found = []
    for path in _ordered_simple_paths(topology, origin, target):
        found.append(path)
        if len(found) == k:
            break
    return PathSet(origin=origin, target=target, paths=tuple(found))


@lru_cache(maxsize=4096)
def _candidates_cached(
    topology: QkdTopology, attachment: int, k: int
) -> tuple[tuple[int, tuple[int, ...]], ...]:
    ranked = []
    for edge in topology.edges:
        for path in k_shortest_paths(topology, attachment, edge.location, k).paths:
            ranked.append((len(path) - 1, edge.location, path))
    ranked.sort()
    return tuple((edge, path) for _, edge, path in ranked)


def enumerate_candidates(
    topology: QkdTopology, attachment: int, k: int
) -> tuple[tuple[int, tuple[int, ...]], ...]:
    """All (edge, path) pairs reachable from an attachment, capacity-blind.

    For every edge node, the k shortest paths to it; the combined list is
    ordered by (hops, edge node id, lexicographic path). Cached per
    (topology, attachment, k) since it does not depend on network state.
    """
    if attachment not in topology.node_set:
        raise ValueError(f"unknown attachment node {attachment}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return _candidates_cached(topology, attachment, k)


def candidate_assignments(
    state: NetworkState, topology: QkdTopology, request: AppRequest, k: int
) -> list[tuple[int, tuple[int, ...]]]:
    """The feasible (edge, path) candidates for one request, in decision order."""
    return [
        (edge, path)
        for edge, path in enumerate_candidates(topology, request.attachment, k)
        if state.feasible(request, edge, path)
    ]
