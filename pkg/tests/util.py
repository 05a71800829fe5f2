"""Shared builders for randomized tests."""

import numpy as np

from qkdadmit import AppRequest, EdgeNode, QkdLink, QkdTopology


def random_topology(rng: np.random.Generator, max_nodes: int = 8) -> QkdTopology:
    """A random simple graph with at least one edge node."""
    n = int(rng.integers(1, max_nodes + 1))
    p = rng.uniform(0.25, 0.9)
    links = tuple(
        QkdLink(a, b, float(rng.uniform(0.5, 10.0)))
        for a in range(n)
        for b in range(a + 1, n)
        if rng.random() < p
    )
    n_edges = int(rng.integers(1, n + 1))
    locations = rng.choice(n, size=n_edges, replace=False)
    edges = tuple(EdgeNode(int(loc), float(rng.uniform(0.5, 8.0))) for loc in locations)
    return QkdTopology(nodes=tuple(range(n)), links=links, edges=edges)


def random_requests(
    rng: np.random.Generator, topology: QkdTopology, max_requests: int = 8
) -> tuple[AppRequest, ...]:
    """Random overlapping requests attached anywhere on the topology."""
    n = int(rng.integers(0, max_requests + 1))
    out = []
    t = 0.0
    for i in range(n):
        t += float(rng.uniform(0.0, 2.0))
        out.append(
            AppRequest(
                id=i,
                arrival=t,
                attachment=int(rng.integers(0, topology.n_nodes)),
                key_rate=float(rng.uniform(0.2, 4.0)),
                cpu=float(rng.uniform(0.2, 4.0)),
                holding=float(rng.uniform(0.5, 5.0)),
            )
        )
    return tuple(out)


def all_simple_paths(topology: QkdTopology, origin: int, target: int) -> list:
    """Brute-force DFS enumeration of simple paths, sorted by (hops, sequence).

    Independent of the package's path search; serves as its ordering oracle.
    """
    found = []

    def walk(node, path):
        if node == target:
            found.append(tuple(path))
            return
        for nxt in topology.adjacency[node]:
            if nxt not in path:
                path.append(nxt)
                walk(nxt, path)
                path.pop()

    walk(origin, [origin])
    return sorted(found, key=lambda p: (len(p), p))
