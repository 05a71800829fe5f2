"""Online admission policies: one irrevocable accept/reject per arrival.

All policies are work-conserving: they reject only when no feasible
(edge, path) candidate exists. They differ only in which candidate they pick.

The packing policies score a candidate by its post-admission slack

    S = w_cpu * (residual_cpu[edge] - cpu) / cpu_capacity[edge]
      + w_key * min over path links of (residual_skr[link] - key_rate) / skr[link]

normalized by capacity so CPU and key-rate slack are comparable; a
degenerate single-node path contributes a key slack of zero. ``best_fit``
minimizes S (tightest fit), ``load_balance`` maximizes it (most headroom).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .model import AppRequest, Assignment, NetworkState, QkdTopology
from .paths import candidate_assignments


class PolicyId(enum.Enum):
    GREEDY_FIRST_FIT = "greedy_first_fit"
    BEST_FIT = "best_fit"
    LOAD_BALANCE = "load_balance"
    RANDOM_FIT = "random_fit"

    @classmethod
    def parse(cls, name: str) -> "PolicyId":
        try:
            return cls(name.strip().lower())
        except ValueError:
            known = ", ".join(p.value for p in cls)
            raise ValueError(f"unknown policy {name!r}; known policies: {known}") from None


@dataclass(frozen=True)
class Decision:
    """Outcome of one admission decision: an assignment, or a rejection."""

    assignment: Assignment | None = None

    @property
    def accepted(self) -> bool:
        return self.assignment is not None

    @classmethod
    def reject(cls) -> "Decision":
        return cls(None)

    @classmethod
    def accept(cls, assignment: Assignment) -> "Decision":
        return cls(assignment)


def slack_score(
    state: NetworkState,
    topology: QkdTopology,
    request: AppRequest,
    edge: int,
    path: tuple[int, ...],
    w_cpu: float = 1.0,
    w_key: float = 1.0,
) -> float:
    """Post-admission slack of a candidate, dimensionless."""
    cpu_term = (state.residual_cpu[edge] - request.cpu) / topology.edge_by_location[edge].cpu
    key_term = 0.0
    first = True
    for u, v in zip(path, path[1:]):
        pair = (u, v) if u < v else (v, u)
        term = (state.residual_skr[pair] - request.key_rate) / topology.link_by_pair[pair].skr
        if first or term < key_term:
            key_term = term
            first = False
    return w_cpu * cpu_term + w_key * key_term


def decide(
    policy: PolicyId,
    state: NetworkState,
    topology: QkdTopology,
    request: AppRequest,
    k: int,
    rng: np.random.Generator | None = None,
    score_weights: tuple[float, float] = (1.0, 1.0),
) -> Decision:
    """Pick an assignment for one arrival, or reject if nothing fits.

    Only ``random_fit`` consumes randomness: exactly one draw from ``rng``
    when at least one candidate exists. The other policies are pure
    functions of the state, topology, request, and k.
    """
    candidates = candidate_assignments(state, topology, request, k)
    if not candidates:
        return Decision.reject()

    w_cpu, w_key = score_weights
    if policy is PolicyId.GREEDY_FIRST_FIT:
        edge, path = candidates[0]
    elif policy in (PolicyId.BEST_FIT, PolicyId.LOAD_BALANCE):
        best = 0
        best_score = slack_score(state, topology, request, *candidates[0], w_cpu, w_key)
        for i in range(1, len(candidates)):
            score = slack_score(state, topology, request, *candidates[i], w_cpu, w_key)
            if (policy is PolicyId.BEST_FIT and score < best_score) or (
                policy is PolicyId.LOAD_BALANCE and score > best_score
            ):
                best = i
                best_score = score
        edge, path = candidates[best]
    elif policy is PolicyId.RANDOM_FIT:
        if rng is None:
            raise ValueError("random_fit requires an rng")
        u = rng.random()
        idx = int(u * len(candidates))
        if idx >= len(candidates):
            idx = len(candidates) - 1
        edge, path = candidates[idx]
    else:  # pragma: no cover - closed enum
        raise ValueError(f"unhandled policy {policy}")

    return Decision.accept(Assignment.for_request(request, edge, path))
