"""Online admission control for edge applications on QKD-secured networks.

A discrete-event simulator plus a small policy library: requests arrive
online, each asking for an edge node's cpu and end-to-end secret-key rate
along a trusted-relay path; a policy either rejects the request or commits a
joint (edge, path) assignment for its lifetime. An exhaustive offline oracle
upper-bounds what any online policy could have admitted on small instances.
"""

from .model import (
    CAP_EPS,
    AppRequest,
    Assignment,
    EdgeNode,
    NetworkState,
    QkdLink,
    QkdTopology,
    new_state,
    validate_path,
)
from .oracle import ORACLE_LIMIT, OfflineInstance, offline_optimum
from .paths import PathSet, candidate_assignments, enumerate_candidates, k_shortest_paths
from .policies import Decision, PolicyId, decide, slack_score
from .simulate import (
    AttachmentDist,
    Dist,
    Event,
    EventKind,
    EventTrace,
    LogEntry,
    RequestLog,
    RunMetrics,
    WorkloadSpec,
    generate_trace,
    policy_stream,
    replicate,
    run,
    trace_stream,
)

__version__ = "0.1.0"

__all__ = [
    "CAP_EPS",
    "ORACLE_LIMIT",
    "AppRequest",
    "Assignment",
    "AttachmentDist",
    "Decision",
    "Dist",
    "EdgeNode",
    "Event",
    "EventKind",
    "EventTrace",
    "LogEntry",
    "NetworkState",
    "OfflineInstance",
    "PathSet",
    "PolicyId",
    "QkdLink",
    "QkdTopology",
    "RequestLog",
    "RunMetrics",
    "WorkloadSpec",
    "candidate_assignments",
    "decide",
    "enumerate_candidates",
    "generate_trace",
    "k_shortest_paths",
    "new_state",
    "offline_optimum",
    "policy_stream",
    "replicate",
    "run",
    "slack_score",
    "trace_stream",
    "validate_path",
]
